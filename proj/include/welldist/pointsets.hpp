#pragma once

#include "welldist/core.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace welldist {

enum class SetKind { lattice, perturbed, jittered, custom };
enum class Shape { ball, cube };

std::string to_string(SetKind kind);
std::string to_string(Shape shape);
SetKind parse_set_kind(const std::string& name);
Shape parse_shape(const std::string& name);

struct Provenance {
  SetKind kind = SetKind::lattice;
  std::uint64_t seed = 0;
  double jitter = 0.0;
};

struct Truncation {
  Shape shape = Shape::ball;
  double radius = 1.0;
};

/// Finite Delone configuration. Columns of `points` are the points.
struct PointSet {
  int dim = 0;
  PointMatrix points;
  Provenance provenance;
  Truncation truncation;
  bool scaled = false;

  std::size_t size() const { return static_cast<std::size_t>(points.cols()); }
  auto point(std::size_t i) const { return points.col(static_cast<Eigen::Index>(i)); }
};

struct DeloneConstants {
  double separation = 0.0;
  double covering = 0.0;
};

struct DeloneReport {
  bool ok = false;
  DeloneConstants constants;
  /// Center of the first cube of side `covering` found empty.
  std::optional<Vector> empty_cube_center;
  std::size_t cubes_checked = 0;
  std::string message;
};

/// All points of the chosen model inside the closed truncation region of
/// radius q, in lexicographic order of their integer cells.
PointSet generate(SetKind kind, int dim, double q, Shape shape, std::uint64_t seed = 0,
                  double jitter = 0.0);

/// Wraps explicit coordinates; the truncation radius defaults to the largest
/// norm (sup-norm for cubes).
PointSet make_custom(PointMatrix points, Shape shape = Shape::ball,
                     std::optional<double> radius = std::nullopt);

/// q^{-1} A_q.
PointSet rescale_to_unit(const PointSet& ps);

/// Minimum pairwise Euclidean distance (infinity for fewer than two points).
double min_separation(const PointMatrix& points);

/// Covering side guaranteed by the generator for its kind.
double default_covering(const Provenance& provenance);

/// Measures the separation and checks every cube of side `covering` centered
/// on the half-step grid inside the truncation region.
DeloneReport verify_delone(const PointSet& ps, std::optional<double> covering = std::nullopt);

/// Uniform double in [0, 1) determined by (seed, integer cell, stream).
double cell_uniform(std::uint64_t seed, const Eigen::Ref<const Eigen::VectorXi>& cell, int stream);

}  // namespace welldist
