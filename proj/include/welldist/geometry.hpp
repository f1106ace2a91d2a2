#pragma once

#include "welldist/core.hpp"

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace welldist {

enum class BodyKind { ball, ellipse, parabola, polar };

struct BoundarySample {
  PointMatrix points;           // d x n
  std::vector<double> weights;  // surface measure per node
};

/// A convex body K given by its Minkowski functional and a parametrization
/// of its boundary. d = 2 bodies expose a periodic parameter u in [0, 1)
/// whose uniform grids are nested under doubling.
class ConvexBody {
 public:
  static ConvexBody ball(int d);
  /// ellipse(a, b) for d = 2, ellipsoid(a, b, c) for d = 3.
  static ConvexBody ellipsoid(const std::vector<double>& axes);
  /// Parabolic arcs x = y^2 (x in [1/16, 1]) closed by two C^1 circular
  /// arcs, translated so the origin sits at (1, 0) and scaled to area pi.
  static ConvexBody parabola_patch();

  int dim() const { return dim_; }
  BodyKind kind() const { return kind_; }
  const std::vector<double>& axes() const { return axes_; }
  /// "ball", "ellipse(2,1)", "parabola", "polar(parabola)", ...
  std::string name() const;

  double minkowski(const Eigen::Ref<const Vector>& x) const;
  /// Support function h_K(x) = sup_{y in K} x.y (the gauge of the polar body).
  double support(const Eigen::Ref<const Vector>& x) const;
  /// The polar body K*; closed form for balls and ellipsoids.
  ConvexBody polar() const;

  /// |dK|: perimeter for d = 2, surface area for d = 3.
  double surface_measure() const { return surface_; }
  /// max |x| over K.
  double circumradius() const { return circumradius_; }
  double area_or_volume() const { return volume_; }
  bool volume_normalized() const;
  bool centrally_symmetric() const { return kind_ != BodyKind::parabola && kind_ != BodyKind::polar; }
  std::array<double, 2> curvature_range() const { return curvature_; }

  /// d = 2: boundary point and surface-measure density |gamma'(u)| at u.
  Vector boundary_at(double u) const;
  double boundary_speed(double u) const;

  /// n nodes with surface-measure weights. d = 2: uniform u-grid k/n;
  /// d = 3: Fibonacci directions projected onto dK with Jacobian weights.
  BoundarySample boundary_sample(int n) const;

  /// Parabolic-arc parameters of the parabola patch: the origin shift and
  /// the scale lambda (K = lambda (K_raw - shift)).
  double patch_shift() const { return shift_; }
  double patch_scale() const { return scale_; }

 private:
  ConvexBody() = default;
  void finish_planar();

  int dim_ = 2;
  BodyKind kind_ = BodyKind::ball;
  std::vector<double> axes_;
  double surface_ = 0.0;
  double volume_ = 0.0;
  double circumradius_ = 1.0;
  std::array<double, 2> curvature_{1.0, 1.0};
  double shift_ = 0.0;
  double scale_ = 1.0;
  // Arc-length table for ellipses: theta grid and cumulative length.
  std::vector<double> table_theta_, table_len_;
  // Polar of the parabola patch: the primal body it was built from.
  std::shared_ptr<const ConvexBody> primal_;
};

ConvexBody parse_body(const std::string& text, int dim);

double minkowski_norm(const ConvexBody& K, const Eigen::Ref<const Vector>& x);
BoundarySample boundary_sample(const ConvexBody& K, int n);
/// sup_{y in dK} x.y, by scanning a boundary sample and golden-section
/// refinement around the best node.
double dual_norm(const ConvexBody& K, const Eigen::Ref<const Vector>& x);

struct LatticeCount {
  long long count = 0;
  PointMatrix points;  // d x count
};

/// z in Z^d with |‖z‖_K - tau| <= eps. Exact integer arithmetic for balls
/// at eps = 0.
LatticeCount lattice_points_near_dilate(const ConvexBody& K, double tau, double eps,
                                        bool keep_points = true);

enum class Branches { upper, both };

/// Integer points on {(X, sqrt(tau X)) : X in [0, tau]} for tau = num/den.
long long parabola_arc_count(long long num, long long den, Branches branches);
/// Same for a floating tau that must be an exact rational with denominator
/// <= 10^6; anything else is rejected.
long long parabola_arc_count(double tau, Branches branches);

ConvexBody make_parabola_body();

struct ReferenceBounds {
  double beta_gnr = 0.0;
  std::optional<double> gamma_muller;
};

/// Best known decay exponent table and lattice-error exponent references.
ReferenceBounds reference_bounds(int d, double s);

}  // namespace welldist
