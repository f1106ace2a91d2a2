#pragma once

#include "welldist/geometry.hpp"
#include "welldist/pointsets.hpp"

#include <string>
#include <utility>
#include <vector>

namespace welldist {

/// Pairwise K-distances over unordered pairs i < j, measured as
/// ‖x_j - x_i‖_K, sorted ascending.
struct DistanceStats {
  std::string source;  // point-set kind
  std::string norm;    // ConvexBody::name()
  long long n_points = 0;
  std::vector<double> sorted;
};

DistanceStats distance_multiset(const PointSet& ps, const ConvexBody& K);
DistanceStats distance_multiset(const PointMatrix& points, const ConvexBody& K);

/// Greedy gap clustering: counts entries exceeding the last counted one by
/// more than delta (delta = 0 means a 1e-12 tie tolerance).
long long distinct_count(const DistanceStats& stats, double delta);

struct Multiplicity {
  long long count = 0;
  double value = 0.0;  // first distance of the fullest window
};

/// Largest number of entries inside a window [v, v + delta].
Multiplicity max_multiplicity(const DistanceStats& stats, double delta);

/// #{(p, c) : | ‖p - c‖_K - tau | <= eps}. Integral points with K = ball,
/// integral tau^2 and eps = 0 are compared as exact squared distances.
long long incidence_count(const PointSet& P, const PointSet& centers, double tau, const ConvexBody& K, double eps);

/// Exact (|p - c|^2, count) over ordered pairs with p != c, for integral
/// point sets and the Euclidean norm; the count at n is
/// incidence_count(P, centers, sqrt(n), ball, 0).
std::vector<std::pair<long long, long long>> incidence_profile(const PointSet& P, const PointSet& centers);

}  // namespace welldist
