#include "welldist/distances.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace welldist {

namespace {

bool integral(const PointMatrix& p) {
  for (Eigen::Index j = 0; j < p.cols(); ++j)
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      const double v = p(i, j);
      if (v != std::nearbyint(v) || std::fabs(v) > 1e15) return false;
    }
  return true;
}

double tie_tolerance(double v) { return 1e-12 * std::max(1.0, std::fabs(v)); }

void check_pairs(double pairs, double limit, const char* what) {
  if (pairs > limit) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: %.3g pairs exceed the budget of %.3g", what, pairs, limit);
    throw BudgetError(buf);
  }
}

}  // namespace

DistanceStats distance_multiset(const PointMatrix& points, const ConvexBody& K) {
  const auto n = static_cast<std::size_t>(points.cols());
  if (n < 2) throw DomainError("distance_multiset: need at least 2 points");
  if (points.rows() != K.dim()) throw DomainError("distance_multiset: dimension mismatch");
  if (n > 100000) throw BudgetError("distance_multiset: more than 1e5 points");
  check_pairs(0.5 * static_cast<double>(n) * static_cast<double>(n - 1), 5e9, "distance_multiset");
  DistanceStats out;
  out.norm = K.name();
  out.n_points = static_cast<long long>(n);
  out.sorted.resize(n * (n - 1) / 2);
  // Row i of the upper triangle starts at offset i n - i (i + 1) / 2.
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    Vector diff(points.rows());
    for (std::size_t i = lo; i < hi; ++i) {
      std::size_t at = i * n - i * (i + 1) / 2;
      for (std::size_t j = i + 1; j < n; ++j) {
        diff = points.col(static_cast<Eigen::Index>(j)) - points.col(static_cast<Eigen::Index>(i));
        out.sorted[at++] = K.minkowski(diff);
      }
    }
  });
  std::sort(out.sorted.begin(), out.sorted.end());
  return out;
}

DistanceStats distance_multiset(const PointSet& ps, const ConvexBody& K) {
  DistanceStats out = distance_multiset(ps.points, K);
  out.source = to_string(ps.provenance.kind);
  return out;
}

long long distinct_count(const DistanceStats& stats, double delta) {
  if (!(delta >= 0.0)) throw DomainError("distinct_count: delta must be nonnegative");
  long long count = 0;
  double last = 0.0;
  for (double v : stats.sorted) {
    const double gap = delta > 0.0 ? delta : tie_tolerance(v);
    if (count == 0 || v - last > gap) {
      ++count;
      last = v;
    }
  }
  return count;
}

Multiplicity max_multiplicity(const DistanceStats& stats, double delta) {
  if (!(delta >= 0.0)) throw DomainError("max_multiplicity: delta must be nonnegative");
  Multiplicity best;
  const auto& v = stats.sorted;
  std::size_t j = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double width = delta > 0.0 ? delta : tie_tolerance(v[i]);
    if (j < i) j = i;
    while (j + 1 < v.size() && v[j + 1] - v[i] <= width) ++j;
    const long long c = static_cast<long long>(j - i + 1);
    if (c > best.count) {
      best.count = c;
      best.value = v[i];
    }
  }
  return best;
}

long long incidence_count(const PointSet& P, const PointSet& centers, double tau, const ConvexBody& K, double eps) {
  if (P.dim != centers.dim || P.dim != K.dim()) throw DomainError("incidence_count: dimension mismatch");
  if (!(tau >= 0.0 && eps >= 0.0)) throw DomainError("incidence_count: tau and eps must be nonnegative");
  const auto np = static_cast<std::size_t>(P.points.cols());
  const auto nc = static_cast<std::size_t>(centers.points.cols());
  check_pairs(static_cast<double>(np) * static_cast<double>(nc), 1e9, "incidence_count");
  const int d = P.dim;
  const double t2 = tau * tau;
  const bool exact = K.kind() == BodyKind::ball && eps == 0.0 && integral(P.points) && integral(centers.points) &&
                     std::fabs(t2 - std::nearbyint(t2)) <= 1e-9 * std::max(1.0, t2);
  std::vector<long long> partial(np, 0);
  if (exact) {
    const auto target = static_cast<long long>(std::llround(t2));
    parallel_for(np, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i)
        for (std::size_t j = 0; j < nc; ++j) {
          long long acc = 0;
          for (int k = 0; k < d; ++k) {
            const auto diff = static_cast<long long>(P.points(k, static_cast<Eigen::Index>(i)) -
                                                     centers.points(k, static_cast<Eigen::Index>(j)));
            acc += diff * diff;
          }
          if (acc == target) ++partial[i];
        }
    });
  } else {
    const double tol = eps + 1e-12 * std::max(1.0, tau);
    parallel_for(np, [&](std::size_t lo, std::size_t hi) {
      Vector diff(d);
      for (std::size_t i = lo; i < hi; ++i)
        for (std::size_t j = 0; j < nc; ++j) {
          diff = P.points.col(static_cast<Eigen::Index>(i)) - centers.points.col(static_cast<Eigen::Index>(j));
          if (std::fabs(K.minkowski(diff) - tau) <= tol) ++partial[i];
        }
    });
  }
  long long total = 0;
  for (long long c : partial) total += c;
  return total;
}

std::vector<std::pair<long long, long long>> incidence_profile(const PointSet& P, const PointSet& centers) {
  if (P.dim != centers.dim) throw DomainError("incidence_profile: dimension mismatch");
  if (!integral(P.points) || !integral(centers.points)) throw DomainError("incidence_profile: needs integral points");
  check_pairs(static_cast<double>(P.points.cols()) * static_cast<double>(centers.points.cols()), 1e9,
              "incidence_profile");
  std::map<long long, long long> hist;
  for (Eigen::Index i = 0; i < P.points.cols(); ++i)
    for (Eigen::Index j = 0; j < centers.points.cols(); ++j) {
      long long acc = 0;
      for (int k = 0; k < P.dim; ++k) {
        const auto diff = static_cast<long long>(P.points(k, i) - centers.points(k, j));
        acc += diff * diff;
      }
      if (acc > 0) ++hist[acc];
    }
  return {hist.begin(), hist.end()};
}

}  // namespace welldist
