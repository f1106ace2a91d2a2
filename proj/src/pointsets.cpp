#include "welldist/pointsets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace welldist {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

bool inside(const Eigen::Ref<const Vector>& x, const Truncation& tr) {
  if (tr.shape == Shape::ball) return x.squaredNorm() <= tr.radius * tr.radius;
  return x.cwiseAbs().maxCoeff() <= tr.radius;
}

struct CellHash {
  std::size_t operator()(const std::vector<long long>& v) const {
    std::uint64_t h = 0x1234567ull;
    for (long long c : v) h = splitmix64(h ^ static_cast<std::uint64_t>(c));
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

std::string to_string(SetKind kind) {
  switch (kind) {
    case SetKind::lattice: return "lattice";
    case SetKind::perturbed: return "perturbed-lattice";
    case SetKind::jittered: return "jittered";
    case SetKind::custom: return "custom";
  }
  return "custom";
}

std::string to_string(Shape shape) { return shape == Shape::ball ? "ball" : "cube"; }

SetKind parse_set_kind(const std::string& name) {
  if (name == "lattice") return SetKind::lattice;
  if (name == "perturbed-lattice" || name == "perturbed") return SetKind::perturbed;
  if (name == "jittered") return SetKind::jittered;
  throw DomainError("unknown set kind '" + name + "'");
}

Shape parse_shape(const std::string& name) {
  if (name == "ball") return Shape::ball;
  if (name == "cube") return Shape::cube;
  throw DomainError("unknown truncation shape '" + name + "'");
}

double cell_uniform(std::uint64_t seed, const Eigen::Ref<const Eigen::VectorXi>& cell, int stream) {
  std::uint64_t h = splitmix64(seed ^ 0x5eedull);
  for (Eigen::Index i = 0; i < cell.size(); ++i) {
    h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(cell(i))));
  }
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

PointSet generate(SetKind kind, int dim, double q, Shape shape, std::uint64_t seed,
                  double jitter) {
  if (dim < 1) throw DomainError("generate: dim must be >= 1");
  if (!(q >= 1.0)) throw DomainError("generate: q must be >= 1");
  if (kind == SetKind::custom) throw DomainError("generate: custom sets are built with make_custom");
  if (!(jitter >= 0.0 && jitter < 0.5)) {
    throw DomainError("generate: jitter must lie in [0, 1/2)");
  }
  const double reach = (kind == SetKind::lattice) ? 0.0 : 1.0;
  const long long lo = static_cast<long long>(std::floor(-q - reach));
  const long long hi = static_cast<long long>(std::ceil(q + reach));
  const double side = static_cast<double>(hi - lo + 1);
  if (std::pow(side, dim) > 5e8) {
    throw BudgetError("generate: enumeration of " + std::to_string(std::pow(side, dim)) +
                      " cells exceeds the budget of 5e8");
  }
  PointSet ps;
  ps.dim = dim;
  ps.provenance = {kind, kind == SetKind::lattice ? 0 : seed, kind == SetKind::perturbed ? jitter : 0.0};
  ps.truncation = {shape, q};
  std::vector<double> coords;
  Eigen::VectorXi cell = Eigen::VectorXi::Constant(dim, static_cast<int>(lo));
  Vector x(dim);
  while (true) {
    for (int i = 0; i < dim; ++i) {
      double v = cell(i);
      if (kind == SetKind::perturbed) v += jitter * (2.0 * cell_uniform(seed, cell, i) - 1.0);
      else if (kind == SetKind::jittered) v += cell_uniform(seed, cell, i);
      x(i) = v;
    }
    if (inside(x, ps.truncation)) coords.insert(coords.end(), x.data(), x.data() + dim);
    int k = dim - 1;
    while (k >= 0 && cell(k) == hi) {
      cell(k) = static_cast<int>(lo);
      --k;
    }
    if (k < 0) break;
    ++cell(k);
  }
  ps.points = Eigen::Map<PointMatrix>(coords.data(), dim, static_cast<Eigen::Index>(coords.size() / dim));
  return ps;
}

PointSet make_custom(PointMatrix points, Shape shape, std::optional<double> radius) {
  if (points.rows() < 1) throw DomainError("make_custom: points need at least one coordinate");
  PointSet ps;
  ps.dim = static_cast<int>(points.rows());
  ps.provenance = {SetKind::custom, 0, 0.0};
  double r = 0.0;
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    r = std::max(r, shape == Shape::ball ? points.col(j).norm() : points.col(j).cwiseAbs().maxCoeff());
  }
  ps.truncation = {shape, radius.value_or(r)};
  ps.points = std::move(points);
  return ps;
}

PointSet rescale_to_unit(const PointSet& ps) {
  if (ps.scaled) throw DomainError("rescale_to_unit: point set is already scaled");
  PointSet out = ps;
  out.points = ps.points / ps.truncation.radius;
  out.scaled = true;
  return out;
}

double min_separation(const PointMatrix& points) {
  const Eigen::Index n = points.cols();
  if (n < 2) return std::numeric_limits<double>::infinity();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return points(0, a) < points(0, b) || (points(0, a) == points(0, b) && a < b);
  });
  double best2 = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto a = points.col(order[i]);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto b = points.col(order[j]);
      const double dx = b(0) - a(0);
      if (dx * dx >= best2) break;
      best2 = std::min(best2, (b - a).squaredNorm());
    }
  }
  return std::sqrt(best2);
}

double default_covering(const Provenance& provenance) {
  switch (provenance.kind) {
    case SetKind::lattice: return 1.0;
    case SetKind::perturbed: return 1.0 + 2.0 * provenance.jitter;
    case SetKind::jittered: return 2.0;
    case SetKind::custom: break;
  }
  throw DomainError("verify_delone: custom sets need an explicit covering side");
}

DeloneReport verify_delone(const PointSet& ps, std::optional<double> covering) {
  if (ps.size() < 2) throw DomainError("verify_delone: need at least 2 points");
  if (ps.scaled) throw DomainError("verify_delone: expects an unscaled set");
  const int d = ps.dim;
  const double L = covering ? *covering : default_covering(ps.provenance);
  if (!(L > 0.0)) throw DomainError("verify_delone: covering side must be positive");

  DeloneReport rep;
  rep.constants.separation = min_separation(ps.points);
  rep.constants.covering = L;

  // Bucket points into cells of side L; a closed cube of side L meets at most
  // 2^d such cells.
  std::unordered_map<std::vector<long long>, std::vector<Eigen::Index>, CellHash> buckets;
  std::vector<long long> key(d);
  for (Eigen::Index j = 0; j < ps.points.cols(); ++j) {
    for (int i = 0; i < d; ++i) key[i] = static_cast<long long>(std::floor(ps.points(i, j) / L));
    buckets[key].push_back(j);
  }
  const double tol = 1e-12;
  const double margin = L * std::max(1.0, 0.5 * std::sqrt(static_cast<double>(d)));
  const double reach = ps.truncation.radius - margin;
  const double step = 0.5 * L;
  const long long m = reach >= 0.0 ? static_cast<long long>(std::floor(reach / step)) : -1;
  if (m < 0) {
    rep.ok = rep.constants.separation > 0.0;
    rep.message = "truncation region too small for any test cube";
    return rep;
  }
  Truncation inner{ps.truncation.shape, reach};
  std::vector<long long> idx(d, -m);
  Vector c(d);
  while (true) {
    for (int i = 0; i < d; ++i) c(i) = step * static_cast<double>(idx[i]);
    if (inside(c, inner)) {
      ++rep.cubes_checked;
      bool found = false;
      std::vector<long long> lo(d), hi(d), cur(d);
      for (int i = 0; i < d; ++i) {
        lo[i] = static_cast<long long>(std::floor((c(i) - 0.5 * L - tol) / L));
        hi[i] = static_cast<long long>(std::floor((c(i) + 0.5 * L + tol) / L));
        cur[i] = lo[i];
      }
      while (!found) {
        auto it = buckets.find(cur);
        if (it != buckets.end()) {
          for (Eigen::Index j : it->second) {
            if ((ps.points.col(j) - c).cwiseAbs().maxCoeff() <= 0.5 * L + tol) {
              found = true;
              break;
            }
          }
        }
        int k = d - 1;
        while (k >= 0 && cur[k] == hi[k]) {
          cur[k] = lo[k];
          --k;
        }
        if (k < 0) break;
        ++cur[k];
      }
      if (!found) {
        rep.ok = false;
        rep.empty_cube_center = c;
        std::string where;
        for (int i = 0; i < d; ++i) where += (i ? "," : "") + std::to_string(c(i));
        rep.message = "empty cube of side " + std::to_string(L) + " centered at (" + where + ")";
        return rep;
      }
    }
    int k = d - 1;
    while (k >= 0 && idx[k] == m) {
      idx[k] = -m;
      --k;
    }
    if (k < 0) break;
    ++idx[k];
  }
  rep.ok = rep.constants.separation > 0.0;
  rep.message = rep.ok ? "ok" : "coincident points";
  return rep;
}

}  // namespace welldist
