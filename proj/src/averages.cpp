#include "welldist/averages.hpp"

#include "welldist/special.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <array>
#include <unordered_map>

namespace welldist {

namespace {

constexpr std::size_t kChunk = 16384;

bool use_poisson(const ThickenedMeasure& m, Evaluator e) {
  if (e == Evaluator::poisson) {
    if (!m.poisson_eligible()) throw DomainError("surface_average: the Poisson evaluator needs a modified lattice measure");
    return true;
  }
  return e == Evaluator::automatic && m.poisson_eligible();
}

// |mu_hat|^2 at the columns of xis, in column order.
std::vector<double> squared_modulus(const ThickenedMeasure& m, const PointMatrix& xis, bool poisson) {
  std::vector<double> out(static_cast<std::size_t>(xis.cols()));
  if (poisson) {
    parallel_for(out.size(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t j = lo; j < hi; ++j) out[j] = std::norm(fourier_poisson(m, xis.col(static_cast<Eigen::Index>(j))));
    });
  } else {
    const Eigen::VectorXcd v = fourier_batch(m, xis);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::norm(v(static_cast<Eigen::Index>(j)));
  }
  return out;
}

// Sum over planar nodes u_k = (first + k * step) / M, k < count, of
// |mu_hat(t gamma(u))|^2 |gamma'(u)|, chunked so the result is independent of
// the thread count.
double planar_level(const ThickenedMeasure& m, const ConvexBody& K, double t, long long M, long long first,
                    long long step, long long count, bool poisson) {
  std::vector<double> chunk_sums;
  PointMatrix xis;
  std::vector<double> speed;
  for (long long begin = 0; begin < count; begin += static_cast<long long>(kChunk)) {
    const long long n = std::min<long long>(static_cast<long long>(kChunk), count - begin);
    xis.resize(2, n);
    speed.resize(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t j = lo; j < hi; ++j) {
        const double u = static_cast<double>(first + (begin + static_cast<long long>(j)) * step) / static_cast<double>(M);
        xis.col(static_cast<Eigen::Index>(j)) = t * K.boundary_at(u);
        speed[j] = K.boundary_speed(u);
      }
    });
    std::vector<double> f = squared_modulus(m, xis, poisson);
    for (std::size_t j = 0; j < f.size(); ++j) f[j] *= speed[j];
    chunk_sums.push_back(pairwise_sum(f));
  }
  return pairwise_sum(chunk_sums);
}

double surface_rule(const ThickenedMeasure& m, const ConvexBody& K, double t, long long M, bool poisson) {
  const BoundarySample S = K.boundary_sample(static_cast<int>(M));
  std::vector<double> chunk_sums;
  for (long long begin = 0; begin < M; begin += static_cast<long long>(kChunk)) {
    const long long n = std::min<long long>(static_cast<long long>(kChunk), M - begin);
    const PointMatrix xis = t * S.points.middleCols(begin, n);
    std::vector<double> f = squared_modulus(m, xis, poisson);
    for (long long j = 0; j < n; ++j) f[static_cast<std::size_t>(j)] *= S.weights[static_cast<std::size_t>(begin + j)];
    chunk_sums.push_back(pairwise_sum(f));
  }
  return pairwise_sum(chunk_sums);
}

double relative_change(double a, double b) {
  const double scale = std::max(std::fabs(a), std::fabs(b));
  return scale == 0.0 ? 0.0 : std::fabs(a - b) / scale;
}

}  // namespace

long long initial_nodes(const ThickenedMeasure& m, const ConvexBody& K, double t, double oversample) {
  double rmax = 0.0;
  for (Eigen::Index a = 0; a < m.atoms.cols(); ++a) rmax = std::max(rmax, m.atoms.col(a).norm());
  const double diam = 2.0 * (rmax + m.epsilon());
  double M0;
  if (K.dim() == 2) {
    M0 = std::ceil(8.0 * t * diam * oversample * K.surface_measure() / (2.0 * kPi));
  } else {
    M0 = std::ceil(oversample * std::pow(2.0 * t * diam, 2.0) * K.surface_measure() / (4.0 * kPi));
  }
  M0 = std::max(64.0, M0);
  if (M0 > 9e15) return static_cast<long long>(9e15);
  long long M = static_cast<long long>(M0);
  return (M + 7) / 8 * 8;
}

SurfaceAverage surface_average(const ThickenedMeasure& m, const ConvexBody& K, double t,
                               const QuadratureOptions& opts) {
  if (!(t >= 0.0)) throw DomainError("surface_average: t must be nonnegative");
  if (!(opts.tol > 0.0)) throw DomainError("surface_average: tol must be positive");
  if (!(opts.oversample > 0.0)) throw DomainError("surface_average: oversample must be positive");
  if (K.dim() != m.dim()) throw DomainError("surface_average: body and measure dimensions differ");
  const bool poisson = use_poisson(m, opts.evaluator);
  long long M = initial_nodes(m, K, t, opts.oversample);
  if (M > opts.m_max) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "surface_average: t = %g needs %lld nodes, above M_max = %lld", t, M, opts.m_max);
    throw BudgetError(buf);
  }
  SurfaceAverage out;
  out.t = t;
  if (K.dim() == 2) {
    // Centrally symmetric bodies: u and u + 1/2 are antipodal, and |mu_hat| is
    // even for a real measure, so half of each level suffices.
    const bool half = K.centrally_symmetric();
    const double factor = half ? 2.0 : 1.0;
    double total = factor * planar_level(m, K, t, M, 0, 1, half ? M / 2 : M, poisson);
    double sigma = total / static_cast<double>(M);
    while (true) {
      if (2 * M > opts.m_max) {
        out.sigma = sigma;
        out.M = M;
        out.converged = false;
        if (out.residual == 0.0 && M == initial_nodes(m, K, t, opts.oversample)) out.residual = 1.0;
        return out;
      }
      const long long M2 = 2 * M;
      total += factor * planar_level(m, K, t, M2, 1, 2, half ? M / 2 : M, poisson);
      const double next = total / static_cast<double>(M2);
      out.residual = relative_change(sigma, next);
      sigma = next;
      M = M2;
      if (out.residual <= opts.tol) {
        out.sigma = sigma;
        out.M = M;
        out.converged = true;
        return out;
      }
    }
  }
  double sigma = surface_rule(m, K, t, M, poisson);
  out.residual = 1.0;
  while (2 * M <= opts.m_max) {
    const double next = surface_rule(m, K, t, 2 * M, poisson);
    out.residual = relative_change(sigma, next);
    sigma = next;
    M *= 2;
    if (out.residual <= opts.tol) {
      out.converged = true;
      break;
    }
  }
  out.sigma = sigma;
  out.M = M;
  return out;
}

std::vector<double> dyadic_grid(double t_min, double t_max, int per_octave) {
  if (!(t_min > 0.0 && t_max >= t_min)) throw DomainError("dyadic_grid: need 0 < t_min <= t_max");
  if (per_octave < 1) throw DomainError("dyadic_grid: per_octave must be >= 1");
  std::vector<double> grid;
  for (int k = 0;; ++k) {
    const double t = t_min * std::exp2(static_cast<double>(k) / per_octave);
    if (t > t_max * (1.0 + 1e-12)) break;
    grid.push_back(t);
  }
  return grid;
}

std::vector<double> AverageSeries::t() const {
  std::vector<double> v;
  for (const auto& e : entries) v.push_back(e.t);
  return v;
}

std::vector<double> AverageSeries::sigma() const {
  std::vector<double> v;
  for (const auto& e : entries) v.push_back(e.sigma);
  return v;
}

AverageSeries average_series(const ThickenedMeasure& m, const ConvexBody& K, double t_min, double t_max,
                             int per_octave, const QuadratureOptions& opts) {
  if (!(t_min >= 1.0 && t_max > t_min)) throw DomainError("average_series: need 1 <= t_min < t_max");
  AverageSeries series;
  series.body = K.name();
  series.dim = K.dim();
  series.measure = measure_descriptor(m);
  series.tol = opts.tol;
  for (double t : dyadic_grid(t_min, t_max, per_octave)) series.entries.push_back(surface_average(m, K, t, opts));
  return series;
}

AverageSeries make_series(const std::string& body, int dim, const std::vector<double>& t,
                          const std::vector<double>& sigma) {
  if (t.size() != sigma.size()) throw DomainError("make_series: t and sigma lengths differ");
  AverageSeries series;
  series.body = body;
  series.dim = dim;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i > 0 && !(t[i] > t[i - 1])) throw DomainError("make_series: t must be ascending");
    SurfaceAverage e;
    e.t = t[i];
    e.sigma = sigma[i];
    e.converged = true;
    series.entries.push_back(e);
  }
  return series;
}

ExponentFit fit_exponent(const AverageSeries& series, double t_lo, double t_hi) {
  std::vector<double> x, y;
  for (const auto& e : series.entries) {
    if (e.t < t_lo * (1.0 - 1e-12) || e.t > t_hi * (1.0 + 1e-12)) continue;
    if (!(e.sigma > 0.0)) throw DomainError("fit_exponent: sigma must be positive in the fit range");
    x.push_back(std::log(e.t));
    y.push_back(std::log(e.sigma));
  }
  const int n = static_cast<int>(x.size());
  if (n < 4) throw DomainError("fit_exponent: need at least 4 grid points in range");
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ssr = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = y[i] - intercept - slope * x[i];
    ssr += r * r;
  }
  ExponentFit fit;
  fit.beta = -slope;
  fit.intercept = intercept;
  fit.points = n;
  fit.stderr_ = n > 2 ? std::sqrt(ssr / (n - 2) / sxx) : 0.0;
  return fit;
}

namespace {

std::vector<Vector> cap_directions(int d, double t, const CapOptions& opts) {
  const double sep = opts.c1 / std::sqrt(t);
  std::vector<Vector> dirs;
  if (d == 2) {
    // Equally spaced angles are a maximal separated set on the circle.
    const long long n = static_cast<long long>(std::floor(2.0 * kPi / sep));
    for (long long k = 0; k < n; ++k) {
      const double a = opts.frame_angle + 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
      Vector p(2);
      p << std::cos(a), std::sin(a);
      dirs.push_back(p);
    }
    return dirs;
  }
  // Greedy over a Fibonacci grid about 40 times finer than the cap count,
  // with a hash grid of cell size sep for the neighbour test.
  const double expected = 4.0 * kPi / (sep * sep);
  const long long grid = static_cast<long long>(std::ceil(40.0 * expected));
  if (grid > 50000000LL) throw BudgetError("sigma_half_decomposition: direction grid too large");
  struct KeyHash {
    std::size_t operator()(const std::array<long long, 3>& k) const {
      return std::hash<long long>()(k[0] * 73856093LL ^ k[1] * 19349663LL ^ k[2] * 83492791LL);
    }
  };
  std::unordered_map<std::array<long long, 3>, std::vector<std::size_t>, KeyHash> buckets;
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (long long k = 0; k < grid; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / static_cast<double>(grid);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    Vector w(3);
    w << r * std::cos(golden * k), r * std::sin(golden * k), z;
    std::array<long long, 3> key;
    for (int i = 0; i < 3; ++i) key[i] = static_cast<long long>(std::floor(w(i) / sep));
    bool ok = true;
    for (long long a = -1; a <= 1 && ok; ++a)
      for (long long b = -1; b <= 1 && ok; ++b)
        for (long long c = -1; c <= 1 && ok; ++c) {
          auto it = buckets.find({key[0] + a, key[1] + b, key[2] + c});
          if (it == buckets.end()) continue;
          for (std::size_t idx : it->second)
            if ((dirs[idx] - w).norm() < sep) {
              ok = false;
              break;
            }
        }
    if (ok) {
      buckets[key].push_back(dirs.size());
      dirs.push_back(w);
    }
  }
  return dirs;
}

}  // namespace

CapDecomposition sigma_half_decomposition(const ThickenedMeasure& m, double t, const CapOptions& opts) {
  const int d = m.dim();
  if (d != 2 && d != 3) throw DomainError("sigma_half_decomposition: d must be 2 or 3");
  if (std::fabs(m.p - 2.0) > 1e-12) throw DomainError("sigma_half_decomposition: needs s = d/2 (p = 2)");
  if (!(t > 0.0 && t <= 4.0 * m.q * m.q)) throw DomainError("sigma_half_decomposition: need 0 < t <= 4 q^2");
  if (!(opts.c1 > 0.0 && opts.C2 > 0.0 && opts.tau_step > 0.0))
    throw DomainError("sigma_half_decomposition: c1, C2 and the tau step must be positive");
  CapDecomposition out;
  out.t = t;
  out.c1 = opts.c1;
  out.C2 = opts.C2;
  // tau grid k * step, truncated where eta(c C2 tau) drops below the floor.
  std::vector<double> taus, etas;
  for (long long k = 0;; ++k) {
    const double tau = static_cast<double>(k) * opts.tau_step;
    const double e = eta(opts.eta, opts.eta_scale * opts.C2 * tau);
    if (e < opts.eta_floor) break;
    taus.push_back(tau);
    etas.push_back(e);
    if (k > 0) {
      taus.push_back(-tau);
      etas.push_back(e);
    }
  }
  std::vector<double> cut(taus.size());
  for (std::size_t i = 0; i < taus.size(); ++i) cut[i] = m.cutoff(std::fabs(t - taus[i]));
  const std::vector<Vector> dirs = cap_directions(d, t, opts);
  const double width = opts.C2 / std::sqrt(t);
  // Tiles start at a fixed irrational offset so lattice atoms never sit on
  // a tile edge.
  const double offset = 0.3819660112501051;
  const std::size_t n = m.size();
  out.caps.resize(dirs.size());
  parallel_for(dirs.size(), [&](std::size_t lo, std::size_t hi) {
    std::vector<double> proj(n);
    for (std::size_t c = lo; c < hi; ++c) {
      const Vector& p = dirs[c];
      std::vector<Vector> frame;
      if (d == 2) {
        Vector e(2);
        e << -p(1), p(0);
        frame.push_back(e);
      } else {
        Vector ref = Vector::Zero(3);
        ref(std::fabs(p(0)) < 0.9 ? 0 : 1) = 1.0;
        Vector e1 = ref - ref.dot(p) * p;
        e1.normalize();
        Vector e2(3);
        e2 << p(1) * e1(2) - p(2) * e1(1), p(2) * e1(0) - p(0) * e1(2), p(0) * e1(1) - p(1) * e1(0);
        frame.push_back(e1);
        frame.push_back(e2);
      }
      std::map<std::vector<long long>, std::vector<std::size_t>> tiles;
      for (std::size_t a = 0; a < n; ++a) {
        const auto x = m.atoms.col(static_cast<Eigen::Index>(a));
        proj[a] = x.dot(p);
        std::vector<long long> key{static_cast<long long>(std::floor(proj[a] / opts.C2 + offset))};
        for (const Vector& e : frame) key.push_back(static_cast<long long>(std::floor(x.dot(e) / width + offset)));
        tiles[key].push_back(a);
      }
      std::vector<double> terms;
      std::vector<double> re, im;
      for (const auto& [key, members] : tiles) {
        double best = 0.0;
        for (std::size_t i = 0; i < taus.size(); ++i) {
          re.clear();
          im.clear();
          for (std::size_t a : members) {
            double s, co;
            special::sincos_turns(proj[a] * (t - taus[i]), s, co);
            re.push_back(m.masses[a] * co);
            im.push_back(-(m.masses[a] * s));
          }
          const double mod2 = std::norm(Complex(pairwise_sum(re), pairwise_sum(im))) * cut[i] * cut[i];
          best = std::max(best, mod2 * etas[i]);
        }
        terms.push_back(best);
      }
      out.caps[c].direction = p;
      out.caps[c].contribution = std::pow(t, 0.5 * (d - 1)) * pairwise_sum(terms);
    }
  });
  std::vector<double> contributions;
  for (const auto& cap : out.caps) contributions.push_back(cap.contribution);
  out.sigma_half = pairwise_sum(contributions);
  return out;
}

long long count_active_caps(double q, double t, int d, double width) {
  if (!(q > 0.0 && t > 0.0 && width >= 0.0)) throw DomainError("count_active_caps: need q, t > 0 and width >= 0");
  if (d != 2 && d != 3) throw DomainError("count_active_caps: d must be 2 or 3");
  // b = q m with |m|^2 = n; admissible n satisfy |q sqrt(n) - t| <= width.
  const double lo = std::max(0.0, (t - width) / q), hi = (t + width) / q;
  const long long nlo = std::max(0LL, static_cast<long long>(std::floor(lo * lo)) - 1);
  const long long nhi = static_cast<long long>(std::ceil(hi * hi)) + 1;
  const long long R = static_cast<long long>(std::ceil(std::sqrt(static_cast<double>(nhi)))) + 1;
  const double work = std::pow(2.0 * R + 1.0, d - 1);
  if (work > 1e9) throw BudgetError("count_active_caps: shell enumeration above 1e9 candidates");
  auto admissible = [&](long long n) {
    const long double r = static_cast<long double>(q) * std::sqrt(static_cast<long double>(n));
    return std::fabs(r - static_cast<long double>(t)) <= static_cast<long double>(width) + 1e-12L * t;
  };
  auto is_square = [](long long v, long long& r) {
    if (v < 0) return false;
    r = static_cast<long long>(std::llround(std::sqrt(static_cast<double>(v))));
    while (r * r > v) --r;
    while ((r + 1) * (r + 1) <= v) ++r;
    return r * r == v;
  };
  long long count = 0;
  if (d == 2) {
    for (long long a = -R; a <= R; ++a)
      for (long long n = std::max(nlo, a * a); n <= nhi; ++n) {
        long long r;
        if (!admissible(n) || !is_square(n - a * a, r)) continue;
        count += r == 0 ? 1 : 2;
      }
    return count;
  }
  for (long long a = -R; a <= R; ++a)
    for (long long b = -R; b <= R; ++b)
      for (long long n = std::max(nlo, a * a + b * b); n <= nhi; ++n) {
        long long r;
        if (!admissible(n) || !is_square(n - a * a - b * b, r)) continue;
        count += r == 0 ? 1 : 2;
      }
  return count;
}

}  // namespace welldist
