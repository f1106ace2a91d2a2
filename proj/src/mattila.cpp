#include "welldist/mattila.hpp"

#include "welldist/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace welldist {

DistanceMeasure empirical_distance_measure(const ThickenedMeasure& m) {
  const std::size_t n = m.size();
  if (n < 2) throw DomainError("empirical_distance_measure: need at least 2 atoms");
  if (n > 100000) throw BudgetError("empirical_distance_measure: more than 1e5 atoms");
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(n * (n - 1) / 2);
  const int d = m.dim();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double r2 = 0.0;
      for (int k = 0; k < d; ++k) {
        const double diff = m.coords[k][j] - m.coords[k][i];
        r2 += diff * diff;
      }
      pairs.emplace_back(std::sqrt(r2), 2.0 * m.masses[i] * m.masses[j]);
    }
  std::sort(pairs.begin(), pairs.end());
  DistanceMeasure nu;
  for (const auto& [r, w] : pairs) {
    if (!nu.support.empty() && r - nu.support.back() <= 1e-12 * std::max(1.0, r)) {
      nu.weights.back() += w;
    } else {
      nu.support.push_back(r);
      nu.weights.push_back(w);
    }
  }
  const double total = pairwise_sum(nu.weights);
  if (!(total > 0.0)) throw DomainError("empirical_distance_measure: off-diagonal mass vanishes");
  for (double& w : nu.weights) w /= total;
  return nu;
}

double hankel_transform(const DistanceMeasure& nu, double t, int d) {
  if (d != 2 && d != 3) throw DomainError("hankel_transform: d must be 2 or 3");
  if (!(t >= 0.0)) throw DomainError("hankel_transform: t must be nonnegative");
  const double order = 0.5 * d - 1.0;
  std::vector<double> terms(nu.support.size());
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const double x = t * nu.support[k];
    terms[k] = nu.weights[k] * std::sqrt(x) * bessel_j(order, x);
  }
  return pairwise_sum(terms);
}

double energy_constant(int d, double s) {
  if (!(s > 0.0 && s < d)) throw DomainError("energy_constant: s must lie in (0, d)");
  return std::pow(kPi, s - 0.5 * d) * std::tgamma(0.5 * (d - s)) / std::tgamma(0.5 * s);
}

namespace {

void check_series(const AverageSeries& series, const char* who) {
  if (series.entries.size() < 2) {
    throw DomainError(std::string(who) + ": the series needs at least 2 entries");
  }
  for (std::size_t i = 1; i < series.entries.size(); ++i)
    if (!(series.entries[i].t > series.entries[i - 1].t && series.entries[i - 1].t > 0.0)) {
      throw DomainError(std::string(who) + ": t must be positive and increasing");
    }
}

// Trapezoid in u = log t of f(t) t; prefix[i] is the integral up to entry i.
std::vector<double> log_trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
  std::vector<double> prefix(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double du = std::log(t[i] / t[i - 1]);
    prefix[i] = prefix[i - 1] + 0.5 * du * (f[i - 1] * t[i - 1] + f[i] * t[i]);
  }
  return prefix;
}

}  // namespace

double energy_spectral(const AverageSeries& series, double s) {
  check_series(series, "energy_spectral");
  if (!(s > 0.0)) throw DomainError("energy_spectral: s must be positive");
  const auto t = series.t();
  auto f = series.sigma();
  for (std::size_t i = 0; i < t.size(); ++i) f[i] *= std::pow(t[i], s - 1.0);
  return log_trapezoid(t, f).back();
}

MattilaValue mattila_integral(const AverageSeries& series, int d) {
  check_series(series, "mattila_integral");
  if (d < 2) throw DomainError("mattila_integral: d must be at least 2");
  const auto t = series.t();
  auto f = series.sigma();
  for (std::size_t i = 0; i < t.size(); ++i) f[i] = f[i] * f[i] * std::pow(t[i], d - 1);
  const auto prefix = log_trapezoid(t, f);
  MattilaValue out;
  out.value = prefix.back();
  // Running integral at the octave marks t_max 2^{-k}.
  auto at = [&](double x) {
    const auto it = std::lower_bound(t.begin(), t.end(), x * (1.0 - 1e-12));
    if (it == t.end()) return prefix.back();
    const auto i = static_cast<std::size_t>(it - t.begin());
    if (i == 0) return 0.0;
    const double w = std::log(x / t[i - 1]) / std::log(t[i] / t[i - 1]);
    return prefix[i - 1] + std::clamp(w, 0.0, 1.0) * (prefix[i] - prefix[i - 1]);
  };
  const double tmax = t.back();
  if (tmax / 4.0 >= t.front() * (1.0 - 1e-12)) {
    const double last = prefix.back() - at(tmax / 2.0);
    const double before = at(tmax / 2.0) - at(tmax / 4.0);
    out.divergent_trend = last >= 0.9 * before && last > 0.0;
  }
  return out;
}

MattilaValue mattila_integral(const AverageSeries& series, int d, const ConvexBody& distance_body) {
  const std::string expected = distance_body.polar().name();
  if (series.body != expected) {
    throw DomainError("mattila_integral: the series was taken over " + series.body + ", expected " + expected);
  }
  return mattila_integral(series, d);
}

double interpolate_sigma(const AverageSeries& series, double t) {
  check_series(series, "interpolate_sigma");
  const auto& e = series.entries;
  if (t <= e.front().t) return e.front().sigma;
  if (t >= e.back().t) return e.back().sigma;
  const auto it = std::lower_bound(e.begin(), e.end(), t, [](const SurfaceAverage& a, double x) { return a.t < x; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = std::log(t / lo.t) / std::log(hi.t / lo.t);
  return lo.sigma + w * (hi.sigma - lo.sigma);
}

namespace {

struct Product {
  Complex value{0.0, 0.0};
  int nodes = 0;
};

// int_{breaks} amplitude(t) kernel(t) dt: each segment is cut into an even
// number of panels of width <= h_max; the amplitude is interpolated
// quadratically on panel pairs, the kernel evaluated at 16 Gauss points.
template <class Amplitude, class Kernel>
Product product_integral(const std::vector<double>& breaks, double h_max, Amplitude amplitude, Kernel kernel) {
  std::vector<double> gx, gw;
  gauss_legendre(16, -1.0, 1.0, gx, gw);
  Product out;
  std::vector<Complex> parts;
  for (std::size_t b = 1; b < breaks.size(); ++b) {
    const double a = breaks[b - 1], len = breaks[b] - a;
    if (!(len > 0.0)) continue;
    long long panels = static_cast<long long>(std::ceil(len / h_max - 1e-9));
    panels = std::max<long long>(2, panels + (panels & 1));
    const double h = len / static_cast<double>(panels);
    std::vector<double> f(static_cast<std::size_t>(panels) + 1);
    for (long long k = 0; k <= panels; ++k) f[k] = amplitude(k == panels ? breaks[b] : a + h * k);
    out.nodes += static_cast<int>(panels) + 1;
    for (long long k = 0; k + 2 <= panels; k += 2) {
      const double c = a + h * (k + 1);
      const double f0 = f[k], f1 = f[k + 1], f2 = f[k + 2];
      Complex acc{0.0, 0.0};
      for (std::size_t g = 0; g < gx.size(); ++g) {
        const double u = gx[g];  // local coordinate, panel pair = [-1, 1]
        const double fu = f1 + 0.5 * u * (f2 - f0) + 0.5 * u * u * (f2 - 2.0 * f1 + f0);
        acc += gw[g] * fu * kernel(c + u * h);
      }
      parts.push_back(acc * h);
    }
  }
  out.value = pairwise_sum(parts);
  return out;
}

std::vector<double> breakpoints(const AverageSeries& series, double lo, double hi, bool with_nodes) {
  std::vector<double> out{lo};
  if (with_nodes)
    for (const auto& e : series.entries)
      if (e.t > lo && e.t < hi) out.push_back(e.t);
  out.push_back(hi);
  return out;
}

}  // namespace

SingleDistance single_distance_integrals(const AverageSeries& series, double tau, double lo, double hi,
                                         const SigmaFunction& sigma_at, double step_scale) {
  check_series(series, "single_distance_integrals");
  if (series.dim != 2) throw DomainError("single_distance_integrals: needs a planar series");
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("single_distance_integrals: tau must lie in (0, 1)");
  if (!(step_scale > 0.0 && step_scale <= 1.0)) throw DomainError("single_distance_integrals: step_scale in (0, 1]");
  const double t0 = series.entries.front().t, t1 = series.entries.back().t;
  if (!(lo < hi && lo >= t0 * (1.0 - 1e-12) && hi <= t1 * (1.0 + 1e-12))) {
    throw DomainError("single_distance_integrals: [lo, hi] must lie inside the series range");
  }
  const double h_max = step_scale / (8.0 * tau);
  auto interp = [&](double t) { return interpolate_sigma(series, t); };

  SingleDistance out;
  const auto j0 = product_integral(
      breakpoints(series, t0, t1, true), h_max, [&](double t) { return t * interp(t); },
      [&](double t) { return Complex(bessel_j(0.0, tau * t), 0.0); });
  out.j0_integral = j0.value.real();
  out.j0_nodes = j0.nodes;

  const double omega = 2.0 * kPi * tau;
  const bool callback = static_cast<bool>(sigma_at);
  const auto osc = product_integral(
      breakpoints(series, lo, hi, !callback), h_max,
      [&](double t) { return std::sqrt(t) * (callback ? sigma_at(t) : interp(t)); },
      [&](double t) { return std::polar(1.0, -omega * t); });
  out.oscillatory = std::abs(osc.value);
  out.oscillatory_nodes = osc.nodes;
  return out;
}

FalconerCheck falconer_check(int d, double beta, double s) {
  FalconerCheck out;
  out.d_minus_beta = static_cast<double>(d) - beta;
  out.implies = out.d_minus_beta < s;
  return out;
}

double log_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 3) throw DomainError("log_correlation: need 3 or more paired values");
  std::vector<double> x(a.size()), y(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0 || b[i] == 0.0) throw DomainError("log_correlation: zero value");
    x[i] = std::log(std::fabs(a[i]));
    y[i] = std::log(std::fabs(b[i]));
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0 && syy > 0.0)) throw DomainError("log_correlation: constant input");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace welldist
