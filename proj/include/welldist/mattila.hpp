#pragma once

#include "welldist/averages.hpp"
#include "welldist/measures.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace welldist {

/// Push-forward of mu x mu under (x, y) -> |x - y|, atoms only, diagonal
/// removed, ties merged at 1e-12 relative.
struct DistanceMeasure {
  std::vector<double> support;  // ascending
  std::vector<double> weights;  // sum to 1
};

DistanceMeasure empirical_distance_measure(const ThickenedMeasure& m);

/// nu_hat(t) = sum_k w_k sqrt(t r_k) J_{d/2-1}(t r_k), d in {2, 3}.
double hankel_transform(const DistanceMeasure& nu, double t, int d);

/// c(d, s) with I_s(mu) = c(d, s) int |mu_hat|^2 |xi|^{s-d} d xi.
double energy_constant(int d, double s);

/// int sigma(t) t^{s-1} dt over the series range, trapezoid in log t.
double energy_spectral(const AverageSeries& series, double s);

struct MattilaValue {
  double value = 0.0;
  /// The last octave added at least 0.9 times what the one before it added.
  bool divergent_trend = false;
};

/// int sigma^2(t) t^{d-1} dt over the series range, trapezoid in log t.
MattilaValue mattila_integral(const AverageSeries& series, int d);
/// K-distance form: the series must live on the boundary of K*.
MattilaValue mattila_integral(const AverageSeries& series, int d, const ConvexBody& distance_body);

struct SingleDistance {
  double j0_integral = 0.0;
  double oscillatory = 0.0;  // modulus
  int j0_nodes = 0;
  int oscillatory_nodes = 0;
};

/// sigma on demand; when empty, the series is interpolated linearly in log t.
using SigmaFunction = std::function<double(double)>;

/// j0 = int t J_0(tau t) sigma(t) dt over the series range and
/// |int_{lo}^{hi} sqrt(t) e^{-2 pi i tau t} sigma(t) dt|, both on linear
/// sub-grids of step <= 1/(8 tau) with piecewise-quadratic amplitudes.
/// `step_scale` < 1 refines the grid further (half-step oracles).
SingleDistance single_distance_integrals(const AverageSeries& series, double tau, double lo, double hi,
                                         const SigmaFunction& sigma_at = {}, double step_scale = 1.0);

/// Linear interpolation of sigma in log t between series entries.
double interpolate_sigma(const AverageSeries& series, double t);

struct FalconerCheck {
  double d_minus_beta = 0.0;
  bool implies = false;  // d - beta < s
};

FalconerCheck falconer_check(int d, double beta, double s);

/// Pearson correlation of log|a| against log|b|; zero entries are rejected.
double log_correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace welldist
