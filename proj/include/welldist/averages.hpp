#pragma once

#include "welldist/geometry.hpp"
#include "welldist/kernels.hpp"
#include "welldist/measures.hpp"

#include <string>
#include <vector>

namespace welldist {

enum class Evaluator { automatic, direct, poisson };

struct QuadratureOptions {
  double oversample = 4.0;
  /// Accept when one doubling changes sigma by at most this relative amount.
  double tol = 1e-6;
  long long m_max = 1LL << 25;
  /// automatic uses the Poisson evaluator whenever the measure allows it.
  Evaluator evaluator = Evaluator::automatic;
};

struct SurfaceAverage {
  double t = 0.0;
  double sigma = 0.0;
  long long M = 0;         // nodes of the accepted rule
  double residual = 0.0;   // relative change over the last doubling
  bool converged = false;  // false when M_max stopped the doubling
};

/// Starting node count: max(64, ceil(8 t diam oversample)) scaled by
/// |dK| / 2 pi in the plane, oversample (2 t diam)^2 on surfaces.
long long initial_nodes(const ThickenedMeasure& m, const ConvexBody& K, double t, double oversample);

/// sigma(t) = int_{dK} |mu_hat(t w)|^2 dw_K, unnormalized surface measure.
/// Planar rules are nested: each doubling evaluates only the new nodes.
SurfaceAverage surface_average(const ThickenedMeasure& m, const ConvexBody& K, double t,
                               const QuadratureOptions& opts = {});

/// t_min 2^{k / per_octave} for k = 0, 1, ... up to t_max.
std::vector<double> dyadic_grid(double t_min, double t_max, int per_octave);

struct AverageSeries {
  std::string body;     // ConvexBody::name() of the integration surface
  int dim = 2;
  std::string measure;  // measure descriptor JSON, empty for synthetic data
  double tol = 0.0;
  std::vector<SurfaceAverage> entries;

  std::vector<double> t() const;
  std::vector<double> sigma() const;
};

AverageSeries average_series(const ThickenedMeasure& m, const ConvexBody& K, double t_min, double t_max,
                             int per_octave, const QuadratureOptions& opts = {});

/// Series from given values (analytic test data, CSV round trips).
AverageSeries make_series(const std::string& body, int dim, const std::vector<double>& t,
                          const std::vector<double>& sigma);

struct ExponentFit {
  double beta = 0.0;       // minus the log-log slope
  double stderr_ = 0.0;    // standard error of the slope
  double intercept = 0.0;  // sigma ~ exp(intercept) t^{-beta}
  int points = 0;
};

/// Least squares of log sigma on log t over the entries with t in [t_lo, t_hi].
ExponentFit fit_exponent(const AverageSeries& series, double t_lo, double t_hi);

struct CapOptions {
  double c1 = 0.25;
  double C2 = 4.0;
  /// The c in eta(c C2 tau).
  double eta_scale = 1.0;
  DecayProfile eta{};
  double tau_step = 0.25;
  double eta_floor = 1e-6;
  /// Rotates the direction set (planar case), radians.
  double frame_angle = 0.0;
};

struct Cap {
  Vector direction;
  double contribution = 0.0;
};

struct CapDecomposition {
  double t = 0.0;
  double c1 = 0.0, C2 = 0.0;
  std::vector<Cap> caps;
  double sigma_half = 0.0;
};

/// Sigma_{d/2}(t) = sum_p t^{(d-1)/2} sum_j sup_tau |mu_hat_{p,j}(t - tau)|^2 eta(c C2 tau)
/// with c1/sqrt(t)-separated directions p and rectangles C2 (1 x t^{-1/2} x ...)
/// aligned with p. Atoms are treated as point masses carrying the cut-off.
CapDecomposition sigma_half_decomposition(const ThickenedMeasure& m, double t, const CapOptions& opts = {});

/// Points b of q Z^d with | |b| - t | <= width, by exact shell enumeration.
long long count_active_caps(double q, double t, int d, double width);

}  // namespace welldist
