#pragma once

#include "welldist/core.hpp"
#include "welldist/kernels.hpp"
#include "welldist/pointsets.hpp"

#include <string>
#include <vector>

namespace welldist {

enum class Variant { standard, modified };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);

/// mu = sum_a w_a phi_eps(x - a), eps = q^{-p}, p = d/s, over the scaled
/// atoms a in q^{-1} A_q. Weights carry C_A, so mu_hat(0) = 1.
struct ThickenedMeasure {
  PointSet base;
  double q = 1.0;
  double s = 1.0;
  double p = 1.0;
  Variant variant = Variant::standard;
  BumpProfile bump{1};
  double c_a = 1.0;
  /// Retained atoms (d x n); modified measures drop atoms where phi(a) = 0.
  PointMatrix atoms;
  /// C_A * q^{-d} (standard) or C_A * q^{-d} * phi(a) (modified).
  std::vector<double> weights;
  /// weights * int phi: the mass of each thickened atom, summing to 1.
  std::vector<double> masses;
  /// Coordinate-major copy of `atoms` for the exponential-sum loops.
  std::vector<std::vector<double>> coords;

  int dim() const { return base.dim; }
  std::size_t size() const { return masses.size(); }
  /// Bump radius q^{-p}.
  double epsilon() const;
  /// phi_hat(eps k) / phi_hat(0).
  double cutoff(double k) const;
  /// True when the Poisson-summation evaluator applies (modified variant over
  /// the unperturbed lattice).
  bool poisson_eligible() const;
};

ThickenedMeasure build_measure(const PointSet& ps, double s, const BumpProfile& bump,
                               Variant variant = Variant::standard);
ThickenedMeasure build_measure(const PointSet& ps, double s, Variant variant = Variant::standard);

/// sum_a m_a e^{-2 pi i a.xi} without the cut-off factor. Atom index order,
/// pairwise reduction.
Complex exponential_sum(const ThickenedMeasure& m, const Eigen::Ref<const Vector>& xi);

/// mu_hat(xi).
Complex fourier_at(const ThickenedMeasure& m, const Eigen::Ref<const Vector>& xi);

/// mu_hat at every column of `xis`; element-for-element identical to
/// fourier_at, whatever the thread count.
Eigen::VectorXcd fourier_batch(const ThickenedMeasure& m, const PointMatrix& xis);

/// Dirichlet-kernel product for the cube-truncated lattice, standard variant.
Complex fourier_separable_oracle(const ThickenedMeasure& m, const Eigen::Ref<const Vector>& xi);

/// mu_hat via Poisson summation over the dual lattice q Z^d; requires
/// poisson_eligible(). Terms with |xi - q m| > radius are dropped.
Complex fourier_poisson(const ThickenedMeasure& m, const Eigen::Ref<const Vector>& xi,
                        double radius = 48.0);

/// I_s of phi / int phi: c(d,s) * |S^{d-1}| * int (phi_hat/phi_hat(0))^2 k^{s-1} dk.
double self_energy_constant(const BumpProfile& bump, double s);

/// Atomic double sum for I_s(mu), with each atom's self-interaction replaced
/// by m_a^2 * self_energy_constant * eps^{-s}.
double energy_direct(const ThickenedMeasure& m, double s);

/// mu(B(x, delta)), integrating the bump profile exactly over atoms cut by
/// the sphere.
double ball_mass(const ThickenedMeasure& m, const Eigen::Ref<const Vector>& x, double delta);

/// JSON descriptor (provenance, q, s, p, variant, C_A, bump parameters).
std::string measure_descriptor(const ThickenedMeasure& m);
/// Rebuilds a generated-set measure from its descriptor.
ThickenedMeasure measure_from_descriptor(const std::string& json);

}  // namespace welldist
