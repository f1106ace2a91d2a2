#pragma once

#include "welldist/core.hpp"

#include <utility>
#include <vector>

namespace welldist {

/// Radial bump phi = c * (psi * psi), psi(x) = (1 - |x/rho|^2)^2 on |x| <= rho.
/// Supported in the closed ball of radius 2*rho, phi(0) = 1, phi_hat >= 0.
class BumpProfile {
 public:
  explicit BumpProfile(int dim, double rho = 0.5);

  int dim() const { return dim_; }
  double rho() const { return rho_; }
  /// c = 1 / int psi^2.
  double amplitude() const { return amplitude_; }
  /// int phi = phi_hat(0).
  double integral() const { return integral_; }

  /// phi at distance r from the origin.
  double radial(double r) const;
  /// phi_hat at frequency radius k.
  double hat_radial(double k) const;
  /// psi_hat at frequency radius k (may be negative).
  double psi_hat_radial(double k) const;
  /// Mass of phi inside the ball of radius R (0 <= result <= integral()).
  double mass_within(double R) const;

 private:
  int dim_;
  double rho_;
  double amplitude_;
  double integral_;
  double nu_;               // d/2 + 2
  long double inv_gamma_;   // 1 / Gamma(nu + 1)
  double hat_prefactor_;    // rho^d * 2 * pi^(nu - 2)
  std::vector<double> outer_nodes_, outer_weights_;
  std::vector<double> inner_nodes_, inner_weights_;
};

double bump_eval(const BumpProfile& profile, const Eigen::Ref<const Vector>& x);
double bump_hat(const BumpProfile& profile, const Eigen::Ref<const Vector>& xi);

/// (r, phi_hat(r)) on n equally spaced radii in [0, r_max].
std::vector<std::pair<double, double>> phi_hat_table(const BumpProfile& profile, double r_max,
                                                     int n);

struct DecayProfile {
  int order = 8;
};

/// (1 + |tau|)^-n.
double eta(const DecayProfile& profile, double tau);

/// J_nu(x) for nu in {-1/2, 0, 1/2, 1}; series up to x = 12, Hankel
/// asymptotics beyond.
double bessel_j(double order, double x);

/// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights);

/// Surface area of the unit sphere S^{k} in R^{k+1}.
double sphere_area(int k);
/// Volume of the unit ball in R^d.
double ball_volume(int d);

}  // namespace welldist
