#include "welldist/kernels.hpp"

#include "welldist/special.hpp"

#include <algorithm>
#include <cmath>

namespace welldist {

void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  if (n < 1) throw DomainError("gauss_legendre: n must be positive");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    long double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    long double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      long double p0 = 1, p1 = 0;
      for (int j = 1; j <= n; ++j) {
        const long double p2 = p1;
        p1 = p0;
        p0 = ((2.0L * j - 1.0L) * z * p1 - (j - 1.0L) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0L);
      const long double dz = p0 / dp;
      z -= dz;
      if (std::fabs(dz) < 1e-19L) break;
    }
    const double w = static_cast<double>(2.0L / ((1.0L - z * z) * dp * dp));
    nodes[i] = mid - half * static_cast<double>(z);
    nodes[n - 1 - i] = mid + half * static_cast<double>(z);
    weights[i] = weights[n - 1 - i] = half * w;
  }
}

double sphere_area(int k) {
  return 2.0 * std::pow(kPi, 0.5 * (k + 1)) / std::tgamma(0.5 * (k + 1));
}

double ball_volume(int d) { return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0); }

BumpProfile::BumpProfile(int dim, double rho) : dim_(dim), rho_(rho) {
  if (dim < 1) throw DomainError("BumpProfile: dim must be >= 1");
  if (!(rho > 0.0 && rho <= 0.5)) throw DomainError("BumpProfile: rho must lie in (0, 1/2]");
  // int psi^2 = S_{d-1} rho^d * Gamma(d/2) Gamma(5) / (2 Gamma(d/2 + 5))
  const double half_d = 0.5 * dim;
  const double psi_sq = sphere_area(dim - 1) * std::pow(rho, dim) * 0.5 *
                        std::exp(std::lgamma(half_d) + std::lgamma(5.0) - std::lgamma(half_d + 5.0));
  amplitude_ = 1.0 / psi_sq;
  nu_ = half_d + 2.0;
  inv_gamma_ = 1.0L / std::tgamma(static_cast<long double>(nu_) + 1.0L);
  hat_prefactor_ = std::pow(rho, dim) * 2.0 * std::pow(kPi, nu_ - 2.0);
  const double psi0 = hat_prefactor_ * static_cast<double>(inv_gamma_);
  integral_ = amplitude_ * psi0 * psi0;
  gauss_legendre(48, 0.0, 1.0, outer_nodes_, outer_weights_);
  gauss_legendre(12, 0.0, 1.0, inner_nodes_, inner_weights_);
}

double BumpProfile::radial(double r) const {
  r = std::fabs(r);
  const double rho = rho_;
  if (r >= 2.0 * rho) return 0.0;
  const double inv_rho2 = 1.0 / (rho * rho);
  auto psi_sq_arg = [&](double s2) {
    const double v = 1.0 - s2 * inv_rho2;
    return v > 0.0 ? v * v : 0.0;
  };
  // Symmetric lens: twice the half with y1 >= r/2, where |y| <= rho binds.
  double total = 0.0;
  if (dim_ == 1) {
    const double lo = 0.5 * r;
    const double len = rho - lo;
    for (std::size_t i = 0; i < outer_nodes_.size(); ++i) {
      const double y = lo + len * outer_nodes_[i];
      total += outer_weights_[i] * psi_sq_arg(y * y) * psi_sq_arg((r - y) * (r - y));
    }
    total *= len;
  } else {
    const double alpha_max = std::acos(std::min(1.0, 0.5 * r / rho));
    const double s_inner = sphere_area(dim_ - 2);
    for (std::size_t i = 0; i < outer_nodes_.size(); ++i) {
      const double alpha = alpha_max * outer_nodes_[i];
      const double y1 = rho * std::cos(alpha);
      const double umax = rho * std::sin(alpha);
      const double dy1 = rho * std::sin(alpha) * alpha_max;  // |dy1/d(node)|
      double inner = 0.0;
      for (std::size_t j = 0; j < inner_nodes_.size(); ++j) {
        const double u = umax * inner_nodes_[j];
        const double u2 = u * u;
        inner += inner_weights_[j] * psi_sq_arg(y1 * y1 + u2) *
                 psi_sq_arg((r - y1) * (r - y1) + u2) * std::pow(u, dim_ - 2);
      }
      total += outer_weights_[i] * dy1 * inner * umax;
    }
    total *= s_inner;
  }
  return amplitude_ * 2.0 * total;
}

double BumpProfile::psi_hat_radial(double k) const {
  const double x = 2.0 * kPi * rho_ * std::fabs(k);
  double lambda;
  if (x <= 12.0) {
    lambda = special::bessel_j_scaled_series(nu_, x, inv_gamma_);
  } else {
    lambda = special::bessel_j_scaled(nu_, x);
  }
  return hat_prefactor_ * lambda;
}

double BumpProfile::hat_radial(double k) const {
  const double h = psi_hat_radial(k);
  return amplitude_ * h * h;
}

double BumpProfile::mass_within(double R) const {
  if (R <= 0.0) return 0.0;
  const double top = std::min(R, 2.0 * rho_);
  double acc = 0.0;
  const int pieces = 4;
  for (int p = 0; p < pieces; ++p) {
    const double a = top * p / pieces;
    const double b = top * (p + 1) / pieces;
    for (std::size_t i = 0; i < outer_nodes_.size(); ++i) {
      const double r = a + (b - a) * outer_nodes_[i];
      acc += outer_weights_[i] * (b - a) * radial(r) * std::pow(r, dim_ - 1);
    }
  }
  return std::min(integral_, sphere_area(dim_ - 1) * acc);
}

double bump_eval(const BumpProfile& profile, const Eigen::Ref<const Vector>& x) {
  if (x.size() != profile.dim()) throw DomainError("bump_eval: dimension mismatch");
  return profile.radial(x.norm());
}

double bump_hat(const BumpProfile& profile, const Eigen::Ref<const Vector>& xi) {
  if (xi.size() != profile.dim()) throw DomainError("bump_hat: dimension mismatch");
  return profile.hat_radial(xi.norm());
}

std::vector<std::pair<double, double>> phi_hat_table(const BumpProfile& profile, double r_max,
                                                     int n) {
  if (n < 2 || !(r_max > 0.0)) throw DomainError("phi_hat_table: need n >= 2 and r_max > 0");
  std::vector<std::pair<double, double>> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double r = r_max * i / (n - 1);
    out.emplace_back(r, profile.hat_radial(r));
  }
  return out;
}

double eta(const DecayProfile& profile, double tau) {
  if (profile.order < 2) throw DomainError("eta: order must be >= 2");
  return std::pow(1.0 + std::fabs(tau), -profile.order);
}

double bessel_j(double order, double x) {
  if (!(x >= 0.0)) throw DomainError("bessel_j: x must be nonnegative");
  if (order != 0.0 && order != 0.5 && order != 1.0 && order != -0.5) {
    throw DomainError("bessel_j: unsupported order");
  }
  return special::bessel_j(order, x, 12.0);
}

}  // namespace welldist
