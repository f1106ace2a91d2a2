#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "welldist/kernels.hpp"
#include "welldist/special.hpp"

#include <cmath>
#include <random>

using namespace welldist;

namespace {

// Plain trapezoid over the grid [-1,1]^2 of phi(x) cos(2 pi x.xi); phi is
// supported in the unit ball and vanishes to high order at its edge.
struct GridOracle2D {
  int n;
  double h;
  std::vector<double> xs;
  std::vector<double> vals;

  GridOracle2D(const BumpProfile& b, int n_, double scale = 1.0) : n(n_) {
    h = 2.0 / scale / n;
    for (int i = 0; i <= n; ++i) xs.push_back(-1.0 / scale + i * h);
    vals.resize((n + 1) * (n + 1));
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j)
        vals[i * (n + 1) + j] = b.radial(std::hypot(xs[i], xs[j]) * scale);
  }

  double transform(double xi0, double xi1, double amp = 1.0) const {
    // Separable phases keep this O(n^2) per frequency.
    std::vector<std::complex<double>> e0(n + 1), e1(n + 1);
    for (int i = 0; i <= n; ++i) {
      e0[i] = std::polar(1.0, -2.0 * kPi * xs[i] * xi0);
      e1[i] = std::polar(1.0, -2.0 * kPi * xs[i] * xi1);
    }
    std::complex<double> acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      std::complex<double> row = 0.0;
      for (int j = 0; j <= n; ++j) row += vals[i * (n + 1) + j] * e1[j];
      acc += row * e0[i];
    }
    return amp * acc.real() * h * h;
  }
};

double bisect_j0_zero() {
  double lo = 2.0, hi = 3.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (special::bessel_j_scaled_series(0.0, mid) > 0.0) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("bump calibration and support") {
  for (int d : {1, 2, 3}) {
    BumpProfile b(d);
    Vector zero = Vector::Zero(d);
    CHECK(bump_eval(b, zero) == doctest::Approx(1.0).epsilon(1e-13));
    Vector out = Vector::Zero(d);
    out(0) = 1.5;
    CHECK(bump_eval(b, out) == 0.0);
    out(0) = 1.0;
    CHECK(bump_eval(b, out) == 0.0);
    out(0) = 0.3;
    CHECK(bump_eval(b, out) > 0.0);
    out(0) = 0.999;
    CHECK(bump_eval(b, out) > 0.0);
    // The two normalizations cannot both hold; phi(0) = 1 wins.
    CHECK(b.integral() < 1.0);
  }
}

TEST_CASE("bump profile is radially decreasing") {
  BumpProfile b(2);
  double prev = b.radial(0.0);
  for (int i = 1; i <= 200; ++i) {
    const double v = b.radial(i / 200.0);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
}

TEST_CASE("integral of phi matches phi_hat(0)") {
  for (int d : {1, 2, 3}) {
    BumpProfile b(d);
    CHECK(b.mass_within(1.0) == doctest::Approx(b.integral()).epsilon(1e-11));
    CHECK(b.hat_radial(0.0) == doctest::Approx(b.integral()).epsilon(1e-14));
  }
}

TEST_CASE("psi_hat at the origin in one dimension is 16/15 rho") {
  BumpProfile b(1, 0.5);
  CHECK(b.psi_hat_radial(0.0) == doctest::Approx(16.0 / 15.0 * 0.5).epsilon(1e-14));
}

TEST_CASE("phi_hat matches a dense grid quadrature") {
  BumpProfile b(2);
  GridOracle2D oracle(b, 400);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi), rad(0.0, 1.8);
  for (int k = 0; k < 20; ++k) {
    const double r = rad(rng), a = ang(rng);
    Vector xi(2);
    xi << r * std::cos(a), r * std::sin(a);
    const double ref = oracle.transform(xi(0), xi(1));
    CHECK(std::fabs(bump_hat(b, xi) - ref) <= 1e-6 * std::fabs(ref));
  }
}

TEST_CASE("phi_hat matches a radial quadrature in one and three dimensions") {
  // d=1: 2 int_0^1 phi(r) cos(2 pi k r) dr; d=3: 4 pi int phi(r) r sin(2 pi k r)/(2 pi k) dr.
  std::vector<double> x, w;
  gauss_legendre(200, 0.0, 1.0, x, w);
  for (int d : {1, 3}) {
    BumpProfile b(d);
    for (double k : {0.1, 0.7, 1.3, 1.6}) {
      double acc = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = x[i];
        if (d == 1) acc += w[i] * 2.0 * b.radial(r) * std::cos(2 * kPi * k * r);
        else acc += w[i] * 4.0 * kPi * b.radial(r) * r * std::sin(2 * kPi * k * r) / (2 * kPi * k);
      }
      CHECK(b.hat_radial(k) == doctest::Approx(acc).epsilon(1e-9));
    }
  }
}

TEST_CASE("phi_hat is non-negative on random samples") {
  std::mt19937_64 rng(11);
  for (int d : {1, 2, 3}) {
    BumpProfile b(d);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 35000; ++i) {
      Vector xi(d);
      for (int j = 0; j < d; ++j) xi(j) = u(rng);
      xi *= 1000.0 * std::pow(std::fabs(u(rng)), 2.0) / std::max(1.0, xi.norm());
      CHECK_GE(bump_hat(b, xi), -1e-9);
    }
  }
}

TEST_CASE("dilated bump transforms to the contracted phi_hat") {
  // phi_eps(x) = eps^{-d} phi(x / eps) has transform phi_hat(eps xi).
  BumpProfile b(2);
  const double eps = 0.25;  // q^{-p} with q = 2, p = 2
  GridOracle2D oracle(b, 400, 1.0 / eps);
  const double amp = std::pow(eps, -2.0);
  for (int k = 0; k < 10; ++k) {
    const double xi0 = 0.6 * k, xi1 = 0.35 * k - 1.0;
    const double ref = oracle.transform(xi0, xi1, amp);
    CHECK(b.hat_radial(eps * std::hypot(xi0, xi1)) == doctest::Approx(ref).epsilon(1e-6));
  }
}

TEST_CASE("eta") {
  DecayProfile p;
  CHECK(eta(p, 0.0) == 1.0);
  CHECK(eta(p, 1.0) == doctest::Approx(0.00390625).epsilon(1e-15));
  CHECK(eta(p, -3.0) == eta(p, 3.0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  double prev = 1.0;
  for (int i = 0; i < 100; ++i) {
    const double t = u(rng);
    CHECK(eta(p, t) * std::pow(1.0 + std::fabs(t), 8) == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (int i = 1; i < 100; ++i) {
    CHECK(eta(p, 0.5 * i) < prev);
    prev = eta(p, 0.5 * i);
  }
  CHECK_THROWS_AS(eta(DecayProfile{1}, 0.0), DomainError);
}

TEST_CASE("bessel values") {
  CHECK(bessel_j(0.0, 0.0) == 1.0);
  CHECK(bessel_j(1.0, 0.0) == 0.0);
  CHECK(std::fabs(bessel_j(0.5, kPi)) < 1e-15);
  const double z = bisect_j0_zero();
  CHECK(z == doctest::Approx(2.404825557695773).epsilon(1e-14));
  CHECK(std::fabs(bessel_j(0.0, 2.404825557695773)) < 1e-10);
  CHECK_THROWS_AS(bessel_j(2.0, 1.0), DomainError);
  CHECK_THROWS_AS(bessel_j(0.0, -1.0), DomainError);
}

TEST_CASE("half-integer orders match their closed forms on both branches") {
  for (double x = 0.05; x < 60.0; x += 0.37) {
    const double s = std::sqrt(2.0 / (kPi * x));
    CHECK(bessel_j(0.5, x) == doctest::Approx(s * std::sin(x)).epsilon(1e-12).scale(s));
    CHECK(bessel_j(-0.5, x) == doctest::Approx(s * std::cos(x)).epsilon(1e-12).scale(s));
  }
}

TEST_CASE("integer orders agree across the series/asymptotic switch") {
  for (double nu : {0.0, 1.0}) {
    for (double x : {12.0, 14.0, 17.0, 20.0}) {
      const double series = std::pow(x / 2, nu) * special::bessel_j_scaled_series(nu, x);
      const double asym = special::bessel_j_asymptotic(nu, x);
      CHECK(asym == doctest::Approx(series).epsilon(1e-10).scale(0.2));
    }
  }
  // Reference values from tables.
  CHECK(bessel_j(0.0, 1.0) == doctest::Approx(0.7651976865579666).epsilon(1e-14));
  CHECK(bessel_j(1.0, 1.0) == doctest::Approx(0.4400505857449335).epsilon(1e-14));
  CHECK(bessel_j(0.0, 30.0) == doctest::Approx(-0.0863679835810403).epsilon(1e-11));
  CHECK(bessel_j(1.0, 30.0) == doctest::Approx(-0.1187510626246417).epsilon(1e-11));
}

TEST_CASE("J0^2 + J1^2 is non-increasing on [0, 30]") {
  double prev = 1.0;
  for (int i = 0; i <= 300; ++i) {
    const double x = 0.1 * i;
    const double v = std::pow(bessel_j(0.0, x), 2) + std::pow(bessel_j(1.0, x), 2);
    CHECK(v <= prev + 1e-12);
    prev = v;
  }
}

TEST_CASE("sincos in turns") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng);
    double s, c;
    special::sincos_turns(x, s, c);
    const long double arg = 2.0L * 3.141592653589793238462643383279502884L *
                            (static_cast<long double>(x) - std::nearbyint(static_cast<long double>(x)));
    CHECK(std::fabs(s - static_cast<double>(std::sin(arg))) < 4e-16);
    CHECK(std::fabs(c - static_cast<double>(std::cos(arg))) < 4e-16);
    double s2, c2;
    special::sincos_turns(-x, s2, c2);
    CHECK(s2 == -s);
    CHECK(c2 == c);
  }
  double s, c;
  special::sincos_turns(0.25, s, c);
  CHECK(s == 1.0);
  CHECK(c == 0.0);
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  std::vector<double> x, w;
  gauss_legendre(10, -1.0, 2.0, x, w);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * std::pow(x[i], 19);
  CHECK(acc == doctest::Approx((std::pow(2.0, 20) - 1.0) / 20.0).epsilon(1e-13));
}

TEST_CASE("phi_hat table") {
  BumpProfile b(2);
  auto t = phi_hat_table(b, 10.0, 11);
  REQUIRE(t.size() == 11);
  CHECK(t[0].second == doctest::Approx(b.integral()));
  CHECK(t[10].first == 10.0);
}
