#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "welldist/averages.hpp"

#include <cmath>

using namespace welldist;

namespace {

ThickenedMeasure lattice(int d, double q, double s, Variant v = Variant::standard) {
  return build_measure(rescale_to_unit(generate(SetKind::lattice, d, q, Shape::ball)), s, v);
}

ThickenedMeasure single_atom(int d, double q, double s) {
  auto ps = make_custom(PointMatrix::Zero(d, 1), Shape::ball, q);
  ps.scaled = true;
  return build_measure(ps, s);
}

// Independent circle average: std::polar phases, plain loops, midpoint
// angles and the bump transform from the profile's own cut-off.
double naive_circle_average(const ThickenedMeasure& m, double t, int n) {
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const double th = 2.0 * kPi * (k + 0.5) / n;
    Complex s = 0.0;
    for (std::size_t a = 0; a < m.size(); ++a)
      s += m.masses[a] * std::polar(1.0, -2.0 * kPi * t * (m.atoms(0, a) * std::cos(th) + m.atoms(1, a) * std::sin(th)));
    acc += std::norm(s);
  }
  return acc * 2.0 * kPi / n * std::pow(m.cutoff(t), 2);
}

}  // namespace

TEST_CASE("sigma at t = 0 is the surface measure") {
  const auto m = lattice(2, 8, 1.0);
  CHECK(std::fabs(surface_average(m, ConvexBody::ball(2), 0.0).sigma - 2.0 * kPi) <= 1e-12);
  const auto E = ConvexBody::ellipsoid({2.0, 1.0});
  CHECK(surface_average(m, E, 0.0).sigma == doctest::Approx(E.surface_measure()).epsilon(1e-12));
  const auto P = make_parabola_body();
  CHECK(surface_average(m, P, 0.0).sigma == doctest::Approx(P.surface_measure()).epsilon(1e-12));
  CHECK(surface_average(lattice(3, 4, 1.5), ConvexBody::ball(3), 0.0).sigma == doctest::Approx(4.0 * kPi).epsilon(1e-12));
}

TEST_CASE("single atom: sigma is the squared cut-off times the perimeter") {
  const auto m = single_atom(2, 8, 1.0);
  for (double t : {1.0, 10.0}) {
    const auto r = surface_average(m, ConvexBody::ball(2), t);
    const double exact = 2.0 * kPi * std::pow(m.bump.hat_radial(t / 64.0) / m.bump.integral(), 2);
    CHECK(std::fabs(r.sigma - exact) <= 1e-8);
  }
  const auto m3 = single_atom(3, 4, 1.5);
  const double exact3 = 4.0 * kPi * std::pow(m3.cutoff(5.0), 2);
  CHECK(surface_average(m3, ConvexBody::ball(3), 5.0).sigma == doctest::Approx(exact3).epsilon(1e-10));
}

TEST_CASE("circle average against a naive polar sum") {
  const auto m = lattice(2, 4, 1.0);
  for (double t : {3.0, 11.5, 30.0}) {
    const auto r = surface_average(m, ConvexBody::ball(2), t, {.tol = 1e-10});
    CHECK(r.converged);
    CHECK(r.sigma == doctest::Approx(naive_circle_average(m, t, 4000)).epsilon(1e-9));
  }
}

TEST_CASE("doubling self-convergence on the q = 8 lattice") {
  const auto m = lattice(2, 8, 1.0);
  const auto r = surface_average(m, ConvexBody::ball(2), 64.0);
  CHECK(r.converged);
  CHECK(r.residual < 1e-6);
  // One more doubling by hand agrees.
  QuadratureOptions finer;
  finer.oversample = 8.0;
  CHECK(surface_average(m, ConvexBody::ball(2), 64.0, finer).sigma == doctest::Approx(r.sigma).epsilon(1e-6));
}

TEST_CASE("M_max stops the doubling and flags the entry") {
  const auto m = lattice(2, 8, 1.0);
  QuadratureOptions o;
  o.m_max = initial_nodes(m, ConvexBody::ball(2), 64.0, o.oversample);
  const auto r = surface_average(m, ConvexBody::ball(2), 64.0, o);
  CHECK_FALSE(r.converged);
  CHECK(r.residual > 0.0);
  o.m_max = 32;
  CHECK_THROWS_AS(surface_average(m, ConvexBody::ball(2), 64.0, o), BudgetError);
  CHECK_THROWS_AS(surface_average(m, ConvexBody::ball(2), -1.0), DomainError);
}

TEST_CASE("Poisson and direct evaluators agree on the modified lattice") {
  const auto m = lattice(2, 8, 1.0, Variant::modified);
  const auto P = make_parabola_body();
  for (double t : {20.0, 64.0}) {
    QuadratureOptions direct, poisson;
    direct.evaluator = Evaluator::direct;
    poisson.evaluator = Evaluator::poisson;
    const double a = surface_average(m, P, t, direct).sigma;
    const double b = surface_average(m, P, t, poisson).sigma;
    CHECK(b == doctest::Approx(a).epsilon(1e-7));
  }
  QuadratureOptions poisson;
  poisson.evaluator = Evaluator::poisson;
  CHECK_THROWS_AS(surface_average(lattice(2, 8, 1.0), P, 10.0, poisson), DomainError);
}

TEST_CASE("dyadic grids") {
  CHECK(dyadic_grid(8, 64, 1) == std::vector<double>{8, 16, 32, 64});
  CHECK(dyadic_grid(16, 256, 2).size() == 9);
  CHECK_THROWS_AS(dyadic_grid(8, 64, 0), DomainError);
}

TEST_CASE("series values and super-range decay") {
  const auto m = lattice(2, 8, 1.0);
  const auto series = average_series(m, ConvexBody::ball(2), 8, 512, 1);
  CHECK(series.entries.size() == 7);
  for (const auto& e : series.entries) {
    CHECK(e.sigma >= 0.0);
    CHECK(e.converged);
  }
  const double s2 = surface_average(m, ConvexBody::ball(2), 2 * 64.0).sigma;
  const double s4 = surface_average(m, ConvexBody::ball(2), 4 * 64.0).sigma;
  const double s8 = surface_average(m, ConvexBody::ball(2), 8 * 64.0).sigma;
  CHECK(s8 / s2 <= 0.1);
  CHECK(s4 / s2 <= 0.25);
}

TEST_CASE("exponent fits on exact power laws") {
  const auto t = dyadic_grid(1, 1024, 2);
  std::vector<double> a, b;
  for (double x : t) {
    a.push_back(1.0 / x);
    b.push_back(5.0 * std::pow(x, -0.75));
  }
  const auto fa = fit_exponent(make_series("ball", 2, t, a), 1, 1024);
  CHECK(std::fabs(fa.beta - 1.0) <= 1e-9);
  CHECK(fa.stderr_ <= 1e-9);
  const auto fb = fit_exponent(make_series("ball", 2, t, b), 1, 1024);
  CHECK(std::fabs(fb.beta - 0.75) <= 1e-9);
  CHECK(std::exp(fb.intercept) == doctest::Approx(5.0).epsilon(1e-9));
  CHECK_THROWS_AS(fit_exponent(make_series("ball", 2, t, a), 1, 2), DomainError);
  b[3] = 0.0;
  CHECK_THROWS_AS(fit_exponent(make_series("ball", 2, t, b), 1, 1024), DomainError);
}

TEST_CASE("active caps by shell enumeration") {
  CHECK(count_active_caps(5, 25, 2, 0.5) == 20);
  CHECK(count_active_caps(5, 25, 2, 0.0) == 12);
  CHECK(count_active_caps(5, 25, 2, 0.0) <= count_active_caps(5, 25, 2, 0.5));
  CHECK(count_active_caps(5, 25, 2, 0.5) <= count_active_caps(5, 25, 2, 2.0));
  // Brute force over a box of dual points.
  for (double q : {3.0, 5.0, 7.5})
    for (double t : {20.0, 37.0})
      for (double w : {0.0, 0.7, 3.0}) {
        long long brute = 0;
        for (int a = -20; a <= 20; ++a)
          for (int b = -20; b <= 20; ++b)
            if (std::fabs(q * std::hypot(a, b) - t) <= w + 1e-12 * t) ++brute;
        CHECK(count_active_caps(q, t, 2, w) == brute);
      }
  long long brute3 = 0;
  for (int a = -8; a <= 8; ++a)
    for (int b = -8; b <= 8; ++b)
      for (int c = -8; c <= 8; ++c)
        if (std::fabs(2.0 * std::sqrt(a * a + b * b + c * c) - 12.0) <= 0.5) ++brute3;
  CHECK(count_active_caps(2, 12, 3, 0.5) == brute3);
}

TEST_CASE("cap decomposition of a single atom") {
  const auto m = single_atom(2, 16, 1.0);
  const double t = 100.0;
  const auto dec = sigma_half_decomposition(m, t);
  REQUIRE(!dec.caps.empty());
  const double first = dec.caps.front().contribution;
  for (const auto& c : dec.caps) CHECK(c.contribution == doctest::Approx(first).epsilon(1e-14));
  // The sup over tau of eta(C2 tau) cut(t - tau)^2.
  double best = 0.0;
  for (int k = -8; k <= 8; ++k) {
    const double tau = 0.25 * k;
    const double e = std::pow(1.0 + 4.0 * std::fabs(tau), -8.0);
    if (e < 1e-6) continue;
    best = std::max(best, e * std::pow(m.cutoff(std::fabs(t - tau)), 2));
  }
  CHECK(first == doctest::Approx(std::sqrt(t) * best).epsilon(1e-12));
  CHECK(dec.sigma_half == doctest::Approx(first * static_cast<double>(dec.caps.size())).epsilon(1e-12));
}

TEST_CASE("cap directions are separated and contributions nonnegative") {
  const auto m = lattice(2, 16, 1.0);
  const double t = 256.0;
  const auto dec = sigma_half_decomposition(m, t);
  const double sep = 0.25 / std::sqrt(t);
  for (std::size_t i = 0; i < dec.caps.size(); ++i) {
    CHECK(dec.caps[i].contribution >= 0.0);
    const auto& a = dec.caps[i].direction;
    const auto& b = dec.caps[(i + 1) % dec.caps.size()].direction;
    CHECK((a - b).norm() >= sep * (1 - 1e-12));
  }
  // Coarse bound and domination of the average.
  CHECK(dec.sigma_half <= 10.0 * std::sqrt(t));
  const double sigma = surface_average(m, ConvexBody::ball(2), t).sigma;
  CHECK(dec.sigma_half / t >= 0.5 * sigma);
}

TEST_CASE("cap contributions are rotation invariant") {
  auto m = lattice(2, 16, 1.0);
  const double t = 200.0;
  const auto base = sigma_half_decomposition(m, t);
  const double a = 17.0 * kPi / 180.0;
  Eigen::Matrix2d R;
  R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  m.atoms = R * m.atoms;
  for (int i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < m.size(); ++k) m.coords[i][k] = m.atoms(i, static_cast<Eigen::Index>(k));
  CapOptions o;
  o.frame_angle = a;
  const auto rot = sigma_half_decomposition(m, t, o);
  REQUIRE(rot.caps.size() == base.caps.size());
  CHECK(rot.sigma_half == doctest::Approx(base.sigma_half).epsilon(1e-6));
  for (std::size_t i = 0; i < base.caps.size(); i += 13)
    CHECK(rot.caps[i].contribution == doctest::Approx(base.caps[i].contribution).epsilon(1e-6));
}

TEST_CASE("cap decomposition in three dimensions") {
  const auto m = single_atom(3, 4, 1.5);
  const auto dec = sigma_half_decomposition(m, 9.0);
  const double sep = 0.25 / 3.0;
  for (std::size_t i = 0; i < dec.caps.size(); i += 7)
    for (std::size_t j = i + 1; j < dec.caps.size(); j += 5)
      CHECK((dec.caps[i].direction - dec.caps[j].direction).norm() >= sep);
  // A maximal separated set has about |S^2| / (pi (sep/2)^2) ... 4 pi / sep^2 points.
  CHECK(dec.caps.size() > 4.0 * kPi / (sep * sep) / 4.0);
  CHECK(dec.caps.size() < 4.0 * 4.0 * kPi / (sep * sep));
}

TEST_CASE("cap decomposition preconditions") {
  CHECK_THROWS_AS(sigma_half_decomposition(lattice(2, 8, 1.5), 10.0), DomainError);
  CHECK_THROWS_AS(sigma_half_decomposition(lattice(2, 8, 1.0), 5 * 64.0), DomainError);
}
