// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.
#include "welldist/averages.hpp"
#include "welldist/distances.hpp"
#include "welldist/geometry.hpp"
#include "welldist/kernels.hpp"
#include "welldist/mattila.hpp"
#include "welldist/measures.hpp"
#include "welldist/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace welldist;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ThickenedMeasure lattice(int d, double q, double s, Shape shape = Shape::ball, Variant v = Variant::standard) {
  return build_measure(rescale_to_unit(generate(SetKind::lattice, d, q, shape)), s, v);
}

// ---------------------------------------------------------------------------

Outcome delone_and_measures() {
  Outcome o;
  for (auto kind : {SetKind::lattice, SetKind::perturbed, SetKind::jittered}) {
    const auto a = generate(kind, 2, 12.0, Shape::ball, 99, kind == SetKind::perturbed ? 0.25 : 0.0);
    const auto b = generate(kind, 2, 12.0, Shape::ball, 99, kind == SetKind::perturbed ? 0.25 : 0.0);
    o.require(a.points == b.points, "generator determinism (" + to_string(kind) + ")");
    const auto rep = verify_delone(a);
    o.require(rep.ok, "Delone witnesses (" + to_string(kind) + "): " + rep.message);
  }
  o.require(generate(SetKind::jittered, 2, 12.0, Shape::ball, 1).points !=
                generate(SetKind::jittered, 2, 12.0, Shape::ball, 2).points,
            "seeds change jittered sets");

  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> unit(-1.0, 1.0), wide(-300.0, 300.0);
  double worst_zero = 0.0, worst_c = 0.0;
  bool conj = true;
  for (double q : {8.0, 16.0})
    for (double s : {1.0, 4.0 / 3.0}) {
      const auto m = lattice(2, q, s);
      worst_zero = std::max(worst_zero, std::abs(fourier_at(m, Vector::Zero(2)) - Complex(1.0, 0.0)));
      for (int i = 0; i < 100; ++i) {
        Vector xi(2);
        xi << wide(rng), wide(rng);
        const Complex a = fourier_at(m, xi), b = fourier_at(m, Vector(-xi));
        conj = conj && a.real() == b.real() && a.imag() == -b.imag();
        Vector x(2);
        x << unit(rng), unit(rng);
        for (double delta : {m.epsilon(), 1.0 / q, 0.1})
          worst_c = std::max(worst_c, ball_mass(m, x, delta) / std::pow(delta, s));
      }
    }
  o.require(worst_zero <= 1e-12, "mu_hat(0) = 1 within 1e-12");
  o.require(conj, "conjugate symmetry");
  o.require(worst_c <= 10.0, "Frostman constant <= 10");
  o.note("|mu_hat(0) - 1| <= " + fmt("%.1e", worst_zero) + ", Frostman C = " + fmt("%.3f", worst_c));
  return o;
}

// Trapezoid over [-1, 1]^2 of phi(x) e^{-2 pi i x.xi}; phi vanishes to high
// order at the edge of its unit-ball support.
double bump_hat_grid(const BumpProfile& b, double xi0, double xi1, int n) {
  const double h = 2.0 / n;
  std::vector<double> xs(n + 1);
  for (int i = 0; i <= n; ++i) xs[i] = -1.0 + i * h;
  Complex acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    Complex row = 0.0;
    for (int j = 0; j <= n; ++j) row += b.radial(std::hypot(xs[i], xs[j])) * std::polar(1.0, -2.0 * kPi * xs[j] * xi1);
    acc += row * std::polar(1.0, -2.0 * kPi * xs[i] * xi0);
  }
  return acc.real() * h * h;
}

Outcome oracles() {
  Outcome o;
  double worst = 0.0;
  struct Config {
    int d;
    double q;
  };
  for (const auto [d, q] : {Config{2, 8.0}, Config{2, 16.0}, Config{3, 4.0}}) {
    const auto m = lattice(d, q, 1.0, Shape::cube);
    std::mt19937_64 rng(31 + d * 100 + static_cast<int>(q));
    std::uniform_real_distribution<double> u(-4.0 * q, 4.0 * q);
    for (int i = 0; i < 100; ++i) {
      Vector xi(d);
      for (int k = 0; k < d; ++k) xi(k) = u(rng);
      const Complex a = fourier_at(m, xi), b = fourier_separable_oracle(m, xi);
      worst = std::max(worst, std::abs(a - b) / std::abs(b));
    }
  }
  o.require(worst < 1e-10, "direct sum vs Dirichlet product < 1e-10");

  const BumpProfile bump(2);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi), rad(0.0, 1.8);
  double worst_bump = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double r = rad(rng), a = ang(rng);
    Vector xi(2);
    xi << r * std::cos(a), r * std::sin(a);
    const double ref = bump_hat_grid(bump, xi(0), xi(1), 400);
    worst_bump = std::max(worst_bump, std::fabs(bump_hat(bump, xi) - ref) / std::fabs(ref));
  }
  o.require(worst_bump < 1e-6, "bump_hat vs grid quadrature < 1e-6");
  const double j0 = std::fabs(bessel_j(0.0, 2.404825557695773));
  o.require(j0 < 1e-10, "J_0 at its first zero < 1e-10");
  o.note("Dirichlet " + fmt("%.1e", worst) + ", bump " + fmt("%.1e", worst_bump) + ", J_0 " + fmt("%.1e", j0));
  return o;
}

Outcome coarse_bound(std::vector<AverageSeries>& keep) {
  Outcome o;
  const auto K = ConvexBody::ball(2);
  std::vector<double> peaks;
  for (double q : {16.0, 32.0}) {
    const auto m = lattice(2, q, 1.0);
    auto series = average_series(m, K, q, q * q, 2);
    double peak = 0.0;
    bool converged = true;
    for (const auto& e : series.entries) {
      peak = std::max(peak, q * e.sigma);
      converged = converged && e.converged;
    }
    const double tail = surface_average(m, K, 4 * q * q).sigma / surface_average(m, K, 2 * q * q).sigma;
    o.require(converged, "quadrature converged");
    o.require(tail <= 0.25, "sigma(4q^2)/sigma(2q^2) <= 0.25 at q = " + fmt("%g", q));
    o.note("q = " + fmt("%g", q) + ": max q sigma = " + fmt("%.4f", peak) + ", tail ratio " + fmt("%.4f", tail));
    peaks.push_back(peak);
    keep.push_back(std::move(series));
  }
  const double spread = *std::max_element(peaks.begin(), peaks.end()) / *std::min_element(peaks.begin(), peaks.end());
  o.require(spread <= 4.0, "max q sigma within a factor 4 across q");
  return o;
}

Outcome refinement(const AverageSeries& q32) {
  Outcome o;
  const double q = 32.0;
  const auto fit = fit_exponent(q32, 2 * q, q * q);
  o.require(fit.beta >= 0.8, "beta_hat >= 0.8");
  o.note("beta_hat = " + fmt("%.3f", fit.beta) + " (stderr " + fmt("%.3f", fit.stderr_) + ", " +
         std::to_string(fit.points) + " points on [64, 1024])");
  return o;
}

Outcome cap_diagnostic() {
  Outcome o;
  const double q = 16.0;
  const auto dec = sigma_half_decomposition(lattice(2, q, 1.0), q * q);
  o.require(dec.sigma_half <= 10.0 * q, "Sigma(q^2) <= 10 (q^2)^{1/2}");
  const long long c0 = count_active_caps(5.0, 25.0, 2, 0.0), c1 = count_active_caps(5.0, 25.0, 2, 0.5);
  // Independent brute force over the dual lattice 5 Z^2.
  auto brute = [](double width) {
    long long n = 0;
    for (int a = -10; a <= 10; ++a)
      for (int b = -10; b <= 10; ++b)
        if (std::fabs(std::hypot(5.0 * a, 5.0 * b) - 25.0) <= width) ++n;
    return n;
  };
  o.require(c0 == 12 && c0 == brute(0.0), "active caps width 0 = 12");
  o.require(c1 == 20 && c1 == brute(0.5), "active caps width 0.5 = 20");
  o.note("Sigma(256) = " + fmt("%.4f", dec.sigma_half) + " over " + std::to_string(dec.caps.size()) +
         " caps (bound 160); active caps " + std::to_string(c0) + ", " + std::to_string(c1));
  return o;
}

Outcome lattice_counts() {
  Outcome o;
  const auto B = ConvexBody::ball(2);
  const long long a = lattice_points_near_dilate(B, 5.0, 0.0).count;
  const long long b = lattice_points_near_dilate(B, 25.0, 0.0).count;
  const long long c = lattice_points_near_dilate(B, std::sqrt(3.0), 0.0).count;
  o.require(a == 12 && b == 20 && c == 0, "circle counts {12, 20, 0}");
  const std::vector<long long> taus{4, 16, 64, 256, 1024}, expect{3, 5, 9, 17, 33};
  std::vector<double> lt, lc;
  bool arcs = true;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const long long n = parabola_arc_count(taus[i], 1, Branches::upper);
    arcs = arcs && n == expect[i];
    lt.push_back(std::log(static_cast<double>(taus[i])));
    lc.push_back(std::log(static_cast<double>(n)));
  }
  o.require(arcs, "parabola arc counts {3, 5, 9, 17, 33}");
  // count ~ tau^gamma: least squares through the origin in log-log.
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lt.size(); ++i) {
    sxy += lt[i] * lc[i];
    sxx += lt[i] * lt[i];
  }
  const double gamma = sxy / sxx;
  // With a free intercept the +1 in sqrt(tau) + 1 pulls the slope below 1/2 at this range.
  const double mx = std::accumulate(lt.begin(), lt.end(), 0.0) / lt.size();
  const double my = std::accumulate(lc.begin(), lc.end(), 0.0) / lc.size();
  double cxy = 0.0, cxx = 0.0;
  for (std::size_t i = 0; i < lt.size(); ++i) {
    cxy += (lt[i] - mx) * (lc[i] - my);
    cxx += (lt[i] - mx) * (lt[i] - mx);
  }
  o.require(gamma >= 0.5, "fitted count exponent >= 0.5");
  o.note("gamma = " + fmt("%.4f", gamma) + " (free-intercept slope " + fmt("%.4f", cxy / cxx) + ")");
  return o;
}

Outcome parabola_lower_bound() {
  Outcome o;
  const auto P = make_parabola_body();
  std::vector<double> scaled;
  for (double tau : {16.0, 64.0, 256.0}) {
    const double q = tau * P.patch_scale();
    const auto m = lattice(2, q, 1.0, Shape::ball, Variant::modified);
    const auto r = surface_average(m, P, tau * tau);
    o.require(r.converged, "quadrature converged at tau = " + fmt("%g", tau));
    scaled.push_back(r.sigma * std::pow(tau * tau, 0.75));
  }
  const double lo = *std::min_element(scaled.begin(), scaled.end());
  const double hi = *std::max_element(scaled.begin(), scaled.end());
  o.require(lo > 0.0, "sigma t^{3/4} positive");
  o.require(hi <= 10.0 * lo, "sigma t^{3/4} uniform within a factor 10");
  o.note("sigma t^{3/4} = " + fmt("%.4f", scaled[0]) + ", " + fmt("%.4f", scaled[1]) + ", " + fmt("%.4f", scaled[2]) +
         " at tau = 16, 64, 256");
  return o;
}

Outcome distance_statistics() {
  Outcome o;
  PointMatrix g(2, 9);
  for (int k = 0; k < 9; ++k) {
    g(0, k) = k / 3;
    g(1, k) = k % 3;
  }
  const auto grid = make_custom(g, Shape::cube);
  const auto gs = distance_multiset(grid, ConvexBody::ball(2));
  const auto mm = max_multiplicity(gs, 0.0);
  o.require(distinct_count(gs, 0.0) == 5, "3x3 distinct = 5");
  o.require(mm.count == 12 && mm.value == 1.0, "3x3 max multiplicity (12, 1)");
  o.require(incidence_count(grid, grid, 1.0, ConvexBody::ball(2), 0.0) == 24, "3x3 incidences = 24");
  for (double q : {8.0, 16.0, 32.0}) {
    const auto A = generate(SetKind::lattice, 2, q, Shape::ball);
    const auto stats = distance_multiset(A, ConvexBody::ball(2));
    const long long distinct = distinct_count(stats, 1.0 / q);
    const double target = std::pow(static_cast<double>(A.size()), 0.75);
    o.require(static_cast<double>(distinct) >= target, "distinct >= |A_q|^{3/4} at q = " + fmt("%g", q));
    // On the unit-ball copy, gaps above 1/q leave room for at most 2q + 1 clusters.
    const auto unit = distance_multiset(rescale_to_unit(A), ConvexBody::ball(2));
    long long most = 0;
    for (const auto& [n, c] : incidence_profile(A, A)) most = std::max(most, c);
    o.require(static_cast<double>(most) <= 10.0 * std::pow(q, 8.0 / 3.0), "max incidences <= 10 q^{8/3}");
    o.note("q = " + fmt("%g", q) + ": distinct " + std::to_string(distinct) + " vs " + fmt("%.1f", target) +
           " (unit copy " + std::to_string(distinct_count(unit, 1.0 / q)) + "), max incidences " +
           std::to_string(most));
  }
  return o;
}

Outcome mattila_apparatus() {
  Outcome o;
  auto power = [](double beta, double T) {
    const auto t = dyadic_grid(1.0, T, 8);
    std::vector<double> s;
    for (double x : t) s.push_back(std::pow(x, -beta));
    return make_series("ball", 2, t, s);
  };
  const double T = 1024.0;
  const double e1 = energy_spectral(power(1.0, T), 1.0);
  const double e2 = energy_spectral(power(2.0, T), 1.0);
  const double mi = mattila_integral(power(2.0, T), 2).value;
  o.require(std::fabs(e1 / std::log(T) - 1.0) <= 0.02, "log T");
  o.require(std::fabs(e2 / (1.0 - 1.0 / T) - 1.0) <= 0.02, "1 - 1/T");
  o.require(std::fabs(mi / (0.5 * (1.0 - 1.0 / (T * T))) - 1.0) <= 0.02, "(1 - T^-2)/2");
  o.require(std::fabs(mi / 0.5 - 1.0) <= 0.02, "0.5");

  const double q = 16.0;
  const auto m = lattice(2, q, 1.0);
  const auto K = ConvexBody::ball(2);
  const auto series = average_series(m, K, q, q * q, 2);
  const auto nu = empirical_distance_measure(m);
  std::vector<double> a, b;
  for (const auto& e : series.entries) {
    a.push_back(hankel_transform(nu, 2.0 * kPi * e.t, 2));
    b.push_back(std::sqrt(e.t) * e.sigma);
  }
  const double corr = log_correlation(a, b);
  o.require(corr >= 0.8, "log-correlation >= 0.8");

  const auto wide = average_series(m, K, 1.0, 4.0 * q * q, 4);
  const double spectral = energy_constant(2, 1.0) * energy_spectral(wide, 1.0);
  const double direct = energy_direct(m, 1.0);
  o.require(spectral <= 4.0 * direct && direct <= 4.0 * spectral, "energy routes within a factor 4");

  const auto t = dyadic_grid(1.0, 2.0 * q * q, 8);
  const auto flat = make_series("ball", 2, t, std::vector<double>(t.size(), 1.0));
  const auto full = single_distance_integrals(flat, 0.5, q * q, 2.0 * q * q);
  const auto half = single_distance_integrals(flat, 0.5, q * q, 2.0 * q * q, {}, 0.5);
  const double rel = std::fabs(full.oscillatory - half.oscillatory) / half.oscillatory;
  o.require(rel <= 1e-6, "oscillatory integral vs half step within 1e-6");
  o.note("closed forms " + fmt("%.4f", e1 / std::log(T)) + ", " + fmt("%.4f", mi / 0.5) + "; correlation " +
         fmt("%.3f", corr) + "; energy " + fmt("%.3f", spectral) + " vs " + fmt("%.3f", direct) +
         "; half-step change " + fmt("%.1e", rel));
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome reproducibility() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "welldist_acceptance";
  fs::remove_all(root);
  std::vector<ExperimentConfig> configs;
  ExperimentConfig base;
  base.q = 8;
  base.t_min = 8;
  base.t_max = 128;
  base.per_octave = 2;
  for (const char* e : {"gen", "sigma", "sigma-k", "caps", "lattice-count", "distances", "incidences", "mattila",
                        "single-distance"}) {
    ExperimentConfig c = base;
    c.experiment = e;
    if (c.experiment == "sigma-k" || c.experiment == "lattice-count") c.body = "parabola";
    if (c.experiment == "mattila") c.t_min = 1;
    configs.push_back(c);
  }
  ExperimentConfig jit = base;
  jit.set_kind = "jittered";
  jit.seed = 7;
  configs.push_back(jit);
  const unsigned saved = max_threads();
  int files = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const fs::path a = root / (std::to_string(i) + "a"), b = root / (std::to_string(i) + "b");
    set_max_threads(1);
    const auto first = run_experiment(configs[i], a);
    set_max_threads(4);
    run_experiment(load_config(a / "manifest.json"), b);
    for (const auto& f : first.files) {
      if (f.size() < 4 || f.substr(f.size() - 4) != ".csv") continue;
      ++files;
      o.require(slurp(a / f) == slurp(b / f), configs[i].experiment + "/" + f + " differs");
    }
  }
  set_max_threads(saved);
  fs::remove_all(root);
  o.note(std::to_string(files) + " CSVs from " + std::to_string(configs.size()) +
         " manifests identical under 1 and 4 threads");
  return o;
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  std::vector<AverageSeries> series;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Delone and measure invariants", delone_and_measures},
      {"oracle equivalences", oracles},
      {"coarse bound across q", [&] { return coarse_bound(series); }},
      {"lattice refinement exponent", [&] { return refinement(series.at(1)); }},
      {"cap diagnostic and active caps", cap_diagnostic},
      {"lattice-point counts", lattice_counts},
      {"parabola-body lower bound", parabola_lower_bound},
      {"distance statistics", distance_statistics},
      {"Mattila apparatus", mattila_apparatus},
      {"reproducibility", reproducibility},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(clock::now() - start).count();
    std::printf("%s %zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
