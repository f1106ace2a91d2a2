#include "welldist/measures.hpp"

#include "welldist/special.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace welldist {

namespace {

// Per-frequency kernel shared by every entry point, so single and batched
// evaluation produce identical bits.
Complex exp_sum_kernel(const ThickenedMeasure& m, const double* xi, std::vector<double>& re,
                       std::vector<double>& im) {
  const std::size_t n = m.size();
  const int d = m.dim();
  re.resize(n);
  im.resize(n);
  // Phases in turns. Each product is split into its rounded value and exact
  // error, and reduced mod 1 before summing: near zeros of the sum the phase
  // rounding, not the summation, sets the absolute error.
  double* theta = re.data();
  std::fill(theta, theta + n, 0.0);
  for (int i = 0; i < d; ++i) {
    const double* xc = m.coords[i].data();
    const double f = xi[i];
    for (std::size_t a = 0; a < n; ++a) {
      const double p = xc[a] * f;
      const double e = std::fma(xc[a], f, -p);
      theta[a] += (p - std::nearbyint(p)) + e;
    }
  }
  const double* w = m.masses.data();
  double* imp = im.data();
  for (std::size_t a = 0; a < n; ++a) {
    double s, c;
    special::sincos_turns(theta[a], s, c);
    theta[a] = w[a] * c;
    imp[a] = -(w[a] * s);
  }
  return {pairwise_sum(std::span<const double>(re.data(), n)),
          pairwise_sum(std::span<const double>(im.data(), n))};
}

double riesz_constant(int d, double s) {
  return std::pow(kPi, s - 0.5 * d) * std::tgamma(0.5 * (d - s)) / std::tgamma(0.5 * s);
}

// Fraction of the sphere of radius rho about a point at distance r0 from x
// that lies inside B(x, R).
double shell_fraction(int d, double rho, double r0, double R) {
  if (r0 == 0.0) return rho <= R ? 1.0 : 0.0;
  if (d == 1) {
    return 0.5 * ((std::fabs(r0 - rho) <= R ? 1.0 : 0.0) + (r0 + rho <= R ? 1.0 : 0.0));
  }
  const double c = std::clamp((rho * rho + r0 * r0 - R * R) / (2.0 * rho * r0), -1.0, 1.0);
  if (d == 2) return std::acos(c) / kPi;
  if (d == 3) return 0.5 * (1.0 - c);
  throw DomainError("ball_mass: partial atoms supported for d <= 3");
}

}  // namespace

std::string to_string(Variant v) { return v == Variant::standard ? "standard" : "modified"; }

Variant parse_variant(const std::string& name) {
  if (name == "standard") return Variant::standard;
  if (name == "modified") return Variant::modified;
  throw DomainError("unknown measure variant '" + name + "'");
}

double ThickenedMeasure::epsilon() const { return std::pow(q, -p); }

double ThickenedMeasure::cutoff(double k) const {
  return bump.hat_radial(epsilon() * k) / bump.integral();
}

bool ThickenedMeasure::poisson_eligible() const {
  return variant == Variant::modified && base.provenance.kind == SetKind::lattice;
}

ThickenedMeasure build_measure(const PointSet& ps, double s, const BumpProfile& bump,
                               Variant variant) {
  if (ps.size() == 0) throw DomainError("build_measure: empty point set");
  if (!ps.scaled) throw DomainError("build_measure: point set must be scaled into the unit ball");
  const int d = ps.dim;
  if (!(s > 0.0 && s <= d)) throw DomainError("build_measure: s must lie in (0, d]");
  if (bump.dim() != d) throw DomainError("build_measure: bump dimension mismatch");
  ThickenedMeasure m;
  m.base = ps;
  m.q = ps.truncation.radius;
  m.s = s;
  m.p = d / s;
  m.variant = variant;
  m.bump = bump;
  const double qd = std::pow(m.q, -d);
  std::vector<double> raw;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < ps.points.cols(); ++j) {
    double w = qd;
    if (variant == Variant::modified) w *= bump.radial(ps.points.col(j).norm());
    if (w > 0.0) {
      raw.push_back(w);
      keep.push_back(j);
    }
  }
  if (raw.empty()) throw DomainError("build_measure: every atom has zero weight");
  const double total = pairwise_sum(raw);
  m.c_a = 1.0 / (total * bump.integral());
  m.atoms.resize(d, static_cast<Eigen::Index>(keep.size()));
  m.coords.assign(d, std::vector<double>(keep.size()));
  m.weights.resize(keep.size());
  m.masses.resize(keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    m.atoms.col(static_cast<Eigen::Index>(k)) = ps.points.col(keep[k]);
    for (int i = 0; i < d; ++i) m.coords[i][k] = ps.points(i, keep[k]);
    m.weights[k] = m.c_a * raw[k];
    m.masses[k] = raw[k] / total;
  }
  return m;
}

ThickenedMeasure build_measure(const PointSet& ps, double s, Variant variant) {
  return build_measure(ps, s, BumpProfile(ps.dim), variant);
}

Complex exponential_sum(const ThickenedMeasure& m, const Eigen::Ref<const Vector>& xi) {
  if (xi.size() != m.dim()) throw DomainError("exponential_sum: dimension mismatch");
  std::vector<double> re, im;
  const Vector x = xi;
  return exp_sum_kernel(m, x.data(), re, im);
}

Complex fourier_at(const ThickenedMeasure& m, const Eigen::Ref<const Vector>& xi) {
  return m.cutoff(xi.norm()) * exponential_sum(m, xi);
}

Eigen::VectorXcd fourier_batch(const ThickenedMeasure& m, const PointMatrix& xis) {
  if (xis.rows() != m.dim()) throw DomainError("fourier_batch: dimension mismatch");
  Eigen::VectorXcd out(xis.cols());
  parallel_for(static_cast<std::size_t>(xis.cols()), [&](std::size_t lo, std::size_t hi) {
    std::vector<double> re, im;
    Vector x(m.dim());
    for (std::size_t j = lo; j < hi; ++j) {
      x = xis.col(static_cast<Eigen::Index>(j));
      out(static_cast<Eigen::Index>(j)) = m.cutoff(x.norm()) * exp_sum_kernel(m, x.data(), re, im);
    }
  });
  return out;
}

Complex fourier_separable_oracle(const ThickenedMeasure& m, const Eigen::Ref<const Vector>& xi) {
  if (m.base.provenance.kind != SetKind::lattice || m.base.truncation.shape != Shape::cube ||
      m.variant != Variant::standard) {
    throw DomainError("fourier_separable_oracle: needs a cube-truncated lattice, standard variant");
  }
  const double n = std::floor(m.q);
  double prod = 1.0;
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    const double x = xi(i) / m.q;
    if (x == std::nearbyint(x)) {
      prod *= 2.0 * n + 1.0;
      continue;
    }
    double sn, cn, sd, cd;
    special::sincos_turns(0.5 * (2.0 * n + 1.0) * x, sn, cn);
    special::sincos_turns(0.5 * x, sd, cd);
    prod *= sn / sd;
  }
  return m.cutoff(xi.norm()) * m.masses[0] * prod;
}

Complex fourier_poisson(const ThickenedMeasure& m, const Eigen::Ref<const Vector>& xi,
                        double radius) {
  if (!m.poisson_eligible()) {
    throw DomainError("fourier_poisson: needs the modified measure over the full lattice");
  }
  const int d = m.dim();
  if (xi.size() != d) throw DomainError("fourier_poisson: dimension mismatch");
  auto lattice_sum = [&](const Vector& center) {
    std::vector<long long> lo(d), hi(d), cur(d);
    for (int i = 0; i < d; ++i) {
      lo[i] = static_cast<long long>(std::ceil((center(i) - radius) / m.q));
      hi[i] = static_cast<long long>(std::floor((center(i) + radius) / m.q));
      if (lo[i] > hi[i]) return 0.0;
      cur[i] = lo[i];
    }
    double acc = 0.0;
    Vector diff(d);
    while (true) {
      for (int i = 0; i < d; ++i) diff(i) = center(i) - m.q * static_cast<double>(cur[i]);
      const double r = diff.norm();
      if (r <= radius) acc += m.bump.hat_radial(r);
      int k = d - 1;
      while (k >= 0 && cur[k] == hi[k]) {
        cur[k] = lo[k];
        --k;
      }
      if (k < 0) break;
      ++cur[k];
    }
    return acc;
  };
  const Vector x = xi;
  const double num = lattice_sum(x);
  if (num == 0.0) return 0.0;
  return m.cutoff(x.norm()) * num / lattice_sum(Vector::Zero(d));
}

double self_energy_constant(const BumpProfile& bump, double s) {
  const int d = bump.dim();
  if (!(s > 0.0 && s < d)) throw DomainError("self_energy_constant: s must lie in (0, d)");
  std::vector<double> x, w;
  const double h0 = bump.integral();
  auto f = [&](double k) {
    const double r = bump.hat_radial(k) / h0;
    return r * r;
  };
  // [0, 1] in v = k^s removes the k^{s-1} endpoint singularity.
  gauss_legendre(32, 0.0, 1.0, x, w);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * f(std::pow(x[i], 1.0 / s)) / s;
  gauss_legendre(24, 0.0, 1.0, x, w);
  for (int piece = 1; piece < 400; ++piece) {
    double part = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double k = piece + x[i];
      part += w[i] * f(k) * std::pow(k, s - 1.0);
    }
    acc += part;
  }
  return riesz_constant(d, s) * sphere_area(d - 1) * acc;
}

double energy_direct(const ThickenedMeasure& m, double s) {
  const int d = m.dim();
  if (!(s > 0.0 && s < d)) throw DomainError("energy_direct: s must lie in (0, d), diverges at s >= d");
  const std::size_t n = m.size();
  std::vector<double> rows(n, 0.0);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> terms;
    for (std::size_t a = lo; a < hi; ++a) {
      terms.clear();
      const auto xa = m.atoms.col(static_cast<Eigen::Index>(a));
      for (std::size_t b = a + 1; b < n; ++b) {
        const double r = (xa - m.atoms.col(static_cast<Eigen::Index>(b))).norm();
        terms.push_back(m.masses[b] * std::pow(r, -s));
      }
      rows[a] = 2.0 * m.masses[a] * pairwise_sum(terms);
    }
  });
  const double cross = pairwise_sum(rows);
  std::vector<double> self(n);
  const double kappa = self_energy_constant(m.bump, s) * std::pow(m.epsilon(), -s);
  for (std::size_t a = 0; a < n; ++a) self[a] = m.masses[a] * m.masses[a] * kappa;
  return cross + pairwise_sum(self);
}

double ball_mass(const ThickenedMeasure& m, const Eigen::Ref<const Vector>& x, double delta) {
  if (!(delta >= 0.0)) throw DomainError("ball_mass: delta must be nonnegative");
  const int d = m.dim();
  const double eps = m.epsilon();
  const double h0 = m.bump.integral();
  const double shell = sphere_area(d - 1);
  std::vector<double> gx, gw;
  gauss_legendre(48, 0.0, 1.0, gx, gw);
  std::vector<double> parts;
  for (std::size_t a = 0; a < m.size(); ++a) {
    const double r0 = (m.atoms.col(static_cast<Eigen::Index>(a)) - x).norm() / eps;
    const double R = delta / eps;
    if (r0 + 1.0 <= R) {
      parts.push_back(m.masses[a]);
      continue;
    }
    if (r0 - 1.0 >= R) continue;
    // Integrate the radial profile against the shell fraction, split at the
    // radii where the fraction has kinks.
    std::vector<double> cuts{0.0, 1.0};
    for (double c : {std::fabs(R - r0), R + r0}) {
      if (c > 0.0 && c < 1.0) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double lo = cuts[k], len = cuts[k + 1] - cuts[k];
      for (std::size_t i = 0; i < gx.size(); ++i) {
        const double rho = lo + len * gx[i];
        acc += gw[i] * len * m.bump.radial(rho) * shell * std::pow(rho, d - 1) *
               shell_fraction(d, rho, r0, R);
      }
    }
    parts.push_back(m.masses[a] * std::min(1.0, acc / h0));
  }
  return pairwise_sum(parts);
}

std::string measure_descriptor(const ThickenedMeasure& m) {
  nlohmann::ordered_json j;
  j["set"] = {{"kind", to_string(m.base.provenance.kind)},
              {"dim", m.dim()},
              {"q", m.q},
              {"shape", to_string(m.base.truncation.shape)},
              {"seed", m.base.provenance.seed},
              {"jitter", m.base.provenance.jitter}};
  j["s"] = m.s;
  j["p"] = m.p;
  j["variant"] = to_string(m.variant);
  j["c_a"] = m.c_a;
  j["bump"] = {{"rho", m.bump.rho()}, {"amplitude", m.bump.amplitude()}, {"integral", m.bump.integral()}};
  j["atoms"] = m.size();
  return j.dump(2);
}

ThickenedMeasure measure_from_descriptor(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    const auto& set = j.at("set");
    const SetKind kind = parse_set_kind(set.at("kind").get<std::string>());
    const int dim = set.at("dim").get<int>();
    auto ps = generate(kind, dim, set.at("q").get<double>(),
                       parse_shape(set.at("shape").get<std::string>()),
                       set.at("seed").get<std::uint64_t>(), set.at("jitter").get<double>());
    BumpProfile bump(dim, j.at("bump").at("rho").get<double>());
    return build_measure(rescale_to_unit(ps), j.at("s").get<double>(), bump,
                         parse_variant(j.at("variant").get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("measure descriptor: ") + e.what());
  }
}

}  // namespace welldist
