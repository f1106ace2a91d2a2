#include "welldist/runner.hpp"

#include "welldist/averages.hpp"
#include "welldist/distances.hpp"
#include "welldist/geometry.hpp"
#include "welldist/mattila.hpp"
#include "welldist/measures.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace welldist {

namespace fs = std::filesystem;

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

// ---------------------------------------------------------------------------
// Key table

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("'" + v + "' is not a number");
  }
  if (used != v.size() || !std::isfinite(out)) throw ConfigError("'" + v + "' is not a finite number");
  return out;
}

long long to_integer(const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("'" + v + "' is not an integer");
  }
  if (used != v.size()) throw ConfigError("'" + v + "' is not an integer");
  return out;
}

std::vector<double> to_list(const std::string& v) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  std::stringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(to_double(trim(item)));
  return out;
}

// Shortest of %.15g / %.17g that reads back exactly.
std::string config_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  if (std::strtod(buf, nullptr) == v) return buf;
  return format_number(v);
}

std::string from_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + config_number(v[i]);
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("'" + v + "' is not a boolean");
}

struct Key {
  std::string name;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

template <class T>
Key number(const char* name, T ExperimentConfig::*field) {
  return {name, [field](const ExperimentConfig& c) { return config_number(static_cast<double>(c.*field)); },
          [field](ExperimentConfig& c, const std::string& v) {
            if constexpr (std::is_floating_point_v<T>) {
              c.*field = to_double(v);
            } else {
              const long long n = to_integer(v);
              if (n < 0 && std::is_unsigned_v<T>) throw ConfigError("'" + v + "' must be nonnegative");
              c.*field = static_cast<T>(n);
            }
          }};
}

Key integer(const char* name, long long ExperimentConfig::*field) {
  return {name, [field](const ExperimentConfig& c) { return std::to_string(c.*field); },
          [field](ExperimentConfig& c, const std::string& v) { c.*field = to_integer(v); }};
}

Key seed_key() {
  return {"seed", [](const ExperimentConfig& c) { return std::to_string(c.seed); },
          [](ExperimentConfig& c, const std::string& v) {
            if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
              throw ConfigError("'" + v + "' is not a nonnegative integer");
            }
            try {
              c.seed = std::stoull(v);
            } catch (const std::exception&) {
              throw ConfigError("'" + v + "' is out of range");
            }
          }};
}

Key text(const char* name, std::string ExperimentConfig::*field) {
  return {name, [field](const ExperimentConfig& c) { return c.*field; },
          [field](ExperimentConfig& c, const std::string& v) { c.*field = v; }};
}

Key list(const char* name, std::vector<double> ExperimentConfig::*field) {
  return {name, [field](const ExperimentConfig& c) { return from_list(c.*field); },
          [field](ExperimentConfig& c, const std::string& v) { c.*field = to_list(v); }};
}

Key flag(const char* name, bool ExperimentConfig::*field) {
  return {name, [field](const ExperimentConfig& c) { return std::string(c.*field ? "true" : "false"); },
          [field](ExperimentConfig& c, const std::string& v) { c.*field = to_bool(v); }};
}

const std::vector<Key>& keys() {
  using C = ExperimentConfig;
  static const std::vector<Key> table = {
      text("experiment", &C::experiment),
      number("d", &C::d),
      number("q", &C::q),
      number("s", &C::s),
      seed_key(),
      text("set.kind", &C::set_kind),
      text("set.shape", &C::set_shape),
      number("set.jitter", &C::set_jitter),
      text("measure.variant", &C::measure_variant),
      number("measure.rho", &C::measure_rho),
      text("body", &C::body),
      number("t.min", &C::t_min),
      number("t.max", &C::t_max),
      number("t.per_octave", &C::per_octave),
      number("quad.oversample", &C::quad_oversample),
      number("quad.tol", &C::quad_tol),
      integer("quad.m_max", &C::quad_m_max),
      text("quad.evaluator", &C::quad_evaluator),
      number("constants.c1", &C::c1),
      number("constants.C2", &C::C2),
      number("constants.eta_order", &C::eta_order),
      number("constants.eta_scale", &C::eta_scale),
      number("constants.tau_step", &C::tau_step),
      number("constants.eta_floor", &C::eta_floor),
      list("caps.t", &C::caps_t),
      list("lattice.tau", &C::lattice_tau),
      number("lattice.eps", &C::lattice_eps),
      list("distances.delta", &C::distances_delta),
      list("incidences.tau", &C::incidences_tau),
      number("incidences.eps", &C::incidences_eps),
      number("single.tau", &C::single_tau),
      number("single.lo", &C::single_lo),
      number("single.hi", &C::single_hi),
      flag("single.resample", &C::single_resample),
      text("report.in", &C::report_in),
  };
  return table;
}

const Key* find_key(const std::string& name) {
  for (const auto& k : keys())
    if (k.name == name) return &k;
  return nullptr;
}

Evaluator parse_evaluator(const std::string& v) {
  if (v == "automatic") return Evaluator::automatic;
  if (v == "direct") return Evaluator::direct;
  if (v == "poisson") return Evaluator::poisson;
  throw ConfigError("unknown evaluator '" + v + "'");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& k : keys()) out.push_back(k.name);
    return out;
  }();
  return names;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"gen",       "sigma",      "sigma-k", "caps",
                                                 "lattice-count", "distances", "incidences", "mattila",
                                                 "single-distance", "report"};
  return names;
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const Key* k = find_key(key);
  if (!k) throw ConfigError("unknown key '" + key + "'");
  try {
    k->set(cfg, value);
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

std::string get_config_value(const ExperimentConfig& cfg, const std::string& key) {
  const Key* k = find_key(key);
  if (!k) throw ConfigError("unknown key '" + key + "'");
  return k->get(cfg);
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  std::vector<std::string> problems;
  std::map<std::string, int> seen;
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) {
      problems.push_back(where + "expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    if (seen.count(key)) {
      problems.push_back(where + "duplicate key '" + key + "' (first on line " + std::to_string(seen[key]) + ")");
      continue;
    }
    seen[key] = lineno;
    try {
      set_config_value(base, key, trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      problems.push_back(where + e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
  return base;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& k : keys()) out += k.name + " = " + k.get(cfg) + "\n";
  return out;
}

ExperimentConfig load_config(const fs::path& path, ExperimentConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
    if (!j.contains("config") || !j["config"].is_object()) {
      throw ConfigError(path.string() + ": manifest has no config object");
    }
    std::string lines;
    for (const auto& [k, v] : j["config"].items()) {
      if (!v.is_string()) throw ConfigError(path.string() + ": config value of '" + k + "' must be a string");
      lines += k + " = " + v.get<std::string>() + "\n";
    }
    return parse_config(lines, base);
  }
  return parse_config(text, base);
}

void validate_config(const ExperimentConfig& c) {
  std::vector<std::string> bad;
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) bad.push_back(what);
  };
  const auto& ex = experiment_names();
  need(std::find(ex.begin(), ex.end(), c.experiment) != ex.end(), "experiment: unknown '" + c.experiment + "'");
  need(c.d == 2 || c.d == 3, "d: must be 2 or 3");
  need(c.q >= 1.0, "q: must be at least 1");
  need(c.s > 0.0 && c.s <= c.d, "s: must lie in (0, d]");
  try {
    parse_set_kind(c.set_kind);
  } catch (const Error&) {
    bad.push_back("set.kind: unknown '" + c.set_kind + "'");
  }
  try {
    parse_shape(c.set_shape);
  } catch (const Error&) {
    bad.push_back("set.shape: unknown '" + c.set_shape + "'");
  }
  need(c.set_jitter >= 0.0 && c.set_jitter < 0.5, "set.jitter: must lie in [0, 1/2)");
  need(c.measure_variant == "standard" || c.measure_variant == "modified", "measure.variant: standard or modified");
  need(c.measure_rho > 0.0 && c.measure_rho <= 0.5, "measure.rho: must lie in (0, 1/2]");
  if (c.d == 2 || c.d == 3) {
    try {
      parse_body(c.body, c.d);
    } catch (const Error& e) {
      bad.push_back(std::string("body: ") + e.what());
    }
  }
  need(c.t_min >= 1.0, "t.min: must be at least 1");
  need(c.t_max > c.t_min, "t.max: must exceed t.min");
  need(c.per_octave >= 1 && c.per_octave <= 64, "t.per_octave: must lie in [1, 64]");
  need(c.quad_oversample >= 1.0, "quad.oversample: must be at least 1");
  need(c.quad_tol > 0.0 && c.quad_tol < 1.0, "quad.tol: must lie in (0, 1)");
  need(c.quad_m_max >= 64, "quad.m_max: must be at least 64");
  try {
    parse_evaluator(c.quad_evaluator);
  } catch (const ConfigError&) {
    bad.push_back("quad.evaluator: automatic, direct or poisson");
  }
  need(c.c1 > 0.0, "constants.c1: must be positive");
  need(c.C2 > 0.0, "constants.C2: must be positive");
  need(c.eta_order >= 1, "constants.eta_order: must be at least 1");
  need(c.eta_scale > 0.0, "constants.eta_scale: must be positive");
  need(c.tau_step > 0.0, "constants.tau_step: must be positive");
  need(c.eta_floor > 0.0 && c.eta_floor < 1.0, "constants.eta_floor: must lie in (0, 1)");
  for (double t : c.caps_t) need(t > 0.0, "caps.t: entries must be positive");
  for (double t : c.lattice_tau) need(t > 0.0, "lattice.tau: entries must be positive");
  need(c.lattice_eps >= 0.0, "lattice.eps: must be nonnegative");
  for (double v : c.distances_delta) need(v >= 0.0, "distances.delta: entries must be nonnegative");
  for (double t : c.incidences_tau) need(t >= 0.0, "incidences.tau: entries must be nonnegative");
  need(c.incidences_eps >= 0.0, "incidences.eps: must be nonnegative");
  need(c.single_tau > 0.0 && c.single_tau < 1.0, "single.tau: must lie in (0, 1)");
  need(c.single_lo >= 0.0 && c.single_hi >= 0.0, "single.lo, single.hi: must be nonnegative");
  if (c.single_lo > 0.0 && c.single_hi > 0.0) need(c.single_hi > c.single_lo, "single.hi: must exceed single.lo");
  if (!bad.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& b : bad) msg += "\n  " + b;
    throw ConfigError(msg);
  }
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) { row(header); }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
    text_ += '\n';
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

std::string num(double v) { return format_number(v); }
std::string num(long long v) { return std::to_string(v); }

struct Context {
  const ExperimentConfig& cfg;
  fs::path out;
  RunSummary summary;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  void write(const std::string& name, const std::string& text) {
    std::ofstream f(out / name, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + (out / name).string());
    f << text;
    if (!f) throw Error("failed writing " + (out / name).string());
    summary.files.push_back(name);
  }
  void say(const std::string& line) { summary.lines.push_back(line); }
};

PointSet point_set(const ExperimentConfig& c) {
  return generate(parse_set_kind(c.set_kind), c.d, c.q, parse_shape(c.set_shape), c.seed, c.set_jitter);
}

ThickenedMeasure measure(const ExperimentConfig& c) {
  return build_measure(rescale_to_unit(point_set(c)), c.s, BumpProfile(c.d, c.measure_rho),
                       parse_variant(c.measure_variant));
}

QuadratureOptions quadrature(const ExperimentConfig& c) {
  QuadratureOptions o;
  o.oversample = c.quad_oversample;
  o.tol = c.quad_tol;
  o.m_max = c.quad_m_max;
  o.evaluator = parse_evaluator(c.quad_evaluator);
  return o;
}

// Rough count of complex exponentials for a series; gates runaway configs.
void gate_series(const ThickenedMeasure& m, const ConvexBody& K, const std::vector<double>& ts, double oversample) {
  constexpr double kBudget = 2e12;
  double work = 0.0;
  for (double t : ts) work += 2.0 * static_cast<double>(initial_nodes(m, K, t, oversample)) * static_cast<double>(m.size());
  if (work > kBudget) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "about %.3g complex exponentials requested, budget %.3g", work, kBudget);
    throw BudgetError(buf);
  }
}

void write_series(Context& ctx, const AverageSeries& series) {
  Csv csv({"body", "t", "sigma", "M", "residual"});
  for (const auto& e : series.entries) csv.row({series.body, num(e.t), num(e.sigma), num(e.M), num(e.residual)});
  ctx.write("sigma_series.csv", csv.text());
  int unconverged = 0;
  for (const auto& e : series.entries) unconverged += e.converged ? 0 : 1;
  if (unconverged) ctx.say("warning: " + std::to_string(unconverged) + " entries stopped at quad.m_max");
}

AverageSeries series_over(Context& ctx, const ThickenedMeasure& m, const ConvexBody& K, double t_min, double t_max) {
  const auto& c = ctx.cfg;
  gate_series(m, K, dyadic_grid(t_min, t_max, c.per_octave), c.quad_oversample);
  auto series = average_series(m, K, t_min, t_max, c.per_octave, quadrature(c));
  write_series(ctx, series);
  ctx.extra["measure"] = nlohmann::ordered_json::parse(measure_descriptor(m));
  return series;
}

void say_fit(Context& ctx, const AverageSeries& series) {
  if (series.entries.size() < 4) return;
  try {
    const auto fit = fit_exponent(series, series.entries.front().t, series.entries.back().t);
    ctx.say("beta_hat = " + num(fit.beta) + " (stderr " + num(fit.stderr_) + ", " + std::to_string(fit.points) +
            " points)");
  } catch (const DomainError& e) {
    ctx.say(std::string("no exponent fit: ") + e.what());
  }
}

void run_gen(Context& ctx) {
  const auto ps = point_set(ctx.cfg);
  std::vector<std::string> header;
  for (int k = 0; k < ps.dim; ++k) header.push_back("x" + std::to_string(k));
  Csv csv(header);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    std::vector<std::string> row;
    for (int k = 0; k < ps.dim; ++k) row.push_back(num(ps.points(k, static_cast<Eigen::Index>(i))));
    csv.row(row);
  }
  ctx.write("points.csv", csv.text());
  ctx.say(std::to_string(ps.size()) + " points");
}

void run_sigma(Context& ctx, bool dual) {
  const auto& c = ctx.cfg;
  const auto m = measure(c);
  const auto K = parse_body(c.body, c.d);
  const auto surface = dual ? K.polar() : K;
  const auto series = series_over(ctx, m, surface, c.t_min, c.t_max);
  ctx.say(std::to_string(series.entries.size()) + " averages over the boundary of " + series.body);
  say_fit(ctx, series);
}

void run_caps(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto m = measure(c);
  CapOptions o;
  o.c1 = c.c1;
  o.C2 = c.C2;
  o.eta_scale = c.eta_scale;
  o.eta = DecayProfile{c.eta_order};
  o.tau_step = c.tau_step;
  o.eta_floor = c.eta_floor;
  std::vector<std::string> header{"t", "cap_index", "px", "py"};
  if (c.d == 3) header.push_back("pz");
  header.push_back("contribution");
  Csv csv(header);
  const auto ts = c.caps_t.empty() ? std::vector<double>{c.q * c.q} : c.caps_t;
  for (double t : ts) {
    const auto dec = sigma_half_decomposition(m, t, o);
    for (std::size_t i = 0; i < dec.caps.size(); ++i) {
      std::vector<std::string> row{num(t), num(static_cast<long long>(i))};
      for (int k = 0; k < c.d; ++k) row.push_back(num(dec.caps[i].direction[k]));
      row.push_back(num(dec.caps[i].contribution));
      csv.row(row);
    }
    ctx.say("Sigma(" + num(t) + ") = " + num(dec.sigma_half) + " over " + std::to_string(dec.caps.size()) + " caps");
  }
  ctx.write("caps.csv", csv.text());
}

void run_lattice_count(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto K = parse_body(c.body, c.d);
  Csv csv({"body", "tau", "eps", "count"});
  for (double tau : c.lattice_tau) {
    long long count = 0;
    if (K.kind() == BodyKind::parabola) {
      // The parabolic arc of the dilate: integer points with Y^2 = tau X.
      if (c.lattice_eps != 0.0) throw ConfigError("lattice.eps: the parabola arc count is exact, eps must be 0");
      count = parabola_arc_count(tau, Branches::upper);
    } else {
      count = lattice_points_near_dilate(K, tau, c.lattice_eps, false).count;
    }
    csv.row({K.name(), num(tau), num(c.lattice_eps), num(count)});
    ctx.say("tau = " + num(tau) + ": " + std::to_string(count));
  }
  ctx.write("lattice_count.csv", csv.text());
}

void run_distances(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto ps = point_set(c);
  const auto K = parse_body(c.body, c.d);
  const auto stats = distance_multiset(ps, K);
  const auto deltas = c.distances_delta.empty() ? std::vector<double>{0.0, 1.0 / c.q} : c.distances_delta;
  Csv csv({"source", "norm", "n_points", "delta", "distinct", "max_mult", "mult_value"});
  for (double delta : deltas) {
    const long long distinct = distinct_count(stats, delta);
    const auto mm = max_multiplicity(stats, delta);
    csv.row({stats.source, stats.norm, num(stats.n_points), num(delta), num(distinct), num(mm.count), num(mm.value)});
    ctx.say("delta = " + num(delta) + ": " + std::to_string(distinct) + " distinct, max multiplicity " +
            std::to_string(mm.count));
  }
  ctx.write("distances.csv", csv.text());
}

void run_incidences(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto ps = point_set(c);
  const auto K = parse_body(c.body, c.d);
  Csv csv({"n_points", "n_centers", "tau", "eps", "count"});
  const auto n = static_cast<long long>(ps.size());
  for (double tau : c.incidences_tau) {
    const long long count = incidence_count(ps, ps, tau, K, c.incidences_eps);
    csv.row({num(n), num(n), num(tau), num(c.incidences_eps), num(count)});
    ctx.say("tau = " + num(tau) + ": " + std::to_string(count) + " incidences");
  }
  ctx.write("incidences.csv", csv.text());
}

void run_mattila(Context& ctx) {
  const auto& c = ctx.cfg;
  const auto m = measure(c);
  const auto K = parse_body(c.body, c.d);
  const auto series = series_over(ctx, m, K.polar(), c.t_min, c.t_max);
  const double lo = series.entries.front().t, hi = series.entries.back().t;
  Csv csv({"quantity", "s_or_tau", "range_lo", "range_hi", "value"});
  const double energy = energy_spectral(series, c.s);
  csv.row({"energy_spectral", num(c.s), num(lo), num(hi), num(energy)});
  const auto mat = mattila_integral(series, c.d, K);
  csv.row({"mattila", num(c.s), num(lo), num(hi), num(mat.value)});
  ctx.write("mattila.csv", csv.text());
  ctx.say("energy_spectral = " + num(energy));
  ctx.say("mattila = " + num(mat.value) + (mat.divergent_trend ? " (divergent trend)" : ""));
  if (K.kind() == BodyKind::ball && series.entries.size() >= 3) {
    // Raw nu_hat beside t^{(d-1)/2} sigma; nu_hat is also taken at 2 pi t,
    // where the e^{-2 pi i x.xi} convention puts the matching argument.
    const auto nu = empirical_distance_measure(m);
    Csv side({"t", "nu_hat", "nu_hat_2pi", "scaled_sigma"});
    std::vector<double> a, b;
    for (const auto& e : series.entries) {
      const double scaled = std::pow(e.t, 0.5 * (c.d - 1)) * e.sigma;
      const double at2pi = hankel_transform(nu, 2.0 * kPi * e.t, c.d);
      side.row({num(e.t), num(hankel_transform(nu, e.t, c.d)), num(at2pi), num(scaled)});
      a.push_back(at2pi);
      b.push_back(scaled);
    }
    ctx.write("hankel.csv", side.text());
    try {
      ctx.say("log-correlation(nu_hat(2 pi t), t^{(d-1)/2} sigma) = " + num(log_correlation(a, b)));
    } catch (const DomainError&) {
    }
  }
}

void run_single_distance(Context& ctx) {
  const auto& c = ctx.cfg;
  if (c.d != 2) throw ConfigError("single-distance: d must be 2");
  const auto m = measure(c);
  const auto K = parse_body(c.body, c.d);
  const double lo = c.single_lo > 0.0 ? c.single_lo : c.q * c.q;
  const double hi = c.single_hi > 0.0 ? c.single_hi : 2.0 * c.q * c.q;
  // Extend the grid to cover [lo, hi] in whole grid steps.
  const double t0 = std::min(c.t_min, lo);
  const double steps = std::ceil(c.per_octave * std::log2(std::max(c.t_max, hi) / t0) - 1e-9);
  const double t1 = t0 * std::exp2(steps / c.per_octave);
  const auto opts = quadrature(c);
  if (c.single_resample) {
    const double nodes = std::ceil((hi - lo) * 8.0 * c.single_tau) + 1.0;
    const double work = 2.0 * nodes * static_cast<double>(initial_nodes(m, K, hi, c.quad_oversample)) *
                        static_cast<double>(m.size());
    if (work > 2e12) {
      char buf[200];
      std::snprintf(buf, sizeof buf, "single-distance: re-evaluating sigma at %.0f nodes needs about %.3g exponentials",
                    nodes, work);
      throw BudgetError(buf);
    }
  }
  const auto series = series_over(ctx, m, K, t0, t1);
  SigmaFunction sigma_at;
  if (c.single_resample) sigma_at = [&](double t) { return surface_average(m, K, t, opts).sigma; };
  const auto r = single_distance_integrals(series, c.single_tau, lo, hi, sigma_at);
  Csv csv({"quantity", "s_or_tau", "range_lo", "range_hi", "value"});
  csv.row({"j0", num(c.single_tau), num(series.entries.front().t), num(series.entries.back().t), num(r.j0_integral)});
  csv.row({"oscillatory", num(c.single_tau), num(lo), num(hi), num(r.oscillatory)});
  ctx.write("mattila.csv", csv.text());
  ctx.say("j0 = " + num(r.j0_integral) + " (" + std::to_string(r.j0_nodes) + " nodes)");
  ctx.say("oscillatory = " + num(r.oscillatory) + " (" + std::to_string(r.oscillatory_nodes) + " nodes)");
}

// ---------------------------------------------------------------------------
// Report

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<AverageSeries> read_series(const fs::path& file, int d) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("report: cannot read " + file.string());
  std::string line;
  if (!std::getline(in, line) || line != "body,t,sigma,M,residual") {
    throw Error("report: " + file.string() + " has an unexpected header");
  }
  std::vector<std::string> order;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> data;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    try {
      if (cells.size() != 5) throw ConfigError("expected 5 columns");
      auto& [t, s] = data[cells[0]];
      if (t.empty()) order.push_back(cells[0]);
      t.push_back(to_double(cells[1]));
      s.push_back(to_double(cells[2]));
    } catch (const ConfigError& e) {
      throw Error("report: " + file.string() + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  std::vector<AverageSeries> out;
  for (const auto& body : order) {
    try {
      out.push_back(make_series(body, d, data[body].first, data[body].second));
    } catch (const DomainError& e) {
      throw Error("report: " + file.string() + ": " + e.what());
    }
  }
  return out;
}

void run_report(Context& ctx) {
  const fs::path in = ctx.cfg.report_in.empty() ? ctx.out : fs::path(ctx.cfg.report_in);
  const fs::path file = in / "sigma_series.csv";
  if (!fs::exists(file)) {
    throw Error("report: no series in " + in.string() +
                "; expected sigma_series.csv (written by the sigma, sigma-k, mattila and single-distance experiments)");
  }
  const int d = ctx.cfg.d;
  const double s = ctx.cfg.s;
  const auto all = read_series(file, d);
  const auto ref = reference_bounds(d, s);
  Csv csv({"body", "d", "s", "t_lo", "t_hi", "points", "beta_hat", "beta_stderr", "beta_ref", "gamma_ref",
           "d_minus_beta", "falconer_flag", "question2_beta", "question3_beta"});
  for (const auto& series : all) {
    ExponentFit fit;
    try {
      fit = fit_exponent(series, series.entries.front().t, series.entries.back().t);
    } catch (const DomainError& e) {
      throw Error("report: " + file.string() + " (" + series.body + "): " + e.what());
    }
    const auto flag = falconer_check(d, fit.beta, s);
    csv.row({series.body, num(static_cast<long long>(d)), num(s), num(series.entries.front().t),
             num(series.entries.back().t), num(static_cast<long long>(fit.points)), num(fit.beta), num(fit.stderr_),
             num(ref.beta_gnr), ref.gamma_muller ? num(*ref.gamma_muller) : std::string(), num(flag.d_minus_beta),
             flag.implies ? "true" : "false", num(0.5 * d), num(0.75)});
    ctx.say(series.body + ": beta_hat = " + num(fit.beta) + ", reference " + num(ref.beta_gnr) +
            ", d - beta_hat = " + num(flag.d_minus_beta) + (flag.implies ? " < s" : " >= s"));
  }
  ctx.extra["report_in"] = in.string();
  ctx.write("summary.csv", csv.text());
}

// The manifest next to a series knows its dimension and s; the report's own
// manifest then records the values it used.
ExperimentConfig resolve_report(const ExperimentConfig& cfg, const fs::path& out_dir) {
  ExperimentConfig out = cfg;
  const fs::path in = cfg.report_in.empty() ? out_dir : fs::path(cfg.report_in);
  if (!fs::exists(in / "manifest.json")) return out;
  try {
    std::ifstream mf(in / "manifest.json", std::ios::binary);
    const auto j = nlohmann::json::parse(mf);
    out.d = static_cast<int>(to_integer(j.at("config").at("d").get<std::string>()));
    out.s = to_double(j.at("config").at("s").get<std::string>());
  } catch (const std::exception& e) {
    throw Error("report: " + (in / "manifest.json").string() + " is corrupt: " + e.what());
  }
  return out;
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& requested, const fs::path& out_dir) {
  validate_config(requested);
  const ExperimentConfig cfg = requested.experiment == "report" ? resolve_report(requested, out_dir) : requested;
  validate_config(cfg);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir)) throw Error("cannot create output directory " + out_dir.string());
  Context ctx{cfg, out_dir, {}, nlohmann::ordered_json::object()};
  const auto& e = cfg.experiment;
  if (e == "gen") run_gen(ctx);
  else if (e == "sigma") run_sigma(ctx, false);
  else if (e == "sigma-k") run_sigma(ctx, true);
  else if (e == "caps") run_caps(ctx);
  else if (e == "lattice-count") run_lattice_count(ctx);
  else if (e == "distances") run_distances(ctx);
  else if (e == "incidences") run_incidences(ctx);
  else if (e == "mattila") run_mattila(ctx);
  else if (e == "single-distance") run_single_distance(ctx);
  else if (e == "report") run_report(ctx);

  nlohmann::ordered_json manifest;
  manifest["version"] = version();
  manifest["experiment"] = e;
  nlohmann::ordered_json conf = nlohmann::ordered_json::object();
  for (const auto& k : keys()) conf[k.name] = k.get(cfg);
  manifest["config"] = conf;
  for (auto it = ctx.extra.begin(); it != ctx.extra.end(); ++it) manifest[it.key()] = it.value();
  manifest["files"] = ctx.summary.files;
  std::ofstream mf(out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
  mf << manifest.dump(2) << '\n';
  if (!mf) throw Error("failed writing manifest.json");
  ctx.summary.files.push_back("manifest.json");
  return ctx.summary;
}

}  // namespace welldist
