#include "welldist/runner.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

int fail(const char* kind, const std::string& what, int code) {
  std::fprintf(stderr, "welldist: %s: %s\n", kind, what.c_str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace welldist;
  CLI::App app{"Spherical averages of Fourier transforms of Delone-set measures"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", version());

  std::string config_path, out_dir;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key=value file or manifest.json to replay");
  app.add_option("--out", out_dir, "output directory (default: $WELLDIST_OUT, else ./welldist_out)");
  app.add_option("--threads", threads, "worker thread cap; results do not depend on it")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--set", overrides, "override one key, e.g. --set q=32 (repeatable)");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gen", "write the truncated point set A_q"},
      {"sigma", "spherical averages over the boundary of the body"},
      {"sigma-k", "spherical averages over the boundary of the polar body"},
      {"caps", "cap decomposition of the half-dimensional sum"},
      {"lattice-count", "integer points on or near dilates of the body"},
      {"distances", "distinct distances and multiplicities of A_q"},
      {"incidences", "point/translated-sphere incidences within A_q"},
      {"mattila", "spectral energy and Mattila integral"},
      {"single-distance", "single-distance Bessel and oscillatory integrals"},
      {"report", "fit exponents from a sigma_series.csv and compare with references"},
      {"run", "run the experiment named in the configuration"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (command != "run") cfg.experiment = command;
    std::string extra;
    for (const auto& o : overrides) extra += o + "\n";
    cfg = parse_config(extra, cfg);
    if (seed) cfg.seed = *seed;
    if (threads) set_max_threads(*threads);
    if (out_dir.empty()) {
      const char* env = std::getenv("WELLDIST_OUT");
      out_dir = env && *env ? env : "welldist_out";
    }
    const auto summary = run_experiment(cfg, out_dir);
    for (const auto& line : summary.lines) std::cout << line << '\n';
    for (const auto& f : summary.files) std::cout << "wrote " << (std::filesystem::path(out_dir) / f).string() << '\n';
  } catch (const ConfigError& e) {
    return fail("config error", e.what(), 2);
  } catch (const BudgetError& e) {
    return fail("budget exceeded", e.what(), 3);
  } catch (const std::exception& e) {
    return fail("error", e.what(), 1);
  }
  return 0;
}
