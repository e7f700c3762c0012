// Batch runner: `bdp run <config>`, `bdp check <config>`, `bdp list-scenarios`.

#include "bdp/experiment.hpp"

#include <fmt/core.h>

#include <iostream>

#include "CLI11.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::string> output_dir;
  std::optional<std::size_t> samples;
  std::optional<int> resolution;
  std::optional<std::uint64_t> seed;
  bool json_only = false;
};

bdp::ExperimentConfig load(const Overrides& o) {
  bdp::ExperimentConfig cfg = bdp::load_config(o.config_path);
  if (o.output_dir) cfg.output.dir = *o.output_dir;
  if (o.samples) cfg.samples = *o.samples;
  if (o.resolution) cfg.resolution = *o.resolution;
  if (o.seed) cfg.scenario.seed = *o.seed;
  return cfg;
}

int run(const Overrides& o) {
  const bdp::ExperimentConfig cfg = load(o);
  const bdp::ExperimentResult r = bdp::run_experiment(cfg);
  const auto files = bdp::write_outputs(r, o.json_only);
  const auto& rep = r.report;
  fmt::print("engine {}  family {}  n {}\n", bdp::to_string(rep.engine), cfg.scenario.family, rep.trace.n);
  fmt::print("empirical {:.17g}  log K {:.17g}  verdict {}\n", rep.empirical, rep.theoretical_log_K,
             bdp::to_string(rep.verdict));
  if (r.lemmas) fmt::print("per-step lemma checks: {}\n", r.lemmas->passed() ? "pass" : "fail");
  for (const auto& f : files) fmt::print("wrote {}\n", f.string());
  return static_cast<int>(r.exit_code());
}

int check(const Overrides& o) {
  const bdp::ExperimentConfig cfg = load(o);
  const bdp::Scenario sc = bdp::validate_config(cfg);
  fmt::print("config ok: engine {}, family {}, n {}, dimension {}\n", bdp::to_string(cfg.engine), cfg.scenario.family,
             sc.maps.size(), sc.maps.dimension());
  return 0;
}

int list_scenarios() {
  for (const auto& f : bdp::scenario_families()) {
    fmt::print("{}  (dimension {}{})\n  {}\n", f.name, f.dimension == 0 ? std::string("any") : std::to_string(f.dimension),
               f.seeded ? ", seeded" : "", f.description);
    for (const auto& p : f.params) fmt::print("    {:<10} default {:<10.6g} {}\n", p.name, p.default_value, p.help);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounded distortion experiments for nonstationary map compositions"};
  app.require_subcommand(1);
  Overrides o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", o.config_path, "YAML experiment config")->required();
    sub->add_option("--output-dir", o.output_dir, "directory for report files");
    sub->add_option("--samples", o.samples, "sample points per run")->check(CLI::Range(2, 1 << 20));
    sub->add_option("--resolution", o.resolution, "quadrature / curve resolution")->check(CLI::Range(2, 1 << 20));
    sub->add_option("--seed", o.seed, "scenario seed");
  };
  CLI::App* run_cmd = app.add_subcommand("run", "run an experiment");
  add_common(run_cmd);
  run_cmd->add_flag("--json-only", o.json_only, "write only the JSON report");
  CLI::App* check_cmd = app.add_subcommand("check", "validate a config without running it");
  add_common(check_cmd);
  CLI::App* list_cmd = app.add_subcommand("list-scenarios", "list builtin scenario families");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(bdp::ExitCode::config_error);
  }

  try {
    if (run_cmd->parsed()) return run(o);
    if (check_cmd->parsed()) return check(o);
    if (list_cmd->parsed()) return list_scenarios();
  } catch (const bdp::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return static_cast<int>(bdp::ExitCode::config_error);
  } catch (const bdp::HypothesisViolation& e) {
    std::cerr << "hypothesis violated at step " << e.step() << ": " << e.what() << "\n";
    return static_cast<int>(bdp::ExitCode::unverified);
  } catch (const bdp::OutOfRegionError& e) {
    std::cerr << "hypothesis failure";
    if (e.step()) std::cerr << " at step " << *e.step();
    std::cerr << ": " << e.what() << "\n";
    return static_cast<int>(bdp::ExitCode::unverified);
  } catch (const bdp::Error& e) {
    std::cerr << "hypothesis failure: " << e.what() << "\n";
    return static_cast<int>(bdp::ExitCode::unverified);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(bdp::ExitCode::unverified);
  }
  return static_cast<int>(bdp::ExitCode::config_error);
}
