// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any criterion fails.

#include "bdp/experiment.hpp"
#include "support.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

using namespace bdp;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string config_path(const std::string& name) { return std::string(BDP_CONFIG_DIR) + "/" + name; }

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + BDP_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentResult run_config(const std::string& name) { return run_experiment(load_config(config_path(name))); }

// ----------------------------------------------------------------------------- criteria

Outcome jets() {
  Outcome o;
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  const int maps = 200;
  for (int trial = 0; trial < maps; ++trial) {
    const int d = 1 + trial % 3;
    const SmoothMap f = polynomial_map(test::random_polynomial(rng, d, 4));
    const Vec x = test::random_vec(rng, d), u = test::random_unit(rng, d), v = test::random_unit(rng, d);
    const Jet2 fd = fd_oracle(f, x, u, v);
    worst = std::max({worst, test::rel_err(push_jet1(f, x, v).deriv, fd.first),
                      test::rel_err(push_jet2(f, x, u, v).second, fd.second)});
  }
  o.require(worst <= 1e-6, fmt::format("max relative error {:.3g} > 1e-6", worst));
  o.detail = o.ok ? fmt::format("{} maps, max relative error {:.3g}", maps, worst) : o.detail;
  return o;
}

Outcome inverse_norm_lower_bound() {
  Outcome o;
  std::mt19937_64 rng(32);
  double worst = -1e300;
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 4;
    Mat A(d, d);
    do {
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) A(i, j) = test::uniform(rng, -2, 2);
    } while (std::abs(A.determinant()) < 1e-3);
    const Vec v = test::random_unit(rng, d) * test::uniform(rng, 0.1, 10);
    worst = std::max(worst, v.norm() / (A * v).norm() - inverse_operator_norm(A));
  }
  o.require(worst <= 1e-12, fmt::format("max excess {:.3g}", worst));
  if (o.ok) o.detail = fmt::format("200 matrices, max of |v|/|Av| - |A^-1| = {:.3g}", worst);
  return o;
}

Outcome curve_functionals() {
  Outcome o;
  const ParamCurve half = circle_arc(Vec::Zero(2), 1.0, 0.0, pi);
  const double len = length(half, 10000);
  o.require(std::abs(len - pi) <= 1e-6, fmt::format("half-circle length {:.17g}", len));
  const double seg_angle = max_angle(segment_curve(Vec{{0.0, 0.0}}, Vec{{1.0, 2.0}}), 1000);
  o.require(seg_angle == 0.0, fmt::format("segment max_angle {:.3g}", seg_angle));
  const double half_angle = max_angle(half, 1000);
  o.require(std::abs(half_angle - pi) <= 1e-3, fmt::format("half-circle max_angle {:.17g}", half_angle));
  double worst_speed = 0.0, worst_len = 0.0;
  const ParamCurve parabola(
      -1.0, 1.0, [](double t) -> Vec { return Vec{{t, t * t}}; }, [](double t) -> Vec { return Vec{{1.0, 2 * t}}; });
  for (const ParamCurve& c : {half, parabola}) {
    const NaturalCurve n = reparameterize_natural(c, 2048);
    const double L = n.total_length(), h = 1e-5;
    for (int k = 1; k < 1000; ++k) {
      const double s = L * k / 1000.0;
      worst_speed = std::max(worst_speed, std::abs(n.tangent(s).norm() - 1.0));
      // differenced positions, independent of the stored tangents
      const double fd = (n.position(s + h) - n.position(s - h)).norm() / (2 * h);
      worst_speed = std::max(worst_speed, std::abs(fd - 1.0));
    }
    worst_len = std::max(worst_len, std::abs(length(n.as_param_curve(), 4096) / length(c, 4096) - 1.0));
  }
  o.require(worst_speed <= 1e-4, fmt::format("unit-speed deviation {:.3g}", worst_speed));
  o.require(worst_len <= 1e-6, fmt::format("relative length change {:.3g}", worst_len));
  if (o.ok) {
    o.detail = fmt::format("length error {:.2g}, half-circle angle error {:.2g}, speed deviation {:.2g}",
                           std::abs(len - pi), std::abs(half_angle - pi), worst_speed);
  }
  return o;
}

Outcome quadratic_1d_at_scale() {
  Outcome o;
  ScenarioSpec spec;
  spec.family = "1d-quadratic-contraction";
  std::map<std::size_t, double> emp;
  for (std::size_t n : {1, 10, 100, 1000}) {
    spec.n = n;
    const Scenario sc = build_sequence(spec);
    const HypothesisBudget b = sc.budget();
    o.require(b.C->value == 0.5 && b.L->value == 4.0 && b.C->provenance == Provenance::analytic &&
                  b.L->provenance == Provenance::analytic,
              "budget is not analytic C = 1/2, L = 4");
    const auto r = run_1d(sc.maps, *sc.interval, 1000, b);
    emp[n] = r.empirical;
    o.require(r.empirical <= 2.0, fmt::format("n = {}: empirical {:.17g} > 2", n, r.empirical));
    o.require(r.verdict == Verdict::bound_holds, fmt::format("n = {}: verdict {}", n, to_string(r.verdict)));
  }
  const double plateau = std::abs(emp[1000] - emp[100]);
  o.require(plateau < 1e-6, fmt::format("plateau difference {:.3g}", plateau));
  if (o.ok) o.detail = fmt::format("empirical at n = 1000: {:.12f} <= 2, |n=1000 - n=100| = {:.3g}", emp[1000], plateau);
  return o;
}

Outcome quadratic_1d_ratio() {
  using Big = boost::multiprecision::cpp_bin_float_50;
  Outcome o;
  const auto res = run_config("quadratic_1d_ratio.yaml");
  const auto& r = res.report;
  auto orbit = [](Big x) {
    for (int j = 0; j < 50; ++j) x = x / 2 + x * x / 8;
    return x;
  };
  const Big half("0.5");
  const double oracle = static_cast<double>((orbit(half) - orbit(Big(0))) / (orbit(Big(1)) - orbit(half)));
  o.require(r.ratio.has_value() && r.trace.n == 50, "missing ratio or wrong n");
  if (!o.ok) return o;
  const double q = r.ratio->ratio, rr = r.ratio->r;
  o.require(rr == 1.0, fmt::format("r = {}", rr));
  o.require(q >= rr * std::exp(-4.0) && q <= rr * std::exp(4.0), fmt::format("ratio {:.17g} outside [e^-4, e^4]", q));
  o.require(std::abs(q - oracle) <= 1e-9 * oracle, fmt::format("ratio {:.17g} vs oracle {:.17g}", q, oracle));
  if (o.ok) o.detail = fmt::format("ratio {:.12f} in [{:.4f}, {:.4f}], |ratio - oracle| = {:.2g}", q, std::exp(-4.0),
                                   std::exp(4.0), std::abs(q - oracle));
  return o;
}

Outcome rotations_exact() {
  Outcome o;
  std::mt19937_64 rng(6);
  double worst = 0.0;
  for (std::size_t n : {1, 10, 50, 100}) {
    std::vector<SmoothMap> maps;
    for (std::size_t i = 0; i < n; ++i) maps.push_back(rotation_map(test::uniform(rng, -pi, pi)));
    const MapSequence seq(maps);
    const NaturalCurve g = reparameterize_natural(segment_curve(Vec{{-0.3, 0.2}}, Vec{{0.7, -0.4}}), 256);
    const auto r = run_curve(seq, g, 64, 256, HypothesisBudget::analytic(1.0, n * g.total_length(), 0.0));
    worst = std::max(worst, r.empirical);
    for (const auto& s : r.trace.steps) worst = std::max({worst, s.alpha, s.lemma1_increment, s.lemma2_increment});
    o.require(r.verdict == Verdict::bound_holds, fmt::format("n = {}: verdict {}", n, to_string(r.verdict)));
    o.require(lemma_step_checks(r, seq).passed(), fmt::format("n = {}: lemma checks failed", n));
  }
  o.require(worst <= 1e-12, fmt::format("max of ratio, alpha_i, increments {:.3g}", worst));
  if (o.ok) o.detail = fmt::format("n in 1..100, max of log ratio, alpha_i, lemma increments = {:.3g}", worst);
  return o;
}

struct ShearRun {
  ExperimentResult result;
  std::string error;
};

ShearRun& shear_main() {
  static ShearRun run = [] {
    ShearRun r;
    try {
      r.result = run_config("shear_main.yaml");
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    return r;
  }();
  return run;
}

Outcome shear_curve_distortion() {
  Outcome o;
  const auto& run = shear_main();
  o.require(run.error.empty(), run.error);
  if (!o.ok) return o;
  const auto& r = run.result.report;
  o.require(r.trace.n == 20, "expected 20 maps");
  o.require(r.budget.C->provenance == Provenance::analytic && r.budget.L->provenance == Provenance::analytic &&
                r.budget.alpha->provenance == Provenance::analytic,
            "budget not analytic");
  const double C = r.budget.C->value;
  const double bound = C * C * (r.budget.alpha->value + r.budget.L->value);
  o.require(r.empirical <= bound, fmt::format("empirical {:.6g} > C^2 (alpha + L) = {:.6g}", r.empirical, bound));
  o.require(r.slack() > 0.0, fmt::format("slack {:.3g}", r.slack()));
  o.require(r.verdict == Verdict::bound_holds, "verdict " + std::string(to_string(r.verdict)));
  o.require(run.result.lemmas && run.result.lemmas->passed() && run.result.lemmas->steps.size() == 20,
            "lemma_step_checks failed");
  if (o.ok) {
    o.detail = fmt::format("empirical {:.6g} <= log K {:.6g}, slack {:.6g}, lemma checks pass at all 20 steps",
                           r.empirical, r.theoretical_log_K, r.slack());
  }
  return o;
}

Outcome telescoping() {
  Outcome o;
  const auto& run = shear_main();
  o.require(run.error.empty(), run.error);
  if (!o.ok) return o;
  const auto& r = run.result.report;
  double sum = 0.0;
  for (const auto& s : r.trace.steps) sum += s.lemma1_increment + s.lemma2_increment;
  o.require(r.empirical <= sum + 1e-9, fmt::format("empirical {:.17g} > telescoped sum {:.17g}", r.empirical, sum));
  if (o.ok) o.detail = fmt::format("empirical {:.6g} <= sum of increments {:.6g}", r.empirical, sum);
  return o;
}

Outcome holder_variant() {
  Outcome o;
  const auto res = run_config("shear_holder.yaml");
  const auto& r = res.report;
  o.require(r.engine == Engine::holder && r.budget.epsilon == 0.5, "not the epsilon = 1/2 engine");
  o.require(r.budget.C->provenance == Provenance::analytic, "Holder constant not analytic");
  o.require(r.verdict == Verdict::bound_holds, "verdict " + std::string(to_string(r.verdict)));
  if (o.ok) o.detail = fmt::format("empirical {:.6g} <= log K {:.6g}", r.empirical, r.theoretical_log_K);
  return o;
}

Outcome arc_ratio() {
  Outcome o;
  const auto res = run_config("shear_arc_ratio.yaml");
  const auto& r = res.report;
  o.require(r.ratio.has_value(), "no ratio");
  if (!o.ok) return o;
  const double C = r.budget.C->value;
  const double K = std::exp(2.0 * C * C * (r.budget.alpha->value + r.budget.L->value));
  const double q = r.ratio->ratio, rr = r.ratio->r;
  o.require(q >= rr / K && q <= rr * K, fmt::format("ratio {:.17g} outside [r/K, rK], r = {:.17g}, K = {}", q, rr, K));
  o.require(r.verdict == Verdict::bound_holds, "verdict " + std::string(to_string(r.verdict)));
  if (o.ok) {
    o.detail = fmt::format("ratio {:.6g}, r = {:.6g}, log K = {:.6g} (K = {})", q, rr, 2.0 * C * C *
                           (r.budget.alpha->value + r.budget.L->value), K);
  }
  return o;
}

Outcome sturmian_trace() {
  Outcome o;
  const auto res = run_config("unverified.yaml");
  const auto& r = res.report;
  const std::size_t n = res.config.scenario.n;
  o.require(r.trace.steps.size() == n, "per-step table incomplete");
  std::size_t csv_rows = static_cast<std::size_t>(std::count(res.steps_csv.begin(), res.steps_csv.end(), '\n')) - 1;
  o.require(csv_rows == n, fmt::format("{} CSV rows for n = {}", csv_rows, n));
  for (const auto& s : r.trace.steps) {
    o.require(std::isfinite(s.length) && std::isfinite(s.alpha) && std::isfinite(s.lemma1_increment) &&
                  std::isfinite(s.lemma2_increment),
              "non-finite step entry");
  }
  o.require(r.verdict == Verdict::hypothesis_unverified, "verdict " + std::string(to_string(r.verdict)));
  o.require(r.budget.C->provenance == Provenance::sampled, "C not sampled");
  const Scenario sc = build_sequence(res.config.scenario);
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double a = test::uniform(rng, -3, 3), b = test::uniform(rng, -3, 3);
    for (const auto& p : apply_sequence(sc.maps, Vec{{std::cos(a), std::cos(b), std::cos(a - b)}})) {
      worst = std::max(worst, std::abs(trace_invariant(p)));
    }
  }
  o.require(worst <= 1e-10, fmt::format("invariant drift {:.3g}", worst));
  if (o.ok) {
    o.detail = fmt::format("word {}, {} steps reported, invariant drift {:.2g}, verdict {}", word_string(res.word), n,
                           worst, to_string(r.verdict));
  }
  return o;
}

Outcome cli_determinism() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "bdp_acceptance_cli";
  fs::remove_all(base);
  for (const char* cfg : {"quadratic_1d.yaml", "shear_main.yaml"}) {
    const fs::path a = base / "a", b = base / "b";
    const int ca = run_cli("run \"" + config_path(cfg) + "\" --output-dir \"" + a.string() + "\"");
    const int cb = run_cli("run \"" + config_path(cfg) + "\" --output-dir \"" + b.string() + "\"");
    o.require(ca == 0 && cb == 0, fmt::format("{}: exit codes {} and {}", cfg, ca, cb));
    for (const char* file : {"report.json", "steps.csv", "plot.csv"}) {
      const std::string x = read_file(a / file), y = read_file(b / file);
      o.require(!x.empty() && x == y, fmt::format("{}: {} differs between runs", cfg, file));
    }
    fs::remove_all(base);
  }
  const std::pair<const char*, int> canned[] = {
      {"holds.yaml", 0}, {"violated.yaml", 1}, {"unverified.yaml", 2}, {"config_error.yaml", 3}};
  std::string codes;
  for (const auto& [cfg, expected] : canned) {
    const int code = run_cli("run \"" + config_path(cfg) + "\" --output-dir \"" + (base / "canned").string() + "\"");
    o.require(code == expected, fmt::format("{}: exit {} (expected {})", cfg, code, expected));
    codes += fmt::format("{}{}={}", codes.empty() ? "" : ", ", cfg, code);
  }
  fs::remove_all(base);
  if (o.ok) o.detail = "byte-identical JSON and CSV across runs; exit codes " + codes;
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {1, "jet correctness", 10, jets},
      {2, "inverse-norm lower bound", 1, inverse_norm_lower_bound},
      {3, "curve functionals", 5, curve_functionals},
      {4, "1D distortion at scale", 60, quadratic_1d_at_scale},
      {5, "1D interval ratio", 10, quadratic_1d_ratio},
      {6, "rotations are distortion free", 10, rotations_exact},
      {7, "curve distortion, nonlinear", 60, shear_curve_distortion},
      {8, "telescoping", 60, telescoping},
      {9, "Holder variant", 60, holder_variant},
      {10, "arc-length ratio", 60, arc_ratio},
      {11, "Sturmian trace maps", 60, sturmian_trace},
      {12, "CLI determinism and exit codes", 120, cli_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_seconds) {
      o.ok = false;
      o.detail += fmt::format("{}runtime {:.2f} s exceeds {} s", o.detail.empty() ? "" : "; ", secs, c.budget_seconds);
    }
    failures += o.ok ? 0 : 1;
    std::cout << fmt::format("{} criterion {}: {} ({:.2f} s): {}\n", o.ok ? "PASS" : "FAIL", c.id, c.name, secs,
                             o.detail);
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
