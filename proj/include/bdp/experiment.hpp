#pragma once

/**
 * @file experiment.hpp
 * @brief Declarative experiment configs, the batch runner, and JSON / CSV reports.
 *
 * Configs are YAML. Every report embeds the normalized config as JSON, which is itself
 * valid YAML, so feeding the echo back reproduces the run bit for bit.
 *
 * Exit-code contract of the runner: 0 bound-holds, 1 bound-violated,
 * 2 hypothesis-unverified or a hypothesis failure during the run, 3 config error.
 */

#include "scenarios.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace bdp {

inline constexpr const char* kVersion = "1.0.0";

/// Unparseable or inconsistent config; carries the offending field and 1-based line.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, std::string field = {}, int line = 0)
      : Error(format(message, field, line)), field_(std::move(field)), line_(line) {}

  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& message, const std::string& field, int line) {
    std::string out = "config error";
    if (!field.empty()) out += " in field '" + field + "'";
    if (line > 0) out += " (line " + std::to_string(line) + ")";
    return out + ": " + message;
  }

  std::string field_;
  int line_;
};

enum class ExitCode : int { holds = 0, violated = 1, unverified = 2, config_error = 3 };

inline ExitCode exit_code(Verdict v) {
  switch (v) {
    case Verdict::bound_holds: return ExitCode::holds;
    case Verdict::bound_violated: return ExitCode::violated;
    case Verdict::hypothesis_unverified: return ExitCode::unverified;
  }
  return ExitCode::unverified;
}

struct OutputPaths {
  std::string dir = ".";
  std::string json = "report.json";
  std::string csv = "steps.csv";
  std::string plot = "plot.csv";
};

struct ExperimentConfig {
  Engine engine = Engine::main_thm;
  std::size_t samples = 64;
  int resolution = 512;
  ScenarioSpec scenario;
  /// Subintervals of I_0 (1D) or of the arc parameter of gamma_0; `halves` splits the domain.
  std::optional<std::pair<Interval, Interval>> subintervals;
  bool halves = false;
  std::optional<double> epsilon;
  double tolerance = 1e-9;
  bool accept_measured = true;
  OutputPaths output;
};

inline bool is_ratio_engine(Engine e) { return e == Engine::thm_2_2 || e == Engine::nbdp; }
inline bool is_1d_engine(Engine e) { return e == Engine::thm_2_1 || e == Engine::thm_2_2; }

inline Engine parse_engine(const std::string& s) {
  for (Engine e : {Engine::thm_2_1, Engine::thm_2_2, Engine::main_thm, Engine::nbdp, Engine::holder}) {
    if (s == to_string(e)) return e;
  }
  throw InputError("unknown engine '" + s + "' (known: thm-2.1, thm-2.2, main-thm, nbdp, holder)");
}

// =============================================================================
// YAML parsing
// =============================================================================

namespace detail {

inline int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

inline void check_keys(const YAML::Node& n, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!n.IsMap()) throw ConfigError("expected a mapping", path, line_of(n));
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "'", join(path, key), line_of(kv.first));
  }
}

inline double as_double(const YAML::Node& n, const std::string& path) {
  try {
    const double v = n.as<double>();
    if (!std::isfinite(v)) throw ConfigError("must be a finite number", path, line_of(n));
    return v;
  } catch (const YAML::Exception&) {
    throw ConfigError("expected a number", path, line_of(n));
  }
}

inline std::string as_string(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) throw ConfigError("expected a string", path, line_of(n));
  return n.as<std::string>();
}

inline std::uint64_t as_count(const YAML::Node& n, const std::string& path, std::uint64_t min_value) {
  if (!n.IsScalar()) throw ConfigError("expected a nonnegative integer", path, line_of(n));
  const std::string s = n.Scalar();
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError("expected a nonnegative integer", path, line_of(n));
  }
  std::uint64_t v = 0;
  try {
    v = std::stoull(s);
  } catch (const std::exception&) {
    throw ConfigError("integer out of range", path, line_of(n));
  }
  if (v < min_value) throw ConfigError("must be >= " + std::to_string(min_value), path, line_of(n));
  return v;
}

inline Vec as_vec(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence() || n.size() == 0) throw ConfigError("expected a nonempty list of numbers", path, line_of(n));
  Vec v(static_cast<Eigen::Index>(n.size()));
  for (std::size_t i = 0; i < n.size(); ++i) v[static_cast<Eigen::Index>(i)] = as_double(n[i], path + "[" + std::to_string(i) + "]");
  return v;
}

inline Interval as_interval(const YAML::Node& n, const std::string& path) {
  const Vec v = as_vec(n, path);
  if (v.size() != 2) throw ConfigError("expected [lo, hi]", path, line_of(n));
  if (!(v[0] < v[1])) throw ConfigError("need lo < hi", path, line_of(n));
  return Interval{v[0], v[1]};
}

inline BudgetConstant as_budget_constant(const YAML::Node& n, const std::string& path) {
  const double v = as_double(n, path);
  if (v < 0.0) throw ConfigError("must be nonnegative", path, line_of(n));
  return BudgetConstant{v, Provenance::analytic};
}

inline CurveSpec parse_curve(const YAML::Node& n, const std::string& path) {
  check_keys(n, path, {"kind", "from", "to", "center", "radius", "t0", "t1", "coefficients", "angle"});
  if (!n["kind"]) throw ConfigError("missing field 'kind'", join(path, "kind"), line_of(n));
  CurveSpec c;
  c.kind = as_string(n["kind"], join(path, "kind"));
  if (c.kind == "trace-surface") {
    c.t0 = 0.4;
    c.t1 = 0.6;
  }
  if (n["from"]) c.from = as_vec(n["from"], join(path, "from"));
  if (n["to"]) c.to = as_vec(n["to"], join(path, "to"));
  if (n["center"]) c.center = as_vec(n["center"], join(path, "center"));
  if (n["radius"]) c.radius = as_double(n["radius"], join(path, "radius"));
  if (n["t0"]) c.t0 = as_double(n["t0"], join(path, "t0"));
  if (n["t1"]) c.t1 = as_double(n["t1"], join(path, "t1"));
  if (n["angle"]) c.angle = as_double(n["angle"], join(path, "angle"));
  if (n["coefficients"]) {
    const auto& cs = n["coefficients"];
    const std::string p = join(path, "coefficients");
    if (!cs.IsSequence()) throw ConfigError("expected a list of vectors", p, line_of(cs));
    for (std::size_t i = 0; i < cs.size(); ++i) c.coefficients.push_back(as_vec(cs[i], p + "[" + std::to_string(i) + "]"));
  }
  return c;
}

inline CustomMapSpec parse_map(const YAML::Node& n, const std::string& path) {
  check_keys(n, path, {"name", "components", "bounds", "region"});
  CustomMapSpec m;
  if (n["name"]) m.name = as_string(n["name"], join(path, "name"));
  const auto& comps = n["components"];
  const std::string cp = join(path, "components");
  if (!comps) throw ConfigError("missing field 'components'", cp, line_of(n));
  if (!comps.IsSequence() || comps.size() == 0) throw ConfigError("expected a list of polynomials", cp, line_of(comps));
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const std::string pp = cp + "[" + std::to_string(c) + "]";
    if (!comps[c].IsSequence()) throw ConfigError("expected a list of monomials", pp, line_of(comps[c]));
    Polynomial poly;
    for (std::size_t k = 0; k < comps[c].size(); ++k) {
      const auto& mn = comps[c][k];
      const std::string mp = pp + "[" + std::to_string(k) + "]";
      check_keys(mn, mp, {"coefficient", "powers"});
      if (!mn["coefficient"] || !mn["powers"]) throw ConfigError("monomials need 'coefficient' and 'powers'", mp, line_of(mn));
      Monomial mono;
      mono.coefficient = as_double(mn["coefficient"], join(mp, "coefficient"));
      const auto& pw = mn["powers"];
      if (!pw.IsSequence() || pw.size() != comps.size()) {
        throw ConfigError("'powers' needs one exponent per coordinate", join(mp, "powers"), line_of(pw));
      }
      for (std::size_t i = 0; i < pw.size(); ++i) {
        mono.powers.push_back(static_cast<int>(as_count(pw[i], join(mp, "powers") + "[" + std::to_string(i) + "]", 0)));
      }
      poly.push_back(std::move(mono));
    }
    m.components.push_back(std::move(poly));
  }
  if (const auto& b = n["bounds"]) {
    const std::string bp = join(path, "bounds");
    check_keys(b, bp, {"c1", "c1_inv", "c2", "holder"});
    if (!b["c1"] || !b["c1_inv"] || !b["c2"]) throw ConfigError("bounds need c1, c1_inv and c2", bp, line_of(b));
    AnalyticBounds ab;
    ab.c1 = as_budget_constant(b["c1"], join(bp, "c1")).value;
    ab.c1_inv = as_budget_constant(b["c1_inv"], join(bp, "c1_inv")).value;
    ab.c2 = as_budget_constant(b["c2"], join(bp, "c2")).value;
    if (b["holder"]) {
      const double h = as_budget_constant(b["holder"], join(bp, "holder")).value;
      ab.holder = [h](double) { return h; };
    }
    m.bounds = ab;
  }
  if (const auto& r = n["region"]) {
    const std::string rp = join(path, "region");
    check_keys(r, rp, {"lower", "upper"});
    if (!r["lower"] || !r["upper"]) throw ConfigError("region needs 'lower' and 'upper'", rp, line_of(r));
    try {
      m.region = Box(as_vec(r["lower"], join(rp, "lower")), as_vec(r["upper"], join(rp, "upper")));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what(), rp, line_of(r));
    }
  }
  return m;
}

inline ScenarioSpec parse_scenario(const YAML::Node& n, const std::string& path) {
  check_keys(n, path, {"family", "n", "params", "interval", "curve", "budget", "maps"});
  ScenarioSpec s;
  if (!n["family"]) throw ConfigError("missing field 'family'", join(path, "family"), line_of(n));
  s.family = as_string(n["family"], join(path, "family"));
  if (n["n"]) s.n = as_count(n["n"], join(path, "n"), 1);
  if (const auto& p = n["params"]) {
    const std::string pp = join(path, "params");
    if (!p.IsMap()) throw ConfigError("expected a mapping of numbers", pp, line_of(p));
    for (const auto& kv : p) {
      const auto key = kv.first.as<std::string>();
      s.params[key] = as_double(kv.second, join(pp, key));
    }
  }
  if (n["interval"]) s.interval = as_interval(n["interval"], join(path, "interval"));
  if (n["curve"]) s.curve = parse_curve(n["curve"], join(path, "curve"));
  if (const auto& b = n["budget"]) {
    const std::string bp = join(path, "budget");
    check_keys(b, bp, {"C", "L", "alpha", "epsilon"});
    if (b["C"]) s.budget.C = as_budget_constant(b["C"], join(bp, "C"));
    if (b["L"]) s.budget.L = as_budget_constant(b["L"], join(bp, "L"));
    if (b["alpha"]) s.budget.alpha = as_budget_constant(b["alpha"], join(bp, "alpha"));
    if (b["epsilon"]) s.budget.epsilon = as_double(b["epsilon"], join(bp, "epsilon"));
  }
  if (const auto& ms = n["maps"]) {
    const std::string mp = join(path, "maps");
    if (!ms.IsSequence()) throw ConfigError("expected a list of maps", mp, line_of(ms));
    for (std::size_t i = 0; i < ms.size(); ++i) s.maps.push_back(parse_map(ms[i], mp + "[" + std::to_string(i) + "]"));
  }
  return s;
}

}  // namespace detail

/// Parses a YAML config. Structural and type errors raise ConfigError with the field
/// path and line; engine/scenario consistency is checked by validate_config.
inline ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, {}, e.mark.line + 1);
  }
  if (!root || root.IsNull()) throw ConfigError("empty config");
  detail::check_keys(root, "", {"engine", "samples", "resolution", "seed", "scenario", "subintervals", "epsilon",
                                "tolerance", "accept_measured", "output"});
  ExperimentConfig cfg;
  if (!root["engine"]) throw ConfigError("missing field 'engine'", "engine", 1);
  try {
    cfg.engine = parse_engine(detail::as_string(root["engine"], "engine"));
  } catch (const InputError& e) {
    throw ConfigError(e.what(), "engine", detail::line_of(root["engine"]));
  }
  if (root["samples"]) cfg.samples = detail::as_count(root["samples"], "samples", 2);
  if (root["resolution"]) {
    const auto r = detail::as_count(root["resolution"], "resolution", 2);
    if (r > 1u << 20) throw ConfigError("must be <= 1048576", "resolution", detail::line_of(root["resolution"]));
    cfg.resolution = static_cast<int>(r);
  }
  if (!root["scenario"]) throw ConfigError("missing field 'scenario'", "scenario", 1);
  cfg.scenario = detail::parse_scenario(root["scenario"], "scenario");
  if (root["seed"]) cfg.scenario.seed = detail::as_count(root["seed"], "seed", 0);
  if (const auto& sub = root["subintervals"]) {
    if (sub.IsScalar() && sub.Scalar() == "halves") {
      cfg.halves = true;
    } else if (sub.IsSequence() && sub.size() == 2) {
      cfg.subintervals = std::make_pair(detail::as_interval(sub[0], "subintervals[0]"),
                                        detail::as_interval(sub[1], "subintervals[1]"));
    } else {
      throw ConfigError("expected 'halves' or two intervals [[a1, b1], [a2, b2]]", "subintervals", detail::line_of(sub));
    }
  }
  if (root["epsilon"]) {
    cfg.epsilon = detail::as_double(root["epsilon"], "epsilon");
    if (!(*cfg.epsilon > 0.0 && *cfg.epsilon < 1.0)) {
      throw ConfigError("must lie in (0,1)", "epsilon", detail::line_of(root["epsilon"]));
    }
  }
  if (root["tolerance"]) {
    cfg.tolerance = detail::as_double(root["tolerance"], "tolerance");
    if (!(cfg.tolerance >= 0.0)) throw ConfigError("must be nonnegative", "tolerance", detail::line_of(root["tolerance"]));
  }
  if (root["accept_measured"]) {
    try {
      cfg.accept_measured = root["accept_measured"].as<bool>();
    } catch (const YAML::Exception&) {
      throw ConfigError("expected true or false", "accept_measured", detail::line_of(root["accept_measured"]));
    }
  }
  if (const auto& o = root["output"]) {
    detail::check_keys(o, "output", {"dir", "json", "csv", "plot"});
    if (o["dir"]) cfg.output.dir = detail::as_string(o["dir"], "output.dir");
    if (o["json"]) cfg.output.json = detail::as_string(o["json"], "output.json");
    if (o["csv"]) cfg.output.csv = detail::as_string(o["csv"], "output.csv");
    if (o["plot"]) cfg.output.plot = detail::as_string(o["plot"], "output.plot");
  }
  if (is_ratio_engine(cfg.engine) && !cfg.subintervals && !cfg.halves) {
    throw ConfigError(std::string("missing field 'subintervals' required by engine '") + to_string(cfg.engine) + "'",
                      "subintervals", 1);
  }
  if (cfg.engine == Engine::holder && !cfg.epsilon && !cfg.scenario.budget.epsilon) {
    throw ConfigError("missing field 'epsilon' required by engine 'holder'", "epsilon", 1);
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Builds the scenario and checks it against the engine; scenario errors become ConfigError.
inline Scenario validate_config(const ExperimentConfig& cfg) {
  Scenario sc;
  try {
    sc = build_sequence(cfg.scenario);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what(), "scenario");
  }
  if (is_1d_engine(cfg.engine) && !sc.interval) {
    throw ConfigError(std::string("engine '") + to_string(cfg.engine) + "' needs a 1D scenario with an interval",
                      "engine");
  }
  if (!is_1d_engine(cfg.engine) && !sc.curve) {
    throw ConfigError(std::string("engine '") + to_string(cfg.engine) + "' needs a scenario with a curve", "engine");
  }
  return sc;
}

// =============================================================================
// Running
// =============================================================================

struct ExperimentResult {
  ExperimentConfig config;
  BoundReport report;
  std::optional<LemmaCheckResult> lemmas;
  std::vector<int> word;
  std::vector<std::string> scenario_notes;
  std::string json;
  std::string steps_csv;
  std::string plot_csv;

  ExitCode exit_code() const { return bdp::exit_code(report.verdict); }
};

namespace detail {

/// 17 significant digits; non-finite values become strings in JSON.
inline std::string fmt17(double x) { return fmt::format("{:.17g}", x); }

inline nlohmann::ordered_json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

inline nlohmann::ordered_json vec_json(const Vec& v) {
  auto a = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

inline nlohmann::ordered_json constant_json(const std::optional<BudgetConstant>& c) {
  if (!c) return nullptr;
  return {{"value", num(c->value)}, {"provenance", to_string(c->provenance)}};
}

}  // namespace detail

/// The normalized config as JSON (output paths excluded). Valid YAML input for parse_config.
inline nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
  using detail::num;
  using detail::vec_json;
  nlohmann::ordered_json j;
  j["engine"] = to_string(cfg.engine);
  j["samples"] = cfg.samples;
  j["resolution"] = cfg.resolution;
  j["seed"] = cfg.scenario.seed;
  j["tolerance"] = num(cfg.tolerance);
  j["accept_measured"] = cfg.accept_measured;
  if (cfg.epsilon) j["epsilon"] = num(*cfg.epsilon);
  if (cfg.halves) j["subintervals"] = "halves";
  if (cfg.subintervals) {
    j["subintervals"] = {{num(cfg.subintervals->first.lo), num(cfg.subintervals->first.hi)},
                         {num(cfg.subintervals->second.lo), num(cfg.subintervals->second.hi)}};
  }
  const auto& s = cfg.scenario;
  nlohmann::ordered_json sj;
  sj["family"] = s.family;
  sj["n"] = s.n;
  if (!s.params.empty()) {
    nlohmann::ordered_json p = nlohmann::ordered_json::object();
    for (const auto& [k, v] : s.params) p[k] = num(v);
    sj["params"] = p;
  }
  if (s.interval) sj["interval"] = {num(s.interval->lo), num(s.interval->hi)};
  if (s.curve) {
    const auto& c = *s.curve;
    nlohmann::ordered_json cj;
    cj["kind"] = c.kind;
    if (c.kind == "segment") {
      cj["from"] = vec_json(c.from);
      cj["to"] = vec_json(c.to);
    } else if (c.kind == "circle-arc") {
      cj["center"] = vec_json(c.center);
      cj["radius"] = num(c.radius);
    } else if (c.kind == "polynomial") {
      cj["coefficients"] = nlohmann::ordered_json::array();
      for (const auto& v : c.coefficients) cj["coefficients"].push_back(vec_json(v));
    } else if (c.kind == "trace-surface") {
      cj["angle"] = num(c.angle);
    }
    if (c.kind != "segment") {
      cj["t0"] = num(c.t0);
      cj["t1"] = num(c.t1);
    }
    sj["curve"] = cj;
  }
  const auto& b = s.budget;
  if (b.C || b.L || b.alpha || b.epsilon) {
    nlohmann::ordered_json bj = nlohmann::ordered_json::object();
    if (b.C) bj["C"] = num(b.C->value);
    if (b.L) bj["L"] = num(b.L->value);
    if (b.alpha) bj["alpha"] = num(b.alpha->value);
    if (b.epsilon) bj["epsilon"] = num(*b.epsilon);
    sj["budget"] = bj;
  }
  if (!s.maps.empty()) {
    sj["maps"] = nlohmann::ordered_json::array();
    for (const auto& m : s.maps) {
      nlohmann::ordered_json mj;
      mj["name"] = m.name;
      mj["components"] = nlohmann::ordered_json::array();
      for (const auto& poly : m.components) {
        auto pj = nlohmann::ordered_json::array();
        for (const auto& mono : poly) pj.push_back({{"coefficient", num(mono.coefficient)}, {"powers", mono.powers}});
        mj["components"].push_back(pj);
      }
      if (m.bounds) {
        mj["bounds"] = {{"c1", num(m.bounds->c1)}, {"c1_inv", num(m.bounds->c1_inv)}, {"c2", num(m.bounds->c2)}};
        if (m.bounds->holder) mj["bounds"]["holder"] = num(m.bounds->holder(0.5));
      }
      if (m.region) mj["region"] = {{"lower", vec_json(m.region->lower)}, {"upper", vec_json(m.region->upper)}};
      sj["maps"].push_back(mj);
    }
  }
  j["scenario"] = sj;
  return j;
}

inline std::string steps_csv(const BoundReport& rep) {
  std::string out = "step_index,length_i,alpha_i,lemma1_increment,lemma2_increment,cumulative_log_bound\n";
  double cumulative = 0.0;
  for (std::size_t i = 0; i < rep.trace.steps.size(); ++i) {
    const auto& s = rep.trace.steps[i];
    cumulative += s.budget_term;
    out += fmt::format("{},{},{},{},{},{}\n", i, detail::fmt17(s.length), detail::fmt17(s.alpha),
                       detail::fmt17(s.lemma1_increment), detail::fmt17(s.lemma2_increment), detail::fmt17(cumulative));
  }
  return out;
}

/// Sample parameter against log |F_n'(x)| / |F_n'(x_0)| (or the tangent-norm analogue).
inline std::string plot_csv(const BoundReport& rep) {
  std::string out = "parameter,log_ratio\n";
  const auto& tr = rep.trace;
  for (std::size_t k = 0; k < tr.sample_params.size(); ++k) {
    out += fmt::format("{},{}\n", detail::fmt17(tr.sample_params[k]),
                       detail::fmt17(tr.final_log_norms[k] - tr.final_log_norms.front()));
  }
  return out;
}

inline std::string report_json(const ExperimentResult& r) {
  using detail::num;
  const auto& rep = r.report;
  nlohmann::ordered_json j;
  j["tool"] = {{"name", "bdp"},
               {"version", kVersion},
               {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)}};
  j["config"] = config_to_json(r.config);
  j["seed"] = r.config.scenario.seed;
  j["engine"] = to_string(rep.engine);
  j["scenario"] = {{"family", r.config.scenario.family}, {"n", rep.trace.n}};
  if (!r.word.empty()) j["scenario"]["word"] = word_string(r.word);
  j["verdict"] = to_string(rep.verdict);
  j["empirical"] = num(rep.empirical);
  j["theoretical_log_K"] = num(rep.theoretical_log_K);
  j["K"] = num(rep.K());
  j["slack"] = num(rep.slack());
  j["tolerance"] = num(rep.tolerance);
  j["quadrature_allowance"] = num(rep.quadrature_allowance);
  j["budget"] = {{"C", detail::constant_json(rep.budget.C)},
                 {"L", detail::constant_json(rep.budget.L)},
                 {"alpha", detail::constant_json(rep.budget.alpha)},
                 {"epsilon", rep.budget.epsilon ? num(*rep.budget.epsilon) : nullptr}};
  j["measured"] = {{"sum_L", num(rep.trace.sum_L)},
                   {"sum_alpha", num(rep.trace.sum_alpha)},
                   {"sum_length_terms", num(rep.trace.sum_length_terms)},
                   {"length_exponent", num(rep.trace.length_exponent)},
                   {"sup_abs_log_ratio", num(rep.trace.sup_abs_log_ratio)},
                   {"C_sampled", rep.measured_C ? num(*rep.measured_C) : nullptr}};
  if (rep.ratio) {
    const auto& rc = *rep.ratio;
    j["ratio"] = {{"ratio", num(rc.ratio)}, {"r", num(rc.r)},         {"lower", num(rc.lower)},
                  {"upper", num(rc.upper)}, {"length1", num(rc.length1)}, {"length2", num(rc.length2)}};
  } else {
    j["ratio"] = nullptr;
  }
  if (r.lemmas) {
    nlohmann::ordered_json lj;
    lj["passed"] = r.lemmas->passed();
    if (r.lemmas->first_violation) {
      const auto& v = *r.lemmas->first_violation;
      lj["first_violation"] = {{"step", v.step}, {"x_index", v.x_index}, {"y_index", v.y_index},
                               {"lemma", v.lemma}, {"lhs", num(v.lhs)},   {"rhs", num(v.rhs)}};
    } else {
      lj["first_violation"] = nullptr;
    }
    lj["steps"] = nlohmann::ordered_json::array();
    for (const auto& s : r.lemmas->steps) {
      lj["steps"].push_back({{"step", s.step},
                             {"lemma1_ok", s.lemma1_ok},
                             {"lemma2_ok", s.lemma2_ok},
                             {"lemma1_slack", num(s.lemma1_slack)},
                             {"lemma2_slack", num(s.lemma2_slack)}});
    }
    j["lemma_checks"] = lj;
  } else {
    j["lemma_checks"] = nullptr;
  }
  j["steps"] = nlohmann::ordered_json::array();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < rep.trace.steps.size(); ++i) {
    const auto& s = rep.trace.steps[i];
    cumulative += s.budget_term;
    j["steps"].push_back({{"step_index", i},
                          {"length", num(s.length)},
                          {"length_error", num(s.length_error)},
                          {"alpha", num(s.alpha)},
                          {"lemma1_increment", num(s.lemma1_increment)},
                          {"lemma2_increment", num(s.lemma2_increment)},
                          {"cumulative_log_bound", num(cumulative)}});
  }
  auto notes = nlohmann::ordered_json::array();
  for (const auto& n : r.scenario_notes) notes.push_back(n);
  for (const auto& n : rep.notes) notes.push_back(n);
  j["notes"] = notes;
  return j.dump(2) + "\n";
}

/// Runs the configured engine. Throws ConfigError for config problems and the engine's
/// errors (HypothesisViolation, OutOfRegionError, ...) for failures during the run.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const Scenario sc = validate_config(cfg);
  ExperimentResult out;
  out.config = cfg;
  out.word = sc.word;
  out.scenario_notes = sc.notes;
  VerdictPolicy policy;
  policy.tolerance = cfg.tolerance;
  policy.accept_measured = cfg.accept_measured;
  const std::optional<double> eps = cfg.epsilon ? cfg.epsilon : cfg.scenario.budget.epsilon;

  auto subintervals = [&](double lo, double hi) -> std::pair<Interval, Interval> {
    if (cfg.halves) {
      const double mid = lo + (hi - lo) / 2.0;
      return {Interval{lo, mid}, Interval{mid, hi}};
    }
    return *cfg.subintervals;
  };
  auto wrap_input = [](auto&& fn) {
    try {
      return fn();
    } catch (const InputError& e) {
      throw ConfigError(e.what(), "subintervals");
    }
  };

  if (is_1d_engine(cfg.engine)) {
    const HypothesisBudget budget = sc.budget();
    if (cfg.engine == Engine::thm_2_1) {
      out.report = run_1d(sc.maps, *sc.interval, cfg.samples, budget, policy);
    } else {
      const auto [s1, s2] = subintervals(sc.interval->lo, sc.interval->hi);
      out.report = wrap_input([&] { return interval_ratio_1d(sc.maps, *sc.interval, s1, s2, cfg.samples, budget, policy); });
    }
  } else {
    const NaturalCurve gamma0 = reparameterize_natural(*sc.curve, cfg.resolution);
    if (cfg.engine == Engine::main_thm) {
      out.report = run_curve(sc.maps, gamma0, cfg.samples, cfg.resolution, sc.budget(), policy);
    } else if (cfg.engine == Engine::holder) {
      out.report = run_curve_holder(sc.maps, gamma0, cfg.samples, cfg.resolution, sc.budget(eps), policy);
    } else {
      const auto [s1, s2] = subintervals(0.0, gamma0.total_length());
      const HypothesisBudget budget = eps ? sc.budget(eps) : sc.budget();
      out.report = wrap_input(
          [&] { return arc_ratio_curve(sc.maps, gamma0, s1, s2, cfg.samples, cfg.resolution, budget, policy); });
    }
    out.lemmas = lemma_step_checks(out.report, sc.maps, cfg.tolerance);
  }
  out.json = report_json(out);
  out.steps_csv = steps_csv(out.report);
  out.plot_csv = plot_csv(out.report);
  return out;
}

/// Writes report JSON and (unless json_only) the per-step and plot CSVs.
inline std::vector<std::filesystem::path> write_outputs(const ExperimentResult& r, bool json_only = false) {
  namespace fs = std::filesystem;
  const fs::path dir(r.config.output.dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message(), "output.dir");
  std::vector<fs::path> written;
  auto write = [&](const std::string& name, const std::string& content) {
    const fs::path p = dir / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + p.string() + "'", "output");
    f << content;
    written.push_back(p);
  };
  write(r.config.output.json, r.json);
  if (!json_only) {
    write(r.config.output.csv, r.steps_csv);
    write(r.config.output.plot, r.plot_csv);
  }
  return written;
}

}  // namespace bdp
