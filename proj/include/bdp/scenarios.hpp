#pragma once

/**
 * @file scenarios.hpp
 * @brief Reproducible map sequences, initial intervals / curves, and analytic budgets.
 *
 * Families
 * --------
 *  - 1d-quadratic-contraction   f(x) = a x + b x^2 on [0, 1], n copies
 *  - 1d-random-quadratic        f_j(x) = a_j x + b_j x^2 + c_j, seeded
 *  - planar-rotations           rotations by a fixed angle
 *  - planar-affine              A_j = R(t1) diag(s1, s2) R(t2), plus a shift, seeded
 *  - planar-contraction-shear   f_j(p) = s R(theta) S_beta(p) + b, S_beta(x, y) = (x + beta y^2, y), seeded
 *  - sturmian-two-maps          two contraction-shear maps ordered by a Sturmian word
 *  - sturmian-trace-maps        the Fibonacci trace map and its coordinate swap ordered by a Sturmian word
 *  - custom                     user polynomial maps with user-asserted bounds
 *
 * Budgets for planar families follow the one-step recursions
 *   L_{i+1} <= c1 L_i,    Turn_{i+1} <= c1 c1_inv Turn_i + c1_inv c2 L_i,
 * where Turn_i is the total turning of F_i o gamma_0, and alpha_i <= min(pi, Turn_i).
 */

#include "distortion.hpp"

#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace bdp {

// =============================================================================
// Sturmian words
// =============================================================================

struct SturmianParams {
  double slope = 0.5;
  double intercept = 0.0;
  std::size_t length = 1;

  void validate() const {
    if (!(slope > 0.0 && slope < 1.0)) throw InputError("SturmianParams: slope must lie in (0,1)");
    if (!(intercept >= 0.0 && intercept < 1.0)) throw InputError("SturmianParams: intercept must lie in [0,1)");
    if (length < 1) throw InputError("SturmianParams: length must be >= 1");
  }
};

/// s_k = floor((k+1) slope + intercept) - floor(k slope + intercept), k = 1..length.
inline std::vector<int> sturmian_word(const SturmianParams& p) {
  p.validate();
  std::vector<int> w;
  w.reserve(p.length);
  for (std::size_t k = 1; k <= p.length; ++k) {
    const auto kd = static_cast<long double>(k);
    const long double hi = std::floor((kd + 1) * p.slope + p.intercept);
    const long double lo = std::floor(kd * p.slope + p.intercept);
    w.push_back(static_cast<int>(hi - lo));
  }
  return w;
}

inline std::string word_string(const std::vector<int>& w) {
  std::string s;
  for (int c : w) s.push_back(c ? '1' : '0');
  return s;
}

// =============================================================================
// Specs
// =============================================================================

struct CurveSpec {
  std::string kind = "circle-arc";  ///< segment | circle-arc | polynomial | trace-surface
  Vec from = Vec::Zero(2);
  Vec to = Vec::Unit(2, 0);
  Vec center = Vec::Zero(2);
  double radius = 1.0;
  double t0 = 0.0;
  double t1 = std::numbers::pi / 2;
  std::vector<Vec> coefficients;
  double angle = 0.9;  ///< trace-surface: fixed second angle
};

struct CustomMapSpec {
  std::string name = "custom";
  std::vector<Polynomial> components;
  std::optional<AnalyticBounds> bounds;
  std::optional<Box> region;
};

struct ScenarioSpec {
  std::string family;
  std::size_t n = 1;
  std::uint64_t seed = 42;
  std::map<std::string, double> params;
  std::optional<Interval> interval;
  std::optional<CurveSpec> curve;
  /// User-asserted constants; they count as analytic.
  HypothesisBudget budget;
  std::vector<CustomMapSpec> maps;
};

struct Scenario {
  std::string family;
  MapSequence maps;
  std::optional<Interval> interval;
  std::optional<ParamCurve> curve;
  std::vector<int> word;
  /// Upper bounds for |I_i| or L(F_i o gamma_0), i = 0..n-1.
  std::vector<double> length_bounds;
  Provenance length_provenance = Provenance::analytic;
  /// 1D closed-form total |I_0| / (1 - sup |f'|), valid for every n.
  std::optional<double> length_total;
  std::optional<BudgetConstant> alpha;
  /// 1D constant sup |f''| / |f'|.
  std::optional<BudgetConstant> C_1d;
  HypothesisBudget overrides;
  std::vector<std::string> notes;

  bool is_1d() const { return maps.dimension() == 1; }

  /// Budget for the curve engines (epsilon set: the C^{1+eps} variant) or the 1D engines.
  HypothesisBudget budget(std::optional<double> epsilon = std::nullopt) const {
    HypothesisBudget b;
    b.epsilon = epsilon ? epsilon : overrides.epsilon;
    const std::optional<double> eps = b.epsilon;
    b.C = overrides.C;
    if (!b.C && is_1d()) b.C = C_1d;
    if (!b.C && !is_1d()) b.C = seminorm_constant(eps);
    b.L = overrides.L;
    if (!b.L && length_total && !eps) b.L = BudgetConstant{*length_total, length_provenance};
    if (!b.L && !length_bounds.empty()) {
      double sum = 0.0;
      for (double l : length_bounds) sum += eps ? std::pow(l, *eps) : l;
      b.L = BudgetConstant{sum, length_provenance};
    }
    b.alpha = overrides.alpha ? overrides.alpha : alpha;
    if (is_1d()) b.alpha.reset();
    return b;
  }

 private:
  std::optional<BudgetConstant> seminorm_constant(std::optional<double> eps) const {
    double C = 0.0;
    for (const auto& f : maps) {
      if (!f.bounds()) return std::nullopt;
      const auto& bd = *f.bounds();
      const double second = eps ? holder_bound(bd, f.region(), *eps) : bd.c2;
      if (!std::isfinite(second) || !std::isfinite(bd.c1_inv)) return std::nullopt;
      C = std::max({C, bd.c1, bd.c1_inv, second});
    }
    return BudgetConstant{C, Provenance::analytic};
  }
};

struct ParamInfo {
  std::string name;
  double default_value;
  std::string help;
};

struct FamilyInfo {
  std::string name;
  int dimension;  ///< 0 for user-defined
  std::string description;
  std::vector<ParamInfo> params;
  bool seeded = false;
};

inline const std::vector<FamilyInfo>& scenario_families() {
  static const std::vector<FamilyInfo> families{
      {"1d-quadratic-contraction", 1, "n copies of f(x) = a x + b x^2 on [0,1]",
       {{"a", 0.5, "linear coefficient"}, {"b", 0.125, "quadratic coefficient"}}},
      {"1d-random-quadratic", 1, "f_j(x) = a_j x + b_j x^2 + c_j on [0,1] with seeded coefficients",
       {{"a_min", 0.3, "lower bound for a_j"},
        {"a_max", 0.6, "upper bound for a_j"},
        {"b_max", 0.1, "|b_j| bound"},
        {"c_max", 0.2, "upper bound for c_j"}},
       true},
      {"planar-rotations", 2, "planar rotations by a fixed angle", {{"angle", 0.1, "rotation angle in radians"}}},
      {"planar-affine", 2, "seeded invertible affine maps R(t1) diag(s1, s2) R(t2) x + b",
       {{"sigma_min", 0.4, "smallest singular value"},
        {"sigma_max", 0.9, "largest singular value"},
        {"shift", 0.1, "per-coordinate shift bound"}},
       true},
      {"planar-contraction-shear", 2, "seeded s R(theta) S_beta(p) + b on [-1.5,1.5]^2",
       {{"scale_min", 0.4, "lower bound for s"},
        {"scale_max", 0.5, "upper bound for s"},
        {"shear_max", 0.1, "upper bound for beta"},
        {"angle_max", std::numbers::pi / 4, "|theta| bound"},
        {"shift", 0.1, "per-coordinate shift bound"},
        {"radius", 1.5, "half-width of the invariant box"}},
       true},
      {"sturmian-two-maps", 2, "contraction-shear maps A (letter 0) and B (letter 1) along a Sturmian word",
       {{"slope", 2.0 - std::numbers::phi, "rotation number of the word"},
        {"intercept", 0.0, "intercept of the word"},
        {"scale_a", 0.5, "s for map A"},
        {"angle_a", 0.3, "theta for map A"},
        {"shear_a", 0.1, "beta for map A"},
        {"scale_b", 0.45, "s for map B"},
        {"angle_b", -0.5, "theta for map B"},
        {"shear_b", 0.05, "beta for map B"}}},
      {"sturmian-trace-maps", 3,
       "trace map (x,y,z) -> (2xy - z, x, y) for letter 0 and (2xy - z, y, x) for letter 1 on [-1.1,1.1]^3",
       {{"slope", 2.0 - std::numbers::phi, "rotation number of the word"}, {"intercept", 0.0, "intercept of the word"}}},
      {"custom", 0, "user-defined polynomial maps with user-asserted bounds", {}},
  };
  return families;
}

// =============================================================================
// Builtin maps
// =============================================================================

/// Fibonacci trace map (x, y, z) -> (2xy - z, x, y).
inline SmoothMap trace_map() {
  // clang-format off
  return polynomial_map({
      {{2.0, {1, 1, 0}}, {-1.0, {0, 0, 1}}},
      {{1.0, {1, 0, 0}}},
      {{1.0, {0, 1, 0}}}}, "trace")
      .with_inverse([](const Vec& p) -> Vec { return Vec{{p[1], p[2], 2.0 * p[1] * p[2] - p[0]}}; });
  // clang-format on
}

/// Trace map followed by swapping the last two coordinates: (x, y, z) -> (2xy - z, y, x).
inline SmoothMap trace_map_swapped() {
  // clang-format off
  return polynomial_map({
      {{2.0, {1, 1, 0}}, {-1.0, {0, 0, 1}}},
      {{1.0, {0, 1, 0}}},
      {{1.0, {1, 0, 0}}}}, "trace-swap")
      .with_inverse([](const Vec& p) -> Vec { return Vec{{p[2], p[1], 2.0 * p[1] * p[2] - p[0]}}; });
  // clang-format on
}

/// x^2 + y^2 + z^2 - 2xyz - 1, preserved by both trace maps.
inline double trace_invariant(const Vec& p) {
  return p[0] * p[0] + p[1] * p[1] + p[2] * p[2] - 2.0 * p[0] * p[1] * p[2] - 1.0;
}

/// Largest singular value of [[1, k], [0, 1]].
inline double shear_sigma_max(double k) { return (std::abs(k) + std::sqrt(k * k + 4.0)) / 2.0; }

struct ShearParams {
  double scale = 0.5;
  double angle = 0.0;
  double shear = 0.1;
  Vec shift = Vec::Zero(2);
  double radius = 1.5;
};

/// p -> s R(theta) (x + beta y^2, y) + b on [-R, R]^2, with analytic bounds on that box.
inline SmoothMap contraction_shear_map(const ShearParams& p, std::string name = "contraction-shear") {
  require_dimension(p.shift, 2, "contraction_shear_map shift");
  if (!(p.scale > 0.0) || !(p.shear >= 0.0) || !(p.radius > 0.0)) {
    throw InputError("contraction_shear_map: need scale > 0, shear >= 0, radius > 0");
  }
  const double R = p.radius;
  if (p.scale * (R * std::numbers::sqrt2 + p.shear * R * R) + p.shift.norm() > R) {
    throw InputError("contraction_shear_map: parameters do not keep [-" + std::to_string(R) + ", " +
                     std::to_string(R) + "]^2 invariant");
  }
  const double s = p.scale, c = std::cos(p.angle), sn = std::sin(p.angle), beta = p.shear;
  // clang-format off
  SmoothMap f = polynomial_map({
      {{s * c, {1, 0}}, {s * c * beta, {0, 2}}, {-s * sn, {0, 1}}, {p.shift[0], {0, 0}}},
      {{s * sn, {1, 0}}, {s * sn * beta, {0, 2}}, {s * c, {0, 1}}, {p.shift[1], {0, 0}}}}, std::move(name));
  // clang-format on
  const double sigma = shear_sigma_max(2.0 * beta * R);
  AnalyticBounds b;
  b.c1 = s * sigma;
  b.c1_inv = sigma / s;
  b.c2 = 2.0 * beta * s;
  // ||D_x f - D_y f|| = 2 beta s |y_1 - y_2| <= 2 beta s (2R)^{1-eps} ||x - y||^eps
  b.holder = [k = 2.0 * beta * s, R](double eps) { return k * std::pow(2.0 * R, 1.0 - eps); };
  return f.with_bounds(b)
      .with_region(Box::cube(2, -R, R))
      .with_inverse([s, c, sn, beta, shift = p.shift](const Vec& q) -> Vec {
        const Vec w = q - shift;
        const double u = (c * w[0] + sn * w[1]) / s;
        const double v = (-sn * w[0] + c * w[1]) / s;
        return Vec{{u - beta * v * v, v}};
      });
}

/// f(x) = a x + b x^2 + c on [0, 1]; requires f' > 0 and f([0,1]) in [0,1].
inline SmoothMap quadratic_1d_map(double a, double b, double c = 0.0, std::string name = "quadratic") {
  const double dmin = std::min(a, a + 2.0 * b);
  const double dmax = std::max(a, a + 2.0 * b);
  if (!(dmin > 0.0)) throw InputError("quadratic_1d_map: derivative must stay positive on [0,1]");
  if (!(c >= 0.0 && a + b + c <= 1.0)) throw InputError("quadratic_1d_map: [0,1] must map into itself");
  AnalyticBounds bd;
  bd.c1 = dmax;
  bd.c1_inv = 1.0 / dmin;
  bd.c2 = 2.0 * std::abs(b);
  bd.holder = [k = 2.0 * std::abs(b)](double) { return k; };  // |f'(x) - f'(y)| <= 2|b| |x - y| <= 2|b| |x - y|^eps on [0,1]
  SmoothMap f = polynomial_map({{{a, {1}}, {b, {2}}, {c, {0}}}}, std::move(name));
  return f.with_bounds(bd).with_region(Box::cube(1, 0.0, 1.0)).with_inverse([a, b, c](const Vec& y) -> Vec {
    const double r = y[0] - c;
    if (b == 0.0) return Vec::Constant(1, r / a);
    return Vec::Constant(1, 2.0 * r / (a + std::sqrt(a * a + 4.0 * b * r)));
  });
}

namespace detail {

/// Uniform double in [lo, hi) from the top 53 bits; identical on every platform.
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

inline double param(const ScenarioSpec& spec, const FamilyInfo& info, const std::string& key) {
  if (auto it = spec.params.find(key); it != spec.params.end()) return it->second;
  for (const auto& p : info.params) {
    if (p.name == key) return p.default_value;
  }
  throw InputError("scenario '" + spec.family + "': unknown parameter '" + key + "'");
}

inline const FamilyInfo& family_info(const std::string& name) {
  for (const auto& f : scenario_families()) {
    if (f.name == name) return f;
  }
  std::string known;
  for (const auto& f : scenario_families()) known += (known.empty() ? "" : ", ") + f.name;
  throw InputError("unknown scenario family '" + name + "' (known: " + known + ")");
}

inline void check_params(const ScenarioSpec& spec, const FamilyInfo& info) {
  for (const auto& [key, value] : spec.params) {
    bool known = false;
    for (const auto& p : info.params) known = known || p.name == key;
    if (!known) throw InputError("scenario '" + spec.family + "': unknown parameter '" + key + "'");
    if (!std::isfinite(value)) throw InputError("scenario '" + spec.family + "': parameter '" + key + "' is not finite");
  }
}

/// Curve plus analytic length and turning when the kind admits them.
struct BuiltCurve {
  ParamCurve curve;
  std::optional<double> length;
  std::optional<double> turning;
};

inline BuiltCurve build_curve(const CurveSpec& c, Eigen::Index d) {
  if (c.kind == "segment") {
    require_dimension(c.from, d, "segment curve 'from'");
    require_dimension(c.to, d, "segment curve 'to'");
    const double len = (c.to - c.from).norm();
    if (!(len > 0.0)) throw InputError("segment curve: endpoints coincide");
    return {segment_curve(c.from, c.to), len, 0.0};
  }
  if (c.kind == "circle-arc") {
    if (d != 2) throw DimensionError("circle-arc curve needs dimension 2");
    require_dimension(c.center, 2, "circle-arc center");
    if (!(c.t0 < c.t1)) throw InputError("circle-arc curve: need t0 < t1");
    return {circle_arc(c.center, c.radius, c.t0, c.t1), c.radius * (c.t1 - c.t0), c.t1 - c.t0};
  }
  if (c.kind == "polynomial") {
    if (c.coefficients.size() < 2) throw InputError("polynomial curve: need at least two coefficient vectors");
    for (const auto& v : c.coefficients) require_dimension(v, d, "polynomial curve coefficient");
    if (!(c.t0 < c.t1)) throw InputError("polynomial curve: need t0 < t1");
    return {polynomial_curve(c.coefficients, c.t0, c.t1), std::nullopt, std::nullopt};
  }
  if (c.kind == "trace-surface") {
    if (d != 3) throw DimensionError("trace-surface curve needs dimension 3");
    if (!(c.t0 < c.t1)) throw InputError("trace-surface curve: need t0 < t1");
    const double b0 = c.angle;
    // (cos t, cos b0, cos(t - b0)) lies on x^2 + y^2 + z^2 - 2xyz = 1
    ParamCurve pc(
        c.t0, c.t1, [b0](double t) -> Vec { return Vec{{std::cos(t), std::cos(b0), std::cos(t - b0)}}; },
        [b0](double t) -> Vec { return Vec{{-std::sin(t), 0.0, -std::sin(t - b0)}}; });
    return {pc, std::nullopt, std::nullopt};
  }
  throw InputError("unknown curve kind '" + c.kind + "' (known: segment, circle-arc, polynomial, trace-surface)");
}

/// Per-step bounds for L_i and min(pi, Turn_i), i = 0..n-1.
inline void apply_recursion(Scenario& sc, double L0, Provenance L0_prov, std::optional<double> turn0) {
  sc.length_bounds.clear();
  double L = L0, turn = turn0.value_or(0.0), alpha = 0.0;
  for (std::size_t i = 0; i < sc.maps.size(); ++i) {
    sc.length_bounds.push_back(L);
    alpha += std::min(std::numbers::pi, turn);
    const auto& b = *sc.maps[i].bounds();
    turn = b.c1 * b.c1_inv * turn + b.c1_inv * b.c2 * L;
    L = b.c1 * L;
  }
  sc.length_provenance = L0_prov;
  if (turn0) sc.alpha = BudgetConstant{alpha, Provenance::analytic};
}

inline void attach_curve(Scenario& sc, const ScenarioSpec& spec, const CurveSpec& fallback, int resolution = 4096) {
  const BuiltCurve bc = build_curve(spec.curve ? *spec.curve : fallback, sc.maps.dimension());
  sc.curve = bc.curve;
  bool all_bounded = true;
  for (const auto& f : sc.maps) all_bounded = all_bounded && f.bounds().has_value();
  if (!all_bounded) return;
  if (bc.length) {
    apply_recursion(sc, *bc.length, Provenance::analytic, bc.turning);
  } else {
    apply_recursion(sc, length(bc.curve, resolution), Provenance::measured, std::nullopt);
    sc.notes.push_back("initial curve length is measured by quadrature; alpha is left to sampling");
  }
}

inline Interval unit_interval_or(const ScenarioSpec& spec) {
  const Interval I = spec.interval.value_or(Interval{0.0, 1.0});
  if (!(I.lo >= 0.0 && I.hi <= 1.0 && I.lo < I.hi)) throw InputError("interval must satisfy 0 <= lo < hi <= 1");
  return I;
}

inline CurveSpec quarter_circle() { return CurveSpec{}; }

inline CurveSpec unit_segment() {
  CurveSpec c;
  c.kind = "segment";
  return c;
}

}  // namespace detail

/// Maps, initial interval or curve, and budget annotations for a scenario spec.
inline Scenario build_sequence(const ScenarioSpec& spec) {
  const FamilyInfo& info = detail::family_info(spec.family);
  detail::check_params(spec, info);
  if (spec.n < 1) throw InputError("scenario '" + spec.family + "': n must be >= 1");
  spec.budget.validate();
  auto P = [&](const char* key) { return detail::param(spec, info, key); };

  Scenario sc;
  sc.family = spec.family;
  sc.overrides = spec.budget;
  std::mt19937_64 rng(spec.seed);
  const std::size_t n = spec.n;

  if (spec.family == "1d-quadratic-contraction") {
    const double a = P("a"), b = P("b");
    sc.maps = MapSequence::repeat(quadratic_1d_map(a, b), n);
    sc.interval = detail::unit_interval_or(spec);
    const double dmin = std::min(a, a + 2.0 * b), dmax = std::max(a, a + 2.0 * b);
    if (!(dmax < 1.0)) throw InputError("1d-quadratic-contraction: sup f' must be < 1");
    sc.C_1d = BudgetConstant{2.0 * std::abs(b) / dmin, Provenance::analytic};
    sc.length_total = sc.interval->length() / (1.0 - dmax);
    sc.length_provenance = Provenance::analytic;
  } else if (spec.family == "1d-random-quadratic") {
    const double a_min = P("a_min"), a_max = P("a_max"), b_max = P("b_max"), c_max = P("c_max");
    if (!(a_min > 2.0 * b_max && a_max >= a_min && b_max >= 0.0 && c_max >= 0.0 && a_max + 2.0 * b_max < 1.0 &&
          a_max + b_max + c_max <= 1.0)) {
      throw InputError("1d-random-quadratic: need 2 b_max < a_min <= a_max, a_max + 2 b_max < 1, a_max + b_max + c_max <= 1");
    }
    std::vector<SmoothMap> maps;
    double C = 0.0, dmax = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = detail::uniform(rng, a_min, a_max);
      const double b = detail::uniform(rng, -b_max, b_max);
      const double c = detail::uniform(rng, 0.0, c_max);
      maps.push_back(quadratic_1d_map(a, b, c, "quadratic-" + std::to_string(j + 1)));
      C = std::max(C, 2.0 * std::abs(b) / std::min(a, a + 2.0 * b));
      dmax = std::max(dmax, std::max(a, a + 2.0 * b));
    }
    sc.maps = MapSequence(std::move(maps));
    sc.interval = detail::unit_interval_or(spec);
    sc.C_1d = BudgetConstant{C, Provenance::analytic};
    sc.length_total = sc.interval->length() / (1.0 - dmax);
  } else if (spec.family == "planar-rotations") {
    sc.maps = MapSequence::repeat(rotation_map(P("angle")), n);
    detail::attach_curve(sc, spec, detail::unit_segment());
  } else if (spec.family == "planar-affine") {
    const double smin = P("sigma_min"), smax = P("sigma_max"), shift = P("shift");
    if (!(smin > 0.0 && smin <= smax && shift >= 0.0)) throw InputError("planar-affine: need 0 < sigma_min <= sigma_max");
    std::vector<SmoothMap> maps;
    for (std::size_t j = 0; j < n; ++j) {
      auto rot = [](double t) {
        Mat R(2, 2);
        R << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
        return R;
      };
      const double t1 = detail::uniform(rng, -std::numbers::pi, std::numbers::pi);
      const double t2 = detail::uniform(rng, -std::numbers::pi, std::numbers::pi);
      const double s1 = detail::uniform(rng, smin, smax);
      const double s2 = detail::uniform(rng, smin, smax);
      const Vec b{{detail::uniform(rng, -shift, shift), detail::uniform(rng, -shift, shift)}};
      const Mat A = rot(t1) * Vec{{s1, s2}}.asDiagonal() * rot(t2);
      maps.push_back(affine_map(A, b, "affine-" + std::to_string(j + 1)));
    }
    sc.maps = MapSequence(std::move(maps));
    detail::attach_curve(sc, spec, detail::quarter_circle());
  } else if (spec.family == "planar-contraction-shear") {
    const double s_lo = P("scale_min"), s_hi = P("scale_max"), beta = P("shear_max"), th = P("angle_max"),
                 shift = P("shift"), R = P("radius");
    if (!(s_lo > 0.0 && s_lo <= s_hi && beta >= 0.0 && th >= 0.0 && shift >= 0.0)) {
      throw InputError("planar-contraction-shear: need 0 < scale_min <= scale_max and nonnegative bounds");
    }
    std::vector<SmoothMap> maps;
    for (std::size_t j = 0; j < n; ++j) {
      ShearParams p;
      p.scale = detail::uniform(rng, s_lo, s_hi);
      p.angle = detail::uniform(rng, -th, th);
      p.shear = detail::uniform(rng, 0.0, beta);
      p.shift = Vec{{detail::uniform(rng, -shift, shift), detail::uniform(rng, -shift, shift)}};
      p.radius = R;
      maps.push_back(contraction_shear_map(p, "shear-" + std::to_string(j + 1)));
    }
    sc.maps = MapSequence(std::move(maps));
    detail::attach_curve(sc, spec, detail::quarter_circle());
  } else if (spec.family == "sturmian-two-maps") {
    sc.word = sturmian_word({P("slope"), P("intercept"), n});
    ShearParams pa{P("scale_a"), P("angle_a"), P("shear_a"), Vec{{0.05, 0.0}}, 1.5};
    ShearParams pb{P("scale_b"), P("angle_b"), P("shear_b"), Vec{{-0.05, 0.05}}, 1.5};
    const SmoothMap A = contraction_shear_map(pa, "A");
    const SmoothMap B = contraction_shear_map(pb, "B");
    std::vector<SmoothMap> maps;
    for (int c : sc.word) maps.push_back(c ? B : A);
    sc.maps = MapSequence(std::move(maps));
    detail::attach_curve(sc, spec, detail::quarter_circle());
  } else if (spec.family == "sturmian-trace-maps") {
    sc.word = sturmian_word({P("slope"), P("intercept"), n});
    const Box region = Box::cube(3, -1.1, 1.1);
    const SmoothMap A = trace_map().with_region(region);
    const SmoothMap B = trace_map_swapped().with_region(region);
    std::vector<SmoothMap> maps;
    for (int c : sc.word) maps.push_back(c ? B : A);
    sc.maps = MapSequence(std::move(maps));
    CurveSpec fallback;
    fallback.kind = "trace-surface";
    fallback.t0 = 0.4;
    fallback.t1 = 0.6;
    detail::attach_curve(sc, spec, fallback);
    sc.notes.push_back("trace-map seminorms are sampled on [-1.1,1.1]^3; the global hypotheses fail for trace maps");
  } else if (spec.family == "custom") {
    if (spec.maps.empty()) throw InputError("custom scenario: 'maps' must list at least one map");
    std::vector<SmoothMap> defs;
    for (const auto& m : spec.maps) {
      SmoothMap f = polynomial_map(m.components, m.name);
      if (m.bounds) f = f.with_bounds(*m.bounds);
      if (m.region) f = f.with_region(*m.region);
      defs.push_back(f);
    }
    std::vector<SmoothMap> maps;
    for (std::size_t j = 0; j < n; ++j) maps.push_back(defs[j % defs.size()]);
    sc.maps = MapSequence(std::move(maps));
    if (sc.maps.dimension() == 1) {
      if (!spec.interval) throw InputError("custom 1D scenario: 'interval' is required");
      sc.interval = spec.interval;
    } else {
      if (!spec.curve) throw InputError("custom scenario: 'curve' is required in dimension > 1");
      detail::attach_curve(sc, spec, *spec.curve);
    }
  }
  return sc;
}

}  // namespace bdp
