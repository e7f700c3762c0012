#pragma once

/**
 * @file distortion.hpp
 * @brief Distortion engines for nonstationary compositions F_n = f_n o ... o f_1.
 *
 * Engines
 * -------
 *  - run_1d / interval_ratio_1d: interval maps with |f''| / |f'| <= C and
 *    sum |I_{j-1}| <= L. Derivative ratios obey |log F_n'(x)/F_n'(y)| <= C L, and
 *    image-length ratios are sandwiched by K = exp(C L)^2.
 *  - run_curve / arc_ratio_curve: a unit-speed curve pushed through maps in R^d with
 *    ||f||_1, ||f^-1||_1, ||f||_2 <= C and summed lengths / maximal angles of the
 *    image curves bounded by L and alpha. Tangent-norm ratios obey
 *    |log ||u_n|| / ||v_n||| <= C^2 (alpha + L); arc-length ratios use K squared.
 *  - run_curve_holder: the C^{1+eps} variant, where ||Df||_eps replaces ||f||_2 and
 *    lengths enter the budget as L_i^eps.
 *
 * Every ratio is accumulated in log space. Verdicts never claim a violation on the
 * strength of a sampled constant: sampled constants cap the verdict at
 * hypothesis-unverified.
 */

#include "curves.hpp"
#include "maps.hpp"

#include <limits>
#include <string>
#include <vector>

namespace bdp {

enum class Verdict { bound_holds, bound_violated, hypothesis_unverified };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::bound_holds: return "bound-holds";
    case Verdict::bound_violated: return "bound-violated";
    case Verdict::hypothesis_unverified: return "hypothesis-unverified";
  }
  return "unknown";
}

enum class Engine { thm_2_1, thm_2_2, main_thm, nbdp, holder };

inline const char* to_string(Engine e) {
  switch (e) {
    case Engine::thm_2_1: return "thm-2.1";
    case Engine::thm_2_2: return "thm-2.2";
    case Engine::main_thm: return "main-thm";
    case Engine::nbdp: return "nbdp";
    case Engine::holder: return "holder";
  }
  return "unknown";
}

struct BudgetConstant {
  double value = 0.0;
  Provenance provenance = Provenance::analytic;
};

/// Hypothesis constants. Missing entries are measured by the engines.
struct HypothesisBudget {
  std::optional<BudgetConstant> C;
  std::optional<BudgetConstant> L;
  std::optional<BudgetConstant> alpha;
  std::optional<double> epsilon;

  static HypothesisBudget analytic(double C, double L, std::optional<double> alpha = std::nullopt) {
    HypothesisBudget b;
    b.C = BudgetConstant{C, Provenance::analytic};
    b.L = BudgetConstant{L, Provenance::analytic};
    if (alpha) b.alpha = BudgetConstant{*alpha, Provenance::analytic};
    return b;
  }

  void validate() const {
    for (const auto* c : {&C, &L, &alpha}) {
      if (*c && !((*c)->value >= 0.0)) throw InputError("HypothesisBudget: constants must be nonnegative");
    }
    if (epsilon && !(*epsilon > 0.0 && *epsilon < 1.0)) throw InputError("HypothesisBudget: epsilon must lie in (0,1)");
  }
};

struct VerdictPolicy {
  /// Absolute tolerance in log space for every bound comparison.
  double tolerance = 1e-9;
  /// Whether computed (non-analytic, non-sampled) constants count as acceptable.
  bool accept_measured = true;
  /// Grid points per axis when a missing C has to be estimated.
  int seminorm_resolution = 9;
  /// Grid nodes per step for the 1D derivative sign check and C measurement.
  int interval_grid = 129;
};

/// One row per image I_i or curve F_i o gamma_0, i = 0..n-1. The lemma increments
/// in row i belong to applying f_{i+1}.
struct StepRecord {
  double length = 0.0;
  double length_error = 0.0;
  double alpha = 0.0;
  double lemma1_increment = 0.0;
  double lemma2_increment = 0.0;
  /// Contribution to the log bound: C L_i in 1D, C^2 (alpha_i + L_i^p) for curves.
  double budget_term = 0.0;
};

/// Tangent data at one sampled parameter of F_i o gamma_0.
struct SampleState {
  Vec position;
  Vec direction;  ///< unit tangent
  double log_norm = 0.0;
};

struct DistortionTrace {
  std::size_t n = 0;
  std::vector<StepRecord> steps;
  double sum_L = 0.0;
  double sum_alpha = 0.0;
  /// sum of L_i^p, p = length_exponent (1, or eps for the C^{1+eps} variant)
  double sum_length_terms = 0.0;
  double length_exponent = 1.0;
  double sup_abs_log_ratio = 0.0;
  /// Sampled parameters (x in I_0, or arc parameter on gamma_0) and the final log
  /// derivative norms there: log|F_n'(x)| or log||u_n||.
  std::vector<double> sample_params;
  std::vector<double> final_log_norms;
  /// Curve engines only: states[i][k] lives on F_i o gamma_0.
  std::vector<std::vector<SampleState>> states;
};

struct RatioCheck {
  double ratio = 0.0;  ///< image length ratio
  double r = 0.0;      ///< |b1 - a1| / |b2 - a2|
  double lower = 0.0;  ///< r / K
  double upper = 0.0;  ///< r K
  double length1 = 0.0;
  double length2 = 0.0;
};

struct BoundReport {
  Engine engine = Engine::main_thm;
  double empirical = 0.0;
  double theoretical_log_K = 0.0;
  Verdict verdict = Verdict::hypothesis_unverified;
  HypothesisBudget budget;
  DistortionTrace trace;
  double tolerance = 1e-9;
  double quadrature_allowance = 0.0;
  std::optional<double> measured_C;
  std::optional<RatioCheck> ratio;
  std::vector<std::string> notes;

  double K() const { return std::exp(theoretical_log_K); }
  double slack() const { return theoretical_log_K - empirical; }
};

// =============================================================================
// Constants
// =============================================================================

/// K = e^{C L}.
inline double bound_1d(double C, double L) {
  if (!(C >= 0.0 && L >= 0.0)) throw InputError("bound_1d: C and L must be nonnegative");
  return std::exp(C * L);
}

/// K = e^{C^2 (alpha + L)}.
inline double bound_curve(double C, double L, double alpha) {
  if (!(C >= 0.0 && L >= 0.0 && alpha >= 0.0)) throw InputError("bound_curve: constants must be nonnegative");
  return std::exp(C * C * (alpha + L));
}

namespace detail {

inline bool acceptable(const BudgetConstant& c, const VerdictPolicy& policy) {
  return c.provenance == Provenance::analytic || (c.provenance == Provenance::measured && policy.accept_measured);
}

/// Shared verdict logic. `length_sum` / `alpha_sum` are the measured sums to be checked
/// against user-supplied budgets.
inline Verdict decide(BoundReport& rep, const VerdictPolicy& policy, double length_sum, double length_allowance,
                      std::optional<double> alpha_sum) {
  bool unverified = false;
  auto check_provenance = [&](const char* name, const std::optional<BudgetConstant>& c) {
    if (c && !acceptable(*c, policy)) {
      unverified = true;
      rep.notes.push_back(std::string(name) + " is " + to_string(c->provenance) + "; bound comparison is inconclusive");
    }
  };
  check_provenance("C", rep.budget.C);
  check_provenance("L", rep.budget.L);
  check_provenance("alpha", rep.budget.alpha);

  if (rep.budget.L && rep.budget.L->provenance != Provenance::measured &&
      length_sum > rep.budget.L->value + policy.tolerance + length_allowance) {
    unverified = true;
    rep.notes.push_back("measured length sum " + std::to_string(length_sum) + " exceeds the L budget " +
                        std::to_string(rep.budget.L->value));
  }
  if (alpha_sum && rep.budget.alpha && rep.budget.alpha->provenance == Provenance::analytic &&
      *alpha_sum > rep.budget.alpha->value + policy.tolerance) {
    unverified = true;
    rep.notes.push_back("measured angle sum " + std::to_string(*alpha_sum) + " exceeds the alpha budget " +
                        std::to_string(rep.budget.alpha->value));
  }
  const bool within = rep.empirical <= rep.theoretical_log_K + rep.tolerance;
  if (unverified) return Verdict::hypothesis_unverified;
  return within ? Verdict::bound_holds : Verdict::bound_violated;
}

inline std::vector<double> uniform_nodes(double lo, double hi, std::size_t count) {
  std::vector<double> xs(count);
  for (std::size_t k = 0; k < count; ++k) {
    xs[k] = (k + 1 == count) ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  return xs;
}

inline Vec scalar(double x) { return Vec::Constant(1, x); }

inline void require_1d(const MapSequence& seq) {
  if (seq.dimension() != 1) throw DimensionError("1D engines need maps of dimension 1");
}

inline void require_subinterval(const Interval& outer, const Interval& sub, const char* what) {
  if (!(std::abs(sub.hi - sub.lo) >= 1e-12)) throw InputError(std::string(what) + ": degenerate subinterval");
  const Interval s{std::min(sub.lo, sub.hi), std::max(sub.lo, sub.hi)};
  if (!outer.contains(s, 1e-12)) throw InputError(std::string(what) + ": subinterval outside the domain");
}

}  // namespace detail

// =============================================================================
// Interval maps
// =============================================================================

/// Derivative distortion of F_n on I_0.
///
/// Intervals I_j are images of endpoints (each f_j' keeps one sign, checked on a grid).
/// The empirical value is the sup over `samples` equally spaced pairs x, y in I_0 of
/// |log|F_n'(x)| - log|F_n'(y)||, with log|F_n'(x)| = sum_j log|f_j'(x_{j-1})|.
inline BoundReport run_1d(const MapSequence& seq, const Interval& I0, std::size_t samples,
                          const HypothesisBudget& budget = {}, const VerdictPolicy& policy = {}) {
  detail::require_1d(seq);
  budget.validate();
  if (samples < 2) throw InputError("run_1d: need at least two samples");
  if (!(I0.length() >= 1e-12)) throw InputError("run_1d: degenerate initial interval");

  BoundReport rep;
  rep.engine = Engine::thm_2_1;
  rep.tolerance = policy.tolerance;
  auto& tr = rep.trace;
  tr.n = seq.size();
  tr.sample_params = detail::uniform_nodes(std::min(I0.lo, I0.hi), std::max(I0.lo, I0.hi), samples);
  std::vector<double> xs = tr.sample_params;
  std::vector<double> log_deriv(samples, 0.0);

  Interval cur{std::min(I0.lo, I0.hi), std::max(I0.lo, I0.hi)};
  double measured_C = 0.0;
  const Vec one = detail::scalar(1.0);

  for (std::size_t j = 0; j < seq.size(); ++j) {
    const SmoothMap& f = seq[j];
    const std::size_t step = j + 1;
    StepRecord rec;
    rec.length = cur.length();
    try {
      // one-signed derivative on I_{j-1}, and the sampled |f''| / |f'|
      int sign = 0;
      for (double t : detail::uniform_nodes(cur.lo, cur.hi, static_cast<std::size_t>(policy.interval_grid))) {
        const Jet2 jet = push_jet2(f, detail::scalar(t), one, one);
        const double d1 = jet.first[0];
        const int s = (d1 > 0.0) - (d1 < 0.0);
        if (s == 0 || (sign != 0 && s != sign)) {
          throw HypothesisViolation("derivative of map '" + f.name() + "' vanishes or changes sign on I_" +
                                        std::to_string(j),
                                    step);
        }
        sign = s;
        measured_C = std::max(measured_C, std::abs(jet.second[0]) / std::abs(d1));
      }
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t k = 0; k < samples; ++k) {
        const Jet1 jet = push_jet1(f, detail::scalar(xs[k]), one);
        const double ld = std::log(std::abs(jet.deriv[0]));
        lo = std::min(lo, ld);
        hi = std::max(hi, ld);
        log_deriv[k] += ld;
        xs[k] = jet.value[0];
      }
      rec.lemma2_increment = hi - lo;
      const double fa = f(detail::scalar(cur.lo))[0];
      const double fb = f(detail::scalar(cur.hi))[0];
      cur = Interval{std::min(fa, fb), std::max(fa, fb)};
    } catch (const OutOfRegionError& e) {
      throw OutOfRegionError(e.what(), step);
    }
    tr.sum_L += rec.length;
    tr.steps.push_back(rec);
  }
  tr.sum_length_terms = tr.sum_L;
  tr.final_log_norms = log_deriv;
  const auto [mn, mx] = std::minmax_element(log_deriv.begin(), log_deriv.end());
  tr.sup_abs_log_ratio = *mx - *mn;
  rep.empirical = tr.sup_abs_log_ratio;
  rep.measured_C = measured_C;

  rep.budget = budget;
  if (!rep.budget.C) rep.budget.C = BudgetConstant{measured_C, Provenance::sampled};
  if (!rep.budget.L) rep.budget.L = BudgetConstant{tr.sum_L, Provenance::measured};
  rep.budget.alpha.reset();
  const double C = rep.budget.C->value;
  rep.theoretical_log_K = C * rep.budget.L->value;
  for (auto& s : tr.steps) s.budget_term = C * s.length;
  rep.verdict = detail::decide(rep, policy, tr.sum_L, 0.0, std::nullopt);
  return rep;
}

/// Image-length ratio of two subintervals against r K^{+-1}, K = exp(C L)^2.
inline BoundReport interval_ratio_1d(const MapSequence& seq, const Interval& I0, const Interval& sub1,
                                     const Interval& sub2, std::size_t samples, const HypothesisBudget& budget = {},
                                     const VerdictPolicy& policy = {}) {
  detail::require_1d(seq);
  const Interval dom{std::min(I0.lo, I0.hi), std::max(I0.lo, I0.hi)};
  detail::require_subinterval(dom, sub1, "interval_ratio_1d");
  detail::require_subinterval(dom, sub2, "interval_ratio_1d");

  BoundReport rep = run_1d(seq, I0, samples, budget, policy);
  rep.engine = Engine::thm_2_2;
  rep.notes.clear();

  auto image_length = [&](const Interval& s) {
    const double a = apply_sequence(seq, detail::scalar(s.lo)).back()[0];
    const double b = apply_sequence(seq, detail::scalar(s.hi)).back()[0];
    return std::abs(b - a);
  };
  RatioCheck rc;
  rc.length1 = image_length(sub1);
  rc.length2 = image_length(sub2);
  if (!(rc.length2 > 0.0)) throw InputError("interval_ratio_1d: second image interval collapsed to a point");
  rc.ratio = rc.length1 / rc.length2;
  rc.r = sub1.length() / sub2.length();
  const double log_K_tilde = rep.theoretical_log_K;
  rep.theoretical_log_K = 2.0 * log_K_tilde;
  rc.lower = rc.r * std::exp(-rep.theoretical_log_K);
  rc.upper = rc.r * std::exp(rep.theoretical_log_K);
  rep.empirical = std::abs(std::log(rc.ratio) - std::log(rc.r));
  rep.ratio = rc;
  rep.verdict = detail::decide(rep, policy, rep.trace.sum_L, 0.0, std::nullopt);
  return rep;
}

// =============================================================================
// Curves
// =============================================================================

namespace detail {

inline double max_angle_of(const std::vector<Vec>& dirs) {
  CurveSamples s;
  s.directions = dirs;
  return max_angle(s);
}

/// Bounding box of a set of points, padded so it is never degenerate.
inline Box bounding_box(const std::vector<Vec>& pts) {
  Vec lo = pts.front(), hi = pts.front();
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec pad = ((hi - lo) * 1e-3).array() + 1e-6;
  return Box(lo - pad, hi + pad);
}

/// C from seminorm estimates of every map: analytic when every map carries bounds.
inline BudgetConstant resolve_C(const MapSequence& seq, const std::vector<std::vector<Vec>>& step_points,
                                std::optional<double> epsilon, const VerdictPolicy& policy) {
  double C = 0.0;
  bool all_analytic = true;
  std::vector<std::pair<const void*, double>> cache;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const SmoothMap& f = seq[i];
    const bool cacheable = f.bounds() || f.region();
    double value = -1.0;
    if (cacheable) {
      for (const auto& [id, v] : cache) {
        if (id == f.identity()) value = v;
      }
    }
    if (value < 0.0) {
      const Box region = f.region() ? *f.region() : bounding_box(step_points[i]);
      const SeminormEstimate est = estimate_seminorms(f, region, policy.seminorm_resolution, epsilon);
      value = epsilon ? est.holder_constant() : est.constant();
      if (est.provenance != Provenance::analytic || (epsilon && est.holder_provenance != Provenance::analytic)) {
        all_analytic = false;
      }
      if (cacheable) cache.emplace_back(f.identity(), value);
    }
    C = std::max(C, value);
  }
  return BudgetConstant{C, all_analytic ? Provenance::analytic : Provenance::sampled};
}

inline BoundReport run_curve_impl(const MapSequence& seq, const NaturalCurve& gamma0, std::size_t samples,
                                  int resolution, const HypothesisBudget& budget, const VerdictPolicy& policy,
                                  std::optional<double> epsilon) {
  budget.validate();
  if (samples < 2) throw InputError("run_curve: need at least two samples");
  if (gamma0.dimension() != seq.dimension()) throw DimensionError("run_curve: curve and maps differ in dimension");
  const double p = epsilon ? *epsilon : 1.0;

  BoundReport rep;
  rep.engine = epsilon ? Engine::holder : Engine::main_thm;
  rep.tolerance = policy.tolerance;
  auto& tr = rep.trace;
  tr.n = seq.size();
  tr.length_exponent = p;

  const ParamCurve unit = gamma0.as_param_curve();
  const int coarse = detail::even_at_least_two(resolution);
  CurveSamples table = sample_curve(unit, static_cast<std::size_t>(2 * coarse + 1));

  tr.sample_params = uniform_nodes(0.0, gamma0.total_length(), samples);
  std::vector<SampleState> states;
  states.reserve(samples);
  for (double s : tr.sample_params) {
    // natural parameterization: ||u_0|| = 1, so log-norms start at exactly 0
    states.push_back(SampleState{unit.position(s), unit.tangent(s).normalized(), 0.0});
  }

  std::vector<std::vector<Vec>> step_points;
  double allowance = 0.0;

  for (std::size_t i = 0; i < seq.size(); ++i) {
    const SmoothMap& f = seq[i];
    const std::size_t step = i + 1;
    StepRecord rec;
    const QuadratureResult q = simpson_length(table);
    rec.length = q.value;
    rec.length_error = q.error;
    std::vector<Vec> dirs = table.directions;
    for (const auto& st : states) dirs.push_back(st.direction);
    rec.alpha = max_angle_of(dirs);

    // Jacobians at the sampled points, then every ordered pair (x, y)
    std::vector<Mat> J(samples);
    std::vector<Vec> own(samples);
    std::vector<double> own_log(samples);
    try {
      for (std::size_t k = 0; k < samples; ++k) {
        J[k] = jacobian(f, states[k].position);
        inverse_operator_norm(J[k]);
        own[k] = J[k] * states[k].direction;
        own_log[k] = std::log(own[k].norm());
      }
    } catch (const SingularJacobianError& e) {
      throw HypothesisViolation(std::string("invertibility fails along the curve: ") + e.what(), step);
    } catch (const OutOfRegionError& e) {
      throw OutOfRegionError(e.what(), step);
    }
    double inc1 = 0.0, inc2 = 0.0;
    for (std::size_t x = 0; x < samples; ++x) {
      for (std::size_t y = 0; y < samples; ++y) {
        const double cross_log = std::log((J[x] * states[y].direction).norm());
        const double base = std::abs(states[x].log_norm - states[y].log_norm);
        const double lhs1 = std::abs(own_log[x] + states[x].log_norm - cross_log - states[y].log_norm);
        const double lhs2 = std::abs(cross_log - own_log[y]);
        inc1 = std::max(inc1, lhs1 - base);
        inc2 = std::max(inc2, lhs2);
      }
    }
    rec.lemma1_increment = inc1;
    rec.lemma2_increment = inc2;

    step_points.push_back(table.positions);
    tr.states.push_back(states);
    for (std::size_t k = 0; k < samples; ++k) {
      states[k].position = f(states[k].position);
      states[k].direction = own[k] / own[k].norm();
      states[k].log_norm += own_log[k];
    }
    try {
      table = pushforward(table, f);
    } catch (const SingularJacobianError& e) {
      throw HypothesisViolation(std::string("invertibility fails along the curve: ") + e.what(), step);
    } catch (const OutOfRegionError& e) {
      throw OutOfRegionError(e.what(), step);
    }

    tr.sum_L += rec.length;
    tr.sum_alpha += rec.alpha;
    const double term = std::pow(rec.length, p);
    tr.sum_length_terms += term;
    allowance += std::pow(rec.length + rec.length_error, p) - term;
    tr.steps.push_back(rec);
  }

  tr.final_log_norms.reserve(samples);
  for (const auto& st : states) tr.final_log_norms.push_back(st.log_norm);
  const auto [mn, mx] = std::minmax_element(tr.final_log_norms.begin(), tr.final_log_norms.end());
  tr.sup_abs_log_ratio = *mx - *mn;
  rep.empirical = tr.sup_abs_log_ratio;

  rep.budget = budget;
  rep.budget.epsilon = epsilon;
  if (!rep.budget.C) rep.budget.C = resolve_C(seq, step_points, epsilon, policy);
  if (!rep.budget.L) rep.budget.L = BudgetConstant{tr.sum_length_terms, Provenance::measured};
  if (!rep.budget.alpha) rep.budget.alpha = BudgetConstant{tr.sum_alpha, Provenance::sampled};
  const double C = rep.budget.C->value;
  const double C2 = C * C;
  rep.quadrature_allowance = C2 * allowance;
  rep.theoretical_log_K = C2 * (rep.budget.alpha->value + rep.budget.L->value);
  for (auto& s : tr.steps) s.budget_term = C2 * (s.alpha + std::pow(s.length, p));
  if (epsilon) {
    rep.notes.push_back("length budget sums L(F_i o gamma_0)^eps over i = 0..n-1");
  }
  rep.verdict = decide(rep, policy, tr.sum_length_terms, allowance, tr.sum_alpha);
  return rep;
}

}  // namespace detail

/// Tangent-norm distortion of F_n o gamma_0 for a unit-speed gamma_0.
///
/// Records per step the length and sampled maximal angle of F_i o gamma_0, and the
/// largest per-pair increments of the two one-step estimates:
///   lemma 1: |log ||Df u|| / ||Df v||| - |log ||u|| / ||v|||   (same base point)
///   lemma 2: |log ||D_x f v|| / ||D_y f v|||                   (same vector)
/// which telescope to the final sup |log ||u_n|| / ||v_n|||.
inline BoundReport run_curve(const MapSequence& seq, const NaturalCurve& gamma0, std::size_t samples, int resolution,
                             const HypothesisBudget& budget = {}, const VerdictPolicy& policy = {}) {
  return detail::run_curve_impl(seq, gamma0, samples, resolution, budget, policy, std::nullopt);
}

/// C^{1+eps} variant: C bounds ||f||_1, ||f^-1||_1 and ||Df||_eps; L bounds sum L_i^eps.
inline BoundReport run_curve_holder(const MapSequence& seq, const NaturalCurve& gamma0, std::size_t samples,
                                    int resolution, const HypothesisBudget& budget, const VerdictPolicy& policy = {}) {
  if (!budget.epsilon) throw InputError("run_curve_holder: budget.epsilon is required");
  return detail::run_curve_impl(seq, gamma0, samples, resolution, budget, policy, budget.epsilon);
}

/// Arc-length ratio of two sub-arcs of gamma_0 after n maps, against r K^{+-1} with
/// K = exp(C^2 (alpha + L))^2. Subintervals are in the arc parameter of gamma_0.
inline BoundReport arc_ratio_curve(const MapSequence& seq, const NaturalCurve& gamma0, const Interval& sub1,
                                   const Interval& sub2, std::size_t samples, int resolution,
                                   const HypothesisBudget& budget = {}, const VerdictPolicy& policy = {}) {
  const Interval dom{0.0, gamma0.total_length()};
  detail::require_subinterval(dom, sub1, "arc_ratio_curve");
  detail::require_subinterval(dom, sub2, "arc_ratio_curve");

  BoundReport rep = budget.epsilon ? run_curve_holder(seq, gamma0, samples, resolution, budget, policy)
                                   : run_curve(seq, gamma0, samples, resolution, budget, policy);
  rep.engine = Engine::nbdp;
  const ParamCurve unit = gamma0.as_param_curve();
  const int coarse = detail::even_at_least_two(resolution);

  auto image_arc = [&](const Interval& s) {
    CurveSamples t = sample_curve(unit, static_cast<std::size_t>(2 * coarse + 1), std::min(s.lo, s.hi),
                                  std::max(s.lo, s.hi));
    for (std::size_t i = 0; i < seq.size(); ++i) {
      try {
        t = pushforward(t, seq[i]);
      } catch (const OutOfRegionError& e) {
        throw OutOfRegionError(e.what(), i + 1);
      }
    }
    return simpson_length(t);
  };
  const QuadratureResult q1 = image_arc(sub1);
  const QuadratureResult q2 = image_arc(sub2);
  RatioCheck rc;
  rc.length1 = q1.value;
  rc.length2 = q2.value;
  rc.ratio = q1.value / q2.value;
  rc.r = sub1.length() / sub2.length();
  const double log_K_tilde = rep.theoretical_log_K;
  rep.theoretical_log_K = 2.0 * log_K_tilde;
  rc.lower = rc.r * std::exp(-rep.theoretical_log_K);
  rc.upper = rc.r * std::exp(rep.theoretical_log_K);
  rep.empirical = std::abs(std::log(rc.ratio) - std::log(rc.r));
  rep.ratio = rc;
  // relative quadrature error of the two arcs, in log space
  const double arc_allowance = q1.error / q1.value + q2.error / q2.value;
  const double length_allowance = rep.quadrature_allowance;
  rep.quadrature_allowance = length_allowance + arc_allowance;
  rep.notes.clear();
  rep.tolerance = policy.tolerance + arc_allowance;
  const double C2 = rep.budget.C->value * rep.budget.C->value;
  rep.verdict = detail::decide(rep, policy, rep.trace.sum_length_terms, C2 > 0.0 ? length_allowance / C2 : 0.0,
                               rep.trace.sum_alpha);
  if (budget.epsilon) rep.notes.push_back("length budget sums L(F_i o gamma_0)^eps over i = 0..n-1");
  return rep;
}

// =============================================================================
// Per-step lemma checks
// =============================================================================

struct LemmaViolation {
  std::size_t step = 0;  ///< 1-based index i of the map f_i
  std::size_t x_index = 0;
  std::size_t y_index = 0;
  int lemma = 0;  ///< 1 or 2
  double lhs = 0.0;
  double rhs = 0.0;
};

struct LemmaStepResult {
  std::size_t step = 0;
  bool lemma1_ok = true;
  bool lemma2_ok = true;
  double lemma1_slack = std::numeric_limits<double>::infinity();  ///< min over pairs of rhs - lhs
  double lemma2_slack = std::numeric_limits<double>::infinity();
};

struct LemmaCheckResult {
  std::vector<LemmaStepResult> steps;
  std::optional<LemmaViolation> first_violation;

  bool passed() const { return !first_violation; }
};

/// Re-evaluates both one-step inequalities for every step and every ordered sample pair
/// of a curve run:
///   |log ||D_{x} f_i u|| / ||D_{x} f_i v||| <= |log ||u|| / ||v||| + C^2 alpha(F_{i-1} o gamma_0)
///   |log ||D_{x} f_i v|| / ||D_{y} f_i v||| <= C^2 L(F_{i-1} o gamma_0)^p
/// with tolerance `tolerance` plus the quadrature allowance of L.
inline LemmaCheckResult lemma_step_checks(const BoundReport& report, const MapSequence& seq, double tolerance = 1e-9) {
  const auto& tr = report.trace;
  if (tr.states.size() != tr.steps.size() || tr.steps.size() != seq.size() || !report.budget.C) {
    throw InputError("lemma_step_checks: needs a completed curve run over the same sequence");
  }
  const double C2 = report.budget.C->value * report.budget.C->value;
  const double p = tr.length_exponent;
  LemmaCheckResult out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const auto& states = tr.states[i];
    const auto& rec = tr.steps[i];
    const std::size_t m = states.size();
    std::vector<Mat> J(m);
    for (std::size_t k = 0; k < m; ++k) J[k] = jacobian(seq[i], states[k].position);
    const double rhs1_extra = C2 * rec.alpha;
    const double rhs2 = C2 * std::pow(rec.length, p);
    const double tol2 = tolerance + C2 * (std::pow(rec.length + rec.length_error, p) - std::pow(rec.length, p));
    LemmaStepResult res;
    res.step = i + 1;
    for (std::size_t x = 0; x < m; ++x) {
      for (std::size_t y = 0; y < m; ++y) {
        const Vec u = std::exp(states[x].log_norm) * states[x].direction;
        (void)u;
        const double log_u = states[x].log_norm;
        const double log_v = states[y].log_norm;
        const double log_Dx_u = std::log((J[x] * states[x].direction).norm()) + log_u;
        const double log_Dx_v = std::log((J[x] * states[y].direction).norm()) + log_v;
        const double log_Dy_v = std::log((J[y] * states[y].direction).norm()) + log_v;
        const double lhs1 = std::abs(log_Dx_u - log_Dx_v);
        const double rhs1 = std::abs(log_u - log_v) + rhs1_extra;
        const double lhs2 = std::abs(log_Dx_v - log_Dy_v);
        res.lemma1_slack = std::min(res.lemma1_slack, rhs1 - lhs1);
        res.lemma2_slack = std::min(res.lemma2_slack, rhs2 - lhs2);
        if (lhs1 > rhs1 + tolerance) {
          res.lemma1_ok = false;
          if (!out.first_violation) out.first_violation = LemmaViolation{i + 1, x, y, 1, lhs1, rhs1};
        }
        if (lhs2 > rhs2 + tol2) {
          res.lemma2_ok = false;
          if (!out.first_violation) out.first_violation = LemmaViolation{i + 1, x, y, 2, lhs2, rhs2};
        }
      }
    }
    out.steps.push_back(res);
  }
  return out;
}

}  // namespace bdp
