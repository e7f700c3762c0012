#pragma once

/**
 * @file jets.hpp
 * @brief Value, first directional derivative and bilinear second derivative of a map at a point.
 *
 * push_jet1 / push_jet2 use a map's analytic callbacks when present and central
 * finite differences otherwise. fd_oracle always differentiates numerically and is
 * the independent check used by the tests.
 *
 * Step sizes follow the usual truncation / round-off balance for central
 * differences: h = step * max(1, ||x||) with step = eps^(1/3) for first
 * derivatives and eps^(1/4) for the nested second-derivative stencil.
 */

#include "smooth_map.hpp"

#include <cmath>
#include <limits>

namespace bdp {

/// (f(x), D_x f . v)
struct Jet1 {
  Vec value;
  Vec deriv;
};

/// (f(x), D_x f . v, D^2_x f(u, v))
struct Jet2 {
  Vec value;
  Vec first;
  Vec second;
};

enum class FDOrder { central2 };

struct FDConfig {
  /// Base step for first derivatives (central differences).
  double first_step = std::cbrt(std::numeric_limits<double>::epsilon());
  /// Base step for both levels of the nested second-derivative stencil.
  double second_step = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
  FDOrder order = FDOrder::central2;

  void validate() const {
    if (!(first_step > 0.0) || !(second_step > 0.0)) throw InputError("FDConfig: step sizes must be > 0");
  }
};

namespace detail {

inline double fd_scale(const Vec& x) { return std::max(1.0, x.norm()); }

/// (f(x + h w) - f(x - h w)) / 2h, with the raw evaluator.
inline Vec central_difference(const SmoothMap& f, const Vec& x, const Vec& w, double h) {
  return (f.evaluate_unchecked(x + h * w) - f.evaluate_unchecked(x - h * w)) / (2.0 * h);
}

/// D_x f . v by central differences along the unit direction of v.
inline Vec fd_first(const SmoothMap& f, const Vec& x, const Vec& v, double h) {
  const double nv = v.norm();
  if (nv == 0.0) return Vec::Zero(f.dimension());
  return nv * central_difference(f, x, v / nv, h);
}

/// Directional derivative used as the inner level of the second-derivative stencil.
inline Vec inner_first(const SmoothMap& f, const Vec& x, const Vec& u, double h, bool use_analytic) {
  if (use_analytic) return f.analytic_derivative(x, u);
  return fd_first(f, x, u, h);
}

/// Derivative along v of y -> D_y f . u, by a central difference of the inner derivative.
inline Vec fd_second(const SmoothMap& f, const Vec& x, const Vec& u, const Vec& v, double h_outer, double h_inner,
                     bool use_analytic_inner) {
  const double nv = v.norm();
  if (nv == 0.0 || u.norm() == 0.0) return Vec::Zero(f.dimension());
  const Vec w = v / nv;
  const Vec plus = inner_first(f, x + h_outer * w, u, h_inner, use_analytic_inner);
  const Vec minus = inner_first(f, x - h_outer * w, u, h_inner, use_analytic_inner);
  return nv * (plus - minus) / (2.0 * h_outer);
}

inline void check_finite_output(const Vec& y, const SmoothMap& f) {
  if (!all_finite(y)) throw OutOfRegionError("non-finite derivative from map '" + f.name() + "'");
}

}  // namespace detail

/// (f(x), D_x f . v); analytic when the map provides a derivative callback.
inline Jet1 push_jet1(const SmoothMap& f, const Vec& x, const Vec& v, const FDConfig& cfg = {}) {
  f.check_input(x, "push_jet1");
  require_dimension(v, f.dimension(), "push_jet1 direction");
  Jet1 jet;
  jet.value = f(x);
  if (f.has_derivative()) {
    jet.deriv = f.analytic_derivative(x, v);
  } else {
    cfg.validate();
    jet.deriv = detail::fd_first(f, x, v, cfg.first_step * detail::fd_scale(x));
  }
  require_dimension(jet.deriv, f.dimension(), "push_jet1 derivative");
  detail::check_finite_output(jet.deriv, f);
  return jet;
}

/// (f(x), D_x f . v, D^2_x f(u, v)).
inline Jet2 push_jet2(const SmoothMap& f, const Vec& x, const Vec& u, const Vec& v, const FDConfig& cfg = {}) {
  require_dimension(u, f.dimension(), "push_jet2 direction u");
  Jet1 j1 = push_jet1(f, x, v, cfg);
  Jet2 jet{std::move(j1.value), std::move(j1.deriv), Vec()};
  if (f.has_second_derivative()) {
    jet.second = f.analytic_second_derivative(x, u, v);
  } else {
    cfg.validate();
    const double scale = detail::fd_scale(x);
    if (f.has_derivative()) {
      // only one differencing level, so the first-derivative step is the balanced one
      const double h = cfg.first_step * scale;
      jet.second = detail::fd_second(f, x, u, v, h, h, true);
    } else {
      const double h = cfg.second_step * scale;
      jet.second = detail::fd_second(f, x, u, v, h, h, false);
    }
  }
  require_dimension(jet.second, f.dimension(), "push_jet2 second derivative");
  detail::check_finite_output(jet.second, f);
  return jet;
}

/// Purely finite-difference jet, never touching analytic callbacks.
inline Jet2 fd_oracle(const SmoothMap& f, const Vec& x, const Vec& u, const Vec& v, const FDConfig& cfg = {}) {
  cfg.validate();
  f.check_input(x, "fd_oracle");
  require_dimension(u, f.dimension(), "fd_oracle direction u");
  require_dimension(v, f.dimension(), "fd_oracle direction v");
  const double scale = detail::fd_scale(x);
  Jet2 jet;
  jet.value = f(x);
  jet.first = detail::fd_first(f, x, v, cfg.first_step * scale);
  const double h = cfg.second_step * scale;
  jet.second = detail::fd_second(f, x, u, v, h, h, false);
  detail::check_finite_output(jet.first, f);
  detail::check_finite_output(jet.second, f);
  return jet;
}

/// Full Jacobian D_x f, assembled column by column from directional derivatives.
inline Mat jacobian(const SmoothMap& f, const Vec& x, const FDConfig& cfg = {}) {
  const Eigen::Index d = f.dimension();
  Mat J(d, d);
  for (Eigen::Index k = 0; k < d; ++k) J.col(k) = push_jet1(f, x, Vec::Unit(d, k), cfg).deriv;
  return J;
}

/// g o f with chain-rule derivatives:
/// D(g o f) v = Dg (Df v),  D^2(g o f)(u, v) = D^2 g(Df u, Df v) + Dg D^2 f(u, v).
inline SmoothMap compose(const SmoothMap& f, const SmoothMap& g) {
  if (f.dimension() != g.dimension()) throw DimensionError("compose: dimension mismatch");
  SmoothMap h(
      f.dimension(), [f, g](const Vec& x) { return g(f(x)); }, g.name() + "∘" + f.name());
  h = h.with_derivative([f, g](const Vec& x, const Vec& v) {
         const Jet1 jf = push_jet1(f, x, v);
         return push_jet1(g, jf.value, jf.deriv).deriv;
       })
          .with_second_derivative([f, g](const Vec& x, const Vec& u, const Vec& v) {
            const Jet2 jf = push_jet2(f, x, u, v);
            const Vec fu = push_jet1(f, x, u).deriv;
            const Jet2 jg = push_jet2(g, jf.value, fu, jf.first);
            return Vec(jg.second + push_jet1(g, jf.value, jf.second).deriv);
          });
  if (f.region()) h = h.with_region(*f.region());
  if (f.has_inverse() && g.has_inverse()) {
    h = h.with_inverse([f, g](const Vec& y) { return f.inverse(g.inverse(y)); });
  }
  return h;
}

}  // namespace bdp
