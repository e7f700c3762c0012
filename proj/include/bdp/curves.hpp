#pragma once

/**
 * @file curves.hpp
 * @brief Regular C^1 curves: length, maximal tangent angle, arc-length
 * reparameterization and pushforward under maps.
 *
 * Tangents are carried as (unit direction, log speed) pairs in sample tables so
 * that long compositions of contracting or expanding maps neither underflow nor
 * overflow. Pushforward tangents are always propagated by the chain rule.
 */

#include "jets.hpp"

#include <functional>
#include <numbers>
#include <vector>

namespace bdp {

class ParamCurve {
 public:
  using PositionFn = std::function<Vec(double)>;
  using TangentFn = std::function<Vec(double)>;

  static constexpr int kDefaultResolution = 512;

  ParamCurve(double a, double b, PositionFn position, TangentFn tangent, int sample_resolution = kDefaultResolution)
      : a_(a), b_(b), position_(std::move(position)), tangent_(std::move(tangent)), resolution_(sample_resolution) {
    if (!(a < b)) throw InputError("ParamCurve: domain must satisfy a < b");
    if (!position_ || !tangent_) throw InputError("ParamCurve: position and tangent are required");
    if (resolution_ < 2) throw InputError("ParamCurve: sample resolution must be >= 2");
  }

  double a() const { return a_; }
  double b() const { return b_; }
  Eigen::Index dimension() const { return position_(a_).size(); }
  int sample_resolution() const { return resolution_; }

  Vec position(double t) const { return position_(t); }
  Vec tangent(double t) const { return tangent_(t); }

  /// Same curve restricted to [lo, hi] within the domain.
  ParamCurve restricted(double lo, double hi) const {
    if (!(lo >= a_ && hi <= b_ && lo < hi)) throw InputError("ParamCurve::restricted: subinterval outside domain");
    return ParamCurve(lo, hi, position_, tangent_, resolution_);
  }

 private:
  double a_;
  double b_;
  PositionFn position_;
  TangentFn tangent_;
  int resolution_;
};

// =============================================================================
// Builtin curves
// =============================================================================

/// Straight segment from p to q, parameter in [0, 1].
inline ParamCurve segment_curve(const Vec& p, const Vec& q) {
  const Vec dir = q - p;
  return ParamCurve(
      0.0, 1.0, [p, dir](double t) -> Vec { return p + t * dir; }, [dir](double) -> Vec { return dir; });
}

/// Planar circle arc c + r (cos t, sin t), t in [t0, t1].
inline ParamCurve circle_arc(const Vec& center, double radius, double t0, double t1) {
  require_dimension(center, 2, "circle_arc center");
  if (!(radius > 0.0)) throw InputError("circle_arc: radius must be > 0");
  return ParamCurve(
      t0, t1,
      [center, radius](double t) -> Vec {
        Vec p(2);
        p << center[0] + radius * std::cos(t), center[1] + radius * std::sin(t);
        return p;
      },
      [radius](double t) -> Vec {
        Vec v(2);
        v << -radius * std::sin(t), radius * std::cos(t);
        return v;
      });
}

/// gamma(t) = sum_k coeffs[k] t^k (coeffs[k] in R^d), t in [a, b].
inline ParamCurve polynomial_curve(std::vector<Vec> coeffs, double a, double b) {
  if (coeffs.empty()) throw InputError("polynomial_curve: need at least one coefficient vector");
  for (const auto& c : coeffs) require_dimension(c, coeffs.front().size(), "polynomial_curve coefficient");
  auto cs = std::make_shared<const std::vector<Vec>>(std::move(coeffs));
  return ParamCurve(
      a, b,
      [cs](double t) -> Vec {
        Vec p = Vec::Zero(cs->front().size());
        for (auto k = cs->size(); k-- > 0;) p = p * t + (*cs)[k];
        return p;
      },
      [cs](double t) -> Vec {
        Vec v = Vec::Zero(cs->front().size());
        for (auto k = cs->size(); k-- > 1;) v = v * t + static_cast<double>(k) * (*cs)[k];
        return v;
      });
}

// =============================================================================
// Sample tables
// =============================================================================

/// Curve sampled at increasing parameters; tangent = exp(log_speed) * direction.
struct CurveSamples {
  std::vector<double> params;
  std::vector<Vec> positions;
  std::vector<Vec> directions;
  std::vector<double> log_speeds;

  std::size_t size() const { return params.size(); }
};

namespace detail {

inline void append_sample(CurveSamples& s, double t, Vec position, const Vec& tangent) {
  const double speed = tangent.norm();
  if (!(speed > 0.0) || !std::isfinite(speed) || !all_finite(position)) {
    throw RegularityError("curve tangent vanishes or is non-finite at t = " + std::to_string(t));
  }
  s.params.push_back(t);
  s.positions.push_back(std::move(position));
  s.directions.push_back(tangent / speed);
  s.log_speeds.push_back(std::log(speed));
}

inline int even_at_least_two(int n) { return std::max(2, n + (n % 2)); }

}  // namespace detail

/// `nodes` equally spaced samples over [lo, hi] including both ends.
inline CurveSamples sample_curve(const ParamCurve& c, std::size_t nodes, double lo, double hi) {
  if (nodes < 2) throw InputError("sample_curve: need at least two nodes");
  CurveSamples s;
  s.params.reserve(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    const double t = (k + 1 == nodes) ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(nodes - 1);
    detail::append_sample(s, t, c.position(t), c.tangent(t));
  }
  return s;
}

inline CurveSamples sample_curve(const ParamCurve& c, std::size_t nodes) { return sample_curve(c, nodes, c.a(), c.b()); }

/// Length of a sampled curve with its error indicator.
struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  ///< |S_fine - S_coarse|, a conservative allowance
};

/// Composite Simpson on the fine grid and on every other node, then one Richardson
/// step. Needs an odd node count 2N + 1 with N even.
inline QuadratureResult simpson_length(const CurveSamples& s) {
  const std::size_t m = s.size();
  if (m < 5 || (m - 1) % 4 != 0) throw InputError("simpson_length: node count must be 4k + 1");
  const double h = (s.params.back() - s.params.front()) / static_cast<double>(m - 1);
  auto speed = [&](std::size_t k) { return std::exp(s.log_speeds[k]); };
  auto simpson = [&](std::size_t step) {
    double sum = speed(0) + speed(m - 1);
    for (std::size_t k = step, j = 1; k < m - 1; k += step, ++j) sum += (j % 2 == 1 ? 4.0 : 2.0) * speed(k);
    return sum * (h * static_cast<double>(step)) / 3.0;
  };
  const double fine = simpson(1);
  const double coarse = simpson(2);
  return {fine + (fine - coarse) / 15.0, std::abs(fine - coarse)};
}

/// Largest angle between any two sampled unit tangents.
/// Pairs are ranked by ||u - v||^2 and the winner's angle is 2 atan2(||u - v||, ||u + v||),
/// which stays accurate for nearly parallel and nearly opposite tangents.
inline double max_angle(const CurveSamples& s) {
  const std::size_t m = s.directions.size();
  if (m == 0) return 0.0;
  const Eigen::Index d = s.directions.front().size();
  Mat dirs(d, static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) dirs.col(static_cast<Eigen::Index>(k)) = s.directions[k];
  double best = -1.0;
  Eigen::Index bi = 0, bj = 0;
  for (Eigen::Index i = 0; i < dirs.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < dirs.cols(); ++j) {
      const double dist2 = (dirs.col(i) - dirs.col(j)).squaredNorm();
      if (dist2 > best) {
        best = dist2;
        bi = i;
        bj = j;
      }
    }
  }
  if (best <= 0.0) return 0.0;
  return 2.0 * std::atan2((dirs.col(bi) - dirs.col(bj)).norm(), (dirs.col(bi) + dirs.col(bj)).norm());
}

/// L(gamma) = integral of ||gamma'|| by composite Simpson with one Richardson refinement.
/// `resolution` is rounded up to an even count of coarse intervals.
inline QuadratureResult length_estimate(const ParamCurve& c, int resolution) {
  const int n = detail::even_at_least_two(resolution);
  return simpson_length(sample_curve(c, static_cast<std::size_t>(2 * n + 1)));
}

inline double length(const ParamCurve& c, int resolution = ParamCurve::kDefaultResolution) {
  return length_estimate(c, resolution).value;
}

/// Sampled sup of tangent angles over resolution + 1 equally spaced parameters.
/// A lower bound of the true sup over the continuum.
inline double max_angle(const ParamCurve& c, int resolution = ParamCurve::kDefaultResolution) {
  if (resolution < 1) throw InputError("max_angle: resolution must be >= 1");
  return max_angle(sample_curve(c, static_cast<std::size_t>(resolution) + 1));
}

// =============================================================================
// Natural parameterization
// =============================================================================

/// Unit-speed reparameterization of a regular curve over [0, total length].
///
/// The arc table stores cumulative length at equally spaced original parameters.
/// Arc -> original parameter is inverted with cubic Hermite interpolation using the
/// exact slopes dt/ds = 1 / ||gamma'(t)||; tangents are the normalized original
/// tangents, so ||gamma'(s)|| = 1 up to rounding.
class NaturalCurve {
 public:
  NaturalCurve(ParamCurve base, std::vector<double> t_table, std::vector<double> s_table, std::vector<double> speeds)
      : base_(std::move(base)), t_(std::move(t_table)), s_(std::move(s_table)), speed_(std::move(speeds)) {}

  const ParamCurve& original() const { return base_; }
  double total_length() const { return s_.back(); }
  Eigen::Index dimension() const { return base_.dimension(); }
  const std::vector<double>& original_params() const { return t_; }
  const std::vector<double>& arc_table() const { return s_; }

  /// Arc parameter of original parameter t.
  double locate(double t) const {
    if (t <= t_.front()) return 0.0;
    if (t >= t_.back()) return s_.back();
    const std::size_t k = cell_of(t_, t);
    return hermite(t_[k], t_[k + 1], s_[k], s_[k + 1], speed_[k], speed_[k + 1], t);
  }

  /// Original parameter at arc length s.
  double original_parameter(double s) const {
    if (s <= 0.0) return t_.front();
    if (s >= s_.back()) return t_.back();
    const std::size_t k = cell_of(s_, s);
    const double t = hermite(s_[k], s_[k + 1], t_[k], t_[k + 1], 1.0 / speed_[k], 1.0 / speed_[k + 1], s);
    return std::clamp(t, t_[k], t_[k + 1]);
  }

  Vec position(double s) const { return base_.position(original_parameter(s)); }

  Vec tangent(double s) const {
    const Vec v = base_.tangent(original_parameter(s));
    const double n = v.norm();
    if (!(n > 0.0)) throw RegularityError("natural curve: vanishing tangent");
    return v / n;
  }

  /// The unit-speed curve as a ParamCurve on [0, total_length()].
  ParamCurve as_param_curve() const {
    auto self = std::make_shared<const NaturalCurve>(*this);
    return ParamCurve(
        0.0, total_length(), [self](double s) { return self->position(s); }, [self](double s) { return self->tangent(s); },
        base_.sample_resolution());
  }

 private:
  static std::size_t cell_of(const std::vector<double>& xs, double x) {
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const auto k = static_cast<std::size_t>(std::distance(xs.begin(), it));
    return std::min(std::max<std::size_t>(k, 1), xs.size() - 1) - 1;
  }

  static double hermite(double x0, double x1, double y0, double y1, double m0, double m1, double x) {
    const double h = x1 - x0;
    const double u = (x - x0) / h;
    const double u2 = u * u;
    const double u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * h * m0 + (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * h * m1;
  }

  ParamCurve base_;
  std::vector<double> t_;
  std::vector<double> s_;
  std::vector<double> speed_;
};

/// Arc-length reparameterization with a table of `resolution` cells; each cell's
/// length is integrated with Simpson's rule on its endpoints and midpoint.
inline NaturalCurve reparameterize_natural(const ParamCurve& c, int resolution = ParamCurve::kDefaultResolution) {
  if (resolution < 1) throw InputError("reparameterize_natural: resolution must be >= 1");
  const auto cells = static_cast<std::size_t>(resolution);
  std::vector<double> ts(cells + 1), ss(cells + 1), speeds(cells + 1);
  auto speed_at = [&](double t) {
    const double v = c.tangent(t).norm();
    if (!(v > 0.0) || !std::isfinite(v)) throw RegularityError("curve tangent vanishes at t = " + std::to_string(t));
    return v;
  };
  const double h = (c.b() - c.a()) / static_cast<double>(cells);
  for (std::size_t k = 0; k <= cells; ++k) {
    ts[k] = (k == cells) ? c.b() : c.a() + h * static_cast<double>(k);
    speeds[k] = speed_at(ts[k]);
  }
  ss[0] = 0.0;
  for (std::size_t k = 0; k < cells; ++k) {
    const double mid = speed_at(0.5 * (ts[k] + ts[k + 1]));
    ss[k + 1] = ss[k] + (ts[k + 1] - ts[k]) / 6.0 * (speeds[k] + 4.0 * mid + speeds[k + 1]);
  }
  return NaturalCurve(c, std::move(ts), std::move(ss), std::move(speeds));
}

// =============================================================================
// Pushforward
// =============================================================================

/// t -> f(gamma(t)) with tangent D_{gamma(t)} f . gamma'(t).
inline ParamCurve pushforward(const ParamCurve& c, const SmoothMap& f, const FDConfig& cfg = {}) {
  require_dimension(c.position(c.a()), f.dimension(), "pushforward");
  return ParamCurve(
      c.a(), c.b(), [c, f](double t) { return f(c.position(t)); },
      [c, f, cfg](double t) {
        Vec w = push_jet1(f, c.position(t), c.tangent(t), cfg).deriv;
        if (!(w.norm() > 0.0)) {
          throw SingularJacobianError("pushforward tangent vanishes at t = " + std::to_string(t) +
                                      " (Jacobian of '" + f.name() + "' is singular)");
        }
        return w;
      },
      c.sample_resolution());
}

/// Pushes a sample table through f; log speeds accumulate log ||Df . direction||.
inline CurveSamples pushforward(const CurveSamples& s, const SmoothMap& f, const FDConfig& cfg = {}) {
  CurveSamples out;
  out.params = s.params;
  out.positions.reserve(s.size());
  out.directions.reserve(s.size());
  out.log_speeds.reserve(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    const Jet1 j = push_jet1(f, s.positions[k], s.directions[k], cfg);
    const double n = j.deriv.norm();
    if (!(n > 0.0)) {
      throw SingularJacobianError("pushforward tangent vanishes (Jacobian of '" + f.name() + "' is singular)");
    }
    out.positions.push_back(j.value);
    out.directions.push_back(j.deriv / n);
    out.log_speeds.push_back(s.log_speeds[k] + std::log(n));
  }
  return out;
}

}  // namespace bdp
