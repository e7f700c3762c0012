#pragma once

/**
 * @file smooth_map.hpp
 * @brief The map abstraction f: R^d -> R^d and ordered sequences of maps.
 *
 * A SmoothMap always has an evaluator. First and second directional derivative
 * callbacks, an explicit inverse, a validity region and analytic seminorm bounds
 * are optional; missing derivatives fall back to finite differences (see jets.hpp).
 *
 * Maps are immutable values with shared internals, so copying is cheap and copies
 * compare equal under identity().
 */

#include "core.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

namespace bdp {

/// Closed-form seminorm bounds valid on the map's region.
struct AnalyticBounds {
  double c1 = 0.0;      ///< sup ||D_x f||
  double c1_inv = 0.0;  ///< sup ||(D_x f)^-1||
  double c2 = 0.0;      ///< sup ||D^2_x f(u,v)|| over unit u, v
  /// epsilon -> ||Df||_eps. Empty means "derive from c2 and the region diameter".
  std::function<double(double)> holder;
};

class SmoothMap {
 public:
  using Eval = std::function<Vec(const Vec&)>;
  /// (x, v) -> D_x f . v
  using Deriv1 = std::function<Vec(const Vec&, const Vec&)>;
  /// (x, u, v) -> D^2_x f(u, v): derivative along v of x -> D_x f . u
  using Deriv2 = std::function<Vec(const Vec&, const Vec&, const Vec&)>;

  SmoothMap(Eigen::Index dimension, Eval f, std::string name = "map") {
    if (dimension < 1) throw DimensionError("SmoothMap: dimension must be >= 1");
    if (!f) throw InputError("SmoothMap: evaluator is required");
    auto impl = std::make_shared<Impl>();
    impl->dimension = dimension;
    impl->eval = std::move(f);
    impl->name = std::move(name);
    impl_ = std::move(impl);
  }

  [[nodiscard]] SmoothMap with_derivative(Deriv1 d1) const {
    return modified([&](Impl& m) { m.d1 = std::move(d1); });
  }
  [[nodiscard]] SmoothMap with_second_derivative(Deriv2 d2) const {
    return modified([&](Impl& m) { m.d2 = std::move(d2); });
  }
  [[nodiscard]] SmoothMap with_inverse(Eval inv) const {
    return modified([&](Impl& m) { m.inverse = std::move(inv); });
  }
  [[nodiscard]] SmoothMap with_region(Box region) const {
    require_dimension(region.lower, dimension(), "SmoothMap::with_region");
    return modified([&](Impl& m) { m.region = std::move(region); });
  }
  [[nodiscard]] SmoothMap with_bounds(AnalyticBounds bounds) const {
    return modified([&](Impl& m) { m.bounds = std::move(bounds); });
  }
  [[nodiscard]] SmoothMap with_name(std::string name) const {
    return modified([&](Impl& m) { m.name = std::move(name); });
  }

  Eigen::Index dimension() const { return impl_->dimension; }
  const std::string& name() const { return impl_->name; }
  const std::optional<Box>& region() const { return impl_->region; }
  const std::optional<AnalyticBounds>& bounds() const { return impl_->bounds; }
  bool has_derivative() const { return static_cast<bool>(impl_->d1); }
  bool has_second_derivative() const { return static_cast<bool>(impl_->d2); }
  bool has_inverse() const { return static_cast<bool>(impl_->inverse); }

  /// Same underlying definition (copies share identity).
  const void* identity() const { return impl_.get(); }

  bool in_region(const Vec& x) const { return !impl_->region || impl_->region->contains(x); }

  /// f(x) with dimension, region and finiteness checks.
  Vec operator()(const Vec& x) const {
    check_input(x, "SmoothMap");
    Vec y = impl_->eval(x);
    check_output(y);
    return y;
  }

  /// Raw evaluation without the region check (finite-difference stencils may
  /// step slightly outside a closed region).
  Vec evaluate_unchecked(const Vec& x) const {
    Vec y = impl_->eval(x);
    check_output(y);
    return y;
  }

  Vec analytic_derivative(const Vec& x, const Vec& v) const { return impl_->d1(x, v); }
  Vec analytic_second_derivative(const Vec& x, const Vec& u, const Vec& v) const {
    return impl_->d2(x, u, v);
  }

  Vec inverse(const Vec& y) const {
    if (!impl_->inverse) throw InputError("SmoothMap '" + name() + "' has no inverse");
    require_dimension(y, dimension(), "SmoothMap::inverse");
    return impl_->inverse(y);
  }

  void check_input(const Vec& x, const char* what) const {
    require_dimension(x, dimension(), what);
    if (!all_finite(x)) throw OutOfRegionError(std::string(what) + ": non-finite point");
    if (!in_region(x)) throw OutOfRegionError("point outside the validity region of '" + name() + "'");
  }

 private:
  struct Impl {
    Eigen::Index dimension = 0;
    Eval eval;
    Deriv1 d1;
    Deriv2 d2;
    Eval inverse;
    std::optional<Box> region;
    std::optional<AnalyticBounds> bounds;
    std::string name;
  };

  struct FromImpl {};
  SmoothMap(FromImpl, std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  template <class Fn>
  SmoothMap modified(Fn&& fn) const {
    auto copy = std::make_shared<Impl>(*impl_);
    fn(*copy);
    return SmoothMap(FromImpl{}, std::shared_ptr<const Impl>(std::move(copy)));
  }

  void check_output(const Vec& y) const {
    if (y.size() != dimension()) throw DimensionError("map '" + name() + "' returned wrong dimension");
    if (!all_finite(y)) throw OutOfRegionError("non-finite value from map '" + name() + "'");
  }

  std::shared_ptr<const Impl> impl_;
};

/// Holder seminorm implied by the bounds: explicit callback, else c2 * diam^(1-eps)
/// (mean value inequality on a convex region). Infinite when the region is unbounded.
inline double holder_bound(const AnalyticBounds& b, const std::optional<Box>& region, double epsilon) {
  if (b.holder) return b.holder(epsilon);
  if (b.c2 == 0.0) return 0.0;
  if (!region) return std::numeric_limits<double>::infinity();
  return b.c2 * std::pow(region->diameter(), 1.0 - epsilon);
}

/// Ordered, nonempty list of maps of one dimension: f_1, ..., f_n.
class MapSequence {
 public:
  MapSequence() = default;
  explicit MapSequence(std::vector<SmoothMap> maps) : maps_(std::move(maps)) {
    if (maps_.empty()) throw InputError("MapSequence: at least one map is required");
    for (const auto& m : maps_) {
      if (m.dimension() != maps_.front().dimension()) {
        throw DimensionError("MapSequence: all maps must share one dimension");
      }
    }
  }

  /// n copies of the same map.
  static MapSequence repeat(const SmoothMap& f, std::size_t n) {
    return MapSequence(std::vector<SmoothMap>(n, f));
  }

  std::size_t size() const { return maps_.size(); }
  bool empty() const { return maps_.empty(); }
  Eigen::Index dimension() const { return maps_.empty() ? 0 : maps_.front().dimension(); }
  const SmoothMap& operator[](std::size_t i) const { return maps_[i]; }
  auto begin() const { return maps_.begin(); }
  auto end() const { return maps_.end(); }

 private:
  std::vector<SmoothMap> maps_;
};

// =============================================================================
// Builders
// =============================================================================

/// x -> A x + b, with exact derivatives, inverse and seminorm bounds.
inline SmoothMap affine_map(const Mat& A, const Vec& b, std::string name = "affine");

/// Planar rotation by `angle` radians about the origin.
inline SmoothMap rotation_map(double angle) {
  Mat R(2, 2);
  R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return affine_map(R, Vec::Zero(2), "rotation");
}

inline SmoothMap identity_map(Eigen::Index d) {
  return affine_map(Mat::Identity(d, d), Vec::Zero(d), "identity");
}

/// c * x_1^p_1 * ... * x_d^p_d
struct Monomial {
  double coefficient = 0.0;
  std::vector<int> powers;
};

/// One output coordinate of a polynomial map.
using Polynomial = std::vector<Monomial>;

namespace detail {

inline double ipow(double x, int p) {
  double r = 1.0;
  for (int k = 0; k < p; ++k) r *= x;
  return r;
}

/// d/dx_k^(order) of a monomial, evaluated at x; `shift` holds the derivative counts per axis.
inline double monomial_derivative(const Monomial& m, const Vec& x, const std::vector<int>& shift) {
  double value = m.coefficient;
  for (std::size_t i = 0; i < m.powers.size(); ++i) {
    const int p = m.powers[i];
    const int s = shift[i];
    if (s > p) return 0.0;
    double falling = 1.0;
    for (int k = 0; k < s; ++k) falling *= static_cast<double>(p - k);
    value *= falling * ipow(x[static_cast<Eigen::Index>(i)], p - s);
  }
  return value;
}

}  // namespace detail

/// Polynomial map with exact first and second directional derivatives.
inline SmoothMap polynomial_map(std::vector<Polynomial> components, std::string name = "polynomial") {
  const auto d = static_cast<Eigen::Index>(components.size());
  if (d < 1) throw DimensionError("polynomial_map: need at least one component");
  for (const auto& poly : components) {
    for (const auto& m : poly) {
      if (static_cast<Eigen::Index>(m.powers.size()) != d) {
        throw DimensionError("polynomial_map: monomial exponent list must have one entry per coordinate");
      }
      for (int p : m.powers) {
        if (p < 0) throw InputError("polynomial_map: negative exponent");
      }
    }
  }
  auto comps = std::make_shared<const std::vector<Polynomial>>(std::move(components));

  auto eval = [comps, d](const Vec& x) {
    Vec y = Vec::Zero(d);
    const std::vector<int> none(static_cast<std::size_t>(d), 0);
    for (Eigen::Index c = 0; c < d; ++c) {
      for (const auto& m : (*comps)[static_cast<std::size_t>(c)]) y[c] += detail::monomial_derivative(m, x, none);
    }
    return y;
  };
  auto d1 = [comps, d](const Vec& x, const Vec& v) {
    Vec y = Vec::Zero(d);
    std::vector<int> shift(static_cast<std::size_t>(d), 0);
    for (Eigen::Index c = 0; c < d; ++c) {
      for (const auto& m : (*comps)[static_cast<std::size_t>(c)]) {
        for (Eigen::Index k = 0; k < d; ++k) {
          if (v[k] == 0.0) continue;
          shift[static_cast<std::size_t>(k)] = 1;
          y[c] += v[k] * detail::monomial_derivative(m, x, shift);
          shift[static_cast<std::size_t>(k)] = 0;
        }
      }
    }
    return y;
  };
  auto d2 = [comps, d](const Vec& x, const Vec& u, const Vec& v) {
    Vec y = Vec::Zero(d);
    std::vector<int> shift(static_cast<std::size_t>(d), 0);
    for (Eigen::Index c = 0; c < d; ++c) {
      for (const auto& m : (*comps)[static_cast<std::size_t>(c)]) {
        for (Eigen::Index k = 0; k < d; ++k) {
          for (Eigen::Index l = 0; l < d; ++l) {
            const double w = u[k] * v[l];
            if (w == 0.0) continue;
            ++shift[static_cast<std::size_t>(k)];
            ++shift[static_cast<std::size_t>(l)];
            y[c] += w * detail::monomial_derivative(m, x, shift);
            --shift[static_cast<std::size_t>(k)];
            --shift[static_cast<std::size_t>(l)];
          }
        }
      }
    }
    return y;
  };
  return SmoothMap(d, eval, std::move(name)).with_derivative(d1).with_second_derivative(d2);
}

inline SmoothMap affine_map(const Mat& A, const Vec& b, std::string name) {
  if (A.rows() != A.cols() || A.rows() != b.size()) throw DimensionError("affine_map: A must be d x d and b in R^d");
  const Eigen::JacobiSVD<Mat> svd(A);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  AnalyticBounds bounds;
  bounds.c1 = smax;
  bounds.c1_inv = smin > 0.0 ? 1.0 / smin : std::numeric_limits<double>::infinity();
  bounds.c2 = 0.0;
  bounds.holder = [](double) { return 0.0; };
  SmoothMap m(
      A.rows(), [A, b](const Vec& x) -> Vec { return A * x + b; }, std::move(name));
  m = m.with_derivative([A](const Vec&, const Vec& v) -> Vec { return A * v; })
          .with_second_derivative([d = A.rows()](const Vec&, const Vec&, const Vec&) -> Vec { return Vec::Zero(d); })
          .with_bounds(bounds);
  if (smin > 0.0) {
    const Mat Ainv = A.inverse();
    m = m.with_inverse([Ainv, b](const Vec& y) -> Vec { return Ainv * (y - b); });
  }
  return m;
}

}  // namespace bdp
