#pragma once

/**
 * @file core.hpp
 * @brief Shared vocabulary: vectors, regions, provenance flags and the error hierarchy.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace bdp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// State-space point. Coordinates must be finite wherever a point enters the library.
using Point = Vec;

// =============================================================================
// Errors
// =============================================================================

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid caller input (degenerate intervals, bad counts, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Evaluation outside a map's validity region, or a non-finite map output.
class OutOfRegionError : public Error {
 public:
  explicit OutOfRegionError(const std::string& what, std::optional<std::size_t> step = std::nullopt)
      : Error(step ? what + " (step " + std::to_string(*step) + ")" : what), step_(step) {}

  std::optional<std::size_t> step() const noexcept { return step_; }

 private:
  std::optional<std::size_t> step_;
};

/// Jacobian with (relatively) vanishing determinant: the invertibility hypothesis fails.
class SingularJacobianError : public Error {
 public:
  using Error::Error;
};

/// A curve tangent vanished or became non-finite.
class RegularityError : public Error {
 public:
  using Error::Error;
};

/// A distortion hypothesis failed outright at a specific step (e.g. f' changes sign).
class HypothesisViolation : public Error {
 public:
  HypothesisViolation(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// =============================================================================
// Small value types
// =============================================================================

/// Where a constant came from. `measured` is a computed quantity (interval images,
/// quadrature); `sampled` is a max over a finite grid and hence a lower bound of a sup.
enum class Provenance { analytic, measured, sampled };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::analytic: return "analytic";
    case Provenance::measured: return "measured";
    case Provenance::sampled: return "sampled";
  }
  return "unknown";
}

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const { return std::abs(hi - lo); }
  bool contains(const Interval& other, double tol = 0.0) const {
    return other.lo >= lo - tol && other.hi <= hi + tol;
  }
};

/// Axis-aligned box in R^d.
struct Box {
  Vec lower;
  Vec upper;

  Box() = default;
  Box(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size()) throw DimensionError("Box: lower/upper dimension mismatch");
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
      if (!(lower[i] <= upper[i])) throw InputError("Box: lower bound exceeds upper bound");
    }
  }

  /// Cube [lo, hi]^d.
  static Box cube(Eigen::Index d, double lo, double hi) {
    return Box(Vec::Constant(d, lo), Vec::Constant(d, hi));
  }

  Eigen::Index dimension() const { return lower.size(); }

  /// Inclusive membership with a small slack scaled to the box size.
  bool contains(const Vec& x) const {
    if (x.size() != lower.size()) return false;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double slack = 1e-12 * std::max({1.0, std::abs(lower[i]), std::abs(upper[i])});
      if (x[i] < lower[i] - slack || x[i] > upper[i] + slack) return false;
    }
    return true;
  }

  double diameter() const { return (upper - lower).norm(); }

  bool degenerate() const { return ((upper - lower).array() <= 0.0).any(); }
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }

inline void require_dimension(const Vec& v, Eigen::Index d, const char* what) {
  if (v.size() != d) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(d) + ", got " +
                         std::to_string(v.size()));
  }
}

}  // namespace bdp
