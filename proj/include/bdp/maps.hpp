#pragma once

/**
 * @file maps.hpp
 * @brief Orbits of map sequences, matrix norms, and seminorm estimates over a region.
 *
 * Sampled seminorms are maxima over a finite grid, i.e. lower bounds of the true
 * suprema. When a map carries AnalyticBounds, estimate_seminorms returns those
 * instead and labels the result analytic.
 */

#include "jets.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace bdp {

/// Orbit [x, F_1(x), ..., F_n(x)]. An evaluation outside a map's region reports the
/// 1-based index of the failing map.
inline std::vector<Point> apply_sequence(const MapSequence& seq, const Point& x) {
  require_dimension(x, seq.dimension(), "apply_sequence");
  std::vector<Point> orbit;
  orbit.reserve(seq.size() + 1);
  orbit.push_back(x);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    try {
      orbit.push_back(seq[i](orbit.back()));
    } catch (const OutOfRegionError& e) {
      throw OutOfRegionError(e.what(), i + 1);
    }
  }
  return orbit;
}

/// Largest singular value (operator norm induced by the Euclidean norm).
inline double operator_norm(const Mat& A) {
  if (A.size() == 0) return 0.0;
  const Eigen::JacobiSVD<Mat> svd(A);
  return svd.singularValues()(0);
}

/// Relative determinant threshold below which a Jacobian counts as singular.
inline constexpr double kSingularityThreshold = 1e-14;

/// ||A^-1|| for a square matrix; throws SingularJacobianError when |det A| / ||A||^d
/// falls below kSingularityThreshold.
inline double inverse_operator_norm(const Mat& A) {
  const Eigen::JacobiSVD<Mat> svd(A);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smax > 0.0)) throw SingularJacobianError("Jacobian is zero");
  double relative_det = 1.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) relative_det *= sv(i) / smax;
  if (relative_det < kSingularityThreshold) {
    throw SingularJacobianError("Jacobian determinant vanishes (relative " + std::to_string(relative_det) + ")");
  }
  return 1.0 / smin;
}

/// ||(D_x f)^-1||.
inline double inverse_jacobian_norm(const SmoothMap& f, const Point& x, const FDConfig& cfg = {}) {
  return inverse_operator_norm(jacobian(f, x, cfg));
}

struct HolderEstimate {
  double epsilon = 0.5;
  double value = 0.0;
};

struct SeminormEstimate {
  double c1 = 0.0;      ///< ||f||_1
  double c1_inv = 0.0;  ///< ||f^-1||_1 (infinite when the Jacobian is singular somewhere)
  double c2 = 0.0;      ///< ||f||_2
  std::optional<HolderEstimate> holder;
  Box region;
  Provenance provenance = Provenance::sampled;
  Provenance holder_provenance = Provenance::sampled;
  int resolution = 0;  ///< grid points per axis (0 for analytic)
  bool singular = false;

  /// max(c1, c1_inv, c2): the constant of the C^2 hypothesis.
  double constant() const { return std::max({c1, c1_inv, c2}); }
  /// max(c1, c1_inv, ||Df||_eps): the constant of the C^{1+eps} hypothesis.
  double holder_constant() const {
    if (!holder) throw InputError("SeminormEstimate: no Holder estimate available");
    return std::max({c1, c1_inv, holder->value});
  }
};

namespace detail {

/// Regular grid with `resolution` points per axis, lexicographic order.
inline std::vector<Vec> grid_points(const Box& region, int resolution) {
  const Eigen::Index d = region.dimension();
  std::size_t total = 1;
  for (Eigen::Index i = 0; i < d; ++i) total *= static_cast<std::size_t>(resolution);
  std::vector<Vec> pts;
  pts.reserve(total);
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  for (std::size_t k = 0; k < total; ++k) {
    Vec x(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double frac = static_cast<double>(idx[static_cast<std::size_t>(i)]) / (resolution - 1);
      x[i] = region.lower[i] + frac * (region.upper[i] - region.lower[i]);
    }
    pts.push_back(std::move(x));
    for (Eigen::Index i = d - 1; i >= 0; --i) {
      if (++idx[static_cast<std::size_t>(i)] < resolution) break;
      idx[static_cast<std::size_t>(i)] = 0;
    }
  }
  return pts;
}

/// Deterministic unit-vector pairs for the second-seminorm sup: axis pairs,
/// diagonals, and 32 pairs from a Kronecker (additive recurrence) sequence.
inline std::vector<std::pair<Vec, Vec>> direction_pairs(Eigen::Index d) {
  std::vector<std::pair<Vec, Vec>> pairs;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) pairs.emplace_back(Vec::Unit(d, i), Vec::Unit(d, j));
  }
  if (d > 1) {
    const Vec diag = Vec::Ones(d).normalized();
    Vec alt(d);
    for (Eigen::Index i = 0; i < d; ++i) alt[i] = (i % 2 == 0) ? 1.0 : -1.0;
    alt.normalize();
    pairs.emplace_back(diag, diag);
    pairs.emplace_back(alt, alt);
    pairs.emplace_back(diag, alt);
    // Kronecker sequence with irrational steps sqrt(p) for the first primes
    static constexpr std::array<double, 6> primes{2.0, 3.0, 5.0, 7.0, 11.0, 13.0};
    for (int k = 1; k <= 32; ++k) {
      Vec u(d), v(d);
      for (Eigen::Index i = 0; i < 2 * d; ++i) {
        const double alpha = std::sqrt(primes[static_cast<std::size_t>(i % 6)]) + static_cast<double>(i / 6);
        double frac = std::fmod(0.5 + k * alpha, 1.0);
        const double c = 2.0 * frac - 1.0;
        if (i < d) u[i] = c;
        else v[i - d] = c;
      }
      if (u.norm() < 1e-3 || v.norm() < 1e-3) continue;
      pairs.emplace_back(u.normalized(), v.normalized());
    }
  }
  return pairs;
}

inline constexpr std::size_t kMaxHolderPairs = 100000;

}  // namespace detail

/// Grid estimate of the seminorms on `region` (always sampled, ignores annotations).
/// `resolution` is the number of grid points per axis (>= 2).
inline SeminormEstimate sample_seminorms(const SmoothMap& f, const Box& region, int resolution,
                                         std::optional<double> epsilon = std::nullopt, const FDConfig& cfg = {}) {
  require_dimension(region.lower, f.dimension(), "estimate_seminorms region");
  if (region.degenerate()) throw InputError("estimate_seminorms: region must be nondegenerate");
  if (resolution < 2) throw InputError("estimate_seminorms: resolution must be >= 2 per axis");
  if (epsilon && !(*epsilon > 0.0 && *epsilon < 1.0)) throw InputError("estimate_seminorms: epsilon must lie in (0,1)");

  const Eigen::Index d = f.dimension();
  const auto pts = detail::grid_points(region, resolution);
  const auto dirs = detail::direction_pairs(d);

  SeminormEstimate est;
  est.region = region;
  est.resolution = resolution;
  est.provenance = Provenance::sampled;
  est.holder_provenance = Provenance::sampled;

  std::vector<Mat> jacobians;
  jacobians.reserve(pts.size());
  for (const auto& x : pts) {
    Mat J = jacobian(f, x, cfg);
    est.c1 = std::max(est.c1, operator_norm(J));
    try {
      est.c1_inv = std::max(est.c1_inv, inverse_operator_norm(J));
    } catch (const SingularJacobianError&) {
      est.singular = true;
      est.c1_inv = std::numeric_limits<double>::infinity();
    }
    for (const auto& [u, v] : dirs) {
      est.c2 = std::max(est.c2, push_jet2(f, x, u, v, cfg).second.norm());
    }
    jacobians.push_back(std::move(J));
  }

  if (epsilon) {
    // every distinct grid pair is at least one grid spacing apart
    const std::size_t m = pts.size();
    const std::size_t total = m * (m - 1) / 2;
    const std::size_t stride = std::max<std::size_t>(1, (total + detail::kMaxHolderPairs - 1) / detail::kMaxHolderPairs);
    double best = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j, ++k) {
        if (k % stride != 0) continue;
        const double dist = (pts[i] - pts[j]).norm();
        const double diff = operator_norm(jacobians[i] - jacobians[j]);
        best = std::max(best, diff / std::pow(dist, *epsilon));
      }
    }
    est.holder = HolderEstimate{*epsilon, best};
  }
  return est;
}

/// Seminorms on `region`: the map's analytic bounds when it carries them, otherwise
/// a grid estimate (see sample_seminorms).
inline SeminormEstimate estimate_seminorms(const SmoothMap& f, const Box& region, int resolution,
                                           std::optional<double> epsilon = std::nullopt, const FDConfig& cfg = {}) {
  if (!f.bounds()) return sample_seminorms(f, region, resolution, epsilon, cfg);
  require_dimension(region.lower, f.dimension(), "estimate_seminorms region");
  if (epsilon && !(*epsilon > 0.0 && *epsilon < 1.0)) throw InputError("estimate_seminorms: epsilon must lie in (0,1)");
  const auto& b = *f.bounds();
  SeminormEstimate est;
  est.c1 = b.c1;
  est.c1_inv = b.c1_inv;
  est.c2 = b.c2;
  est.region = region;
  est.provenance = Provenance::analytic;
  est.holder_provenance = Provenance::analytic;
  est.singular = !std::isfinite(b.c1_inv);
  if (epsilon) {
    double h = holder_bound(b, f.region() ? f.region() : std::optional<Box>(region), *epsilon);
    if (!std::isfinite(h)) {
      h = sample_seminorms(f, region, resolution, epsilon, cfg).holder->value;
      est.holder_provenance = Provenance::sampled;
    }
    est.holder = HolderEstimate{*epsilon, h};
  }
  return est;
}

}  // namespace bdp
