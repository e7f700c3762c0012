#pragma once

// Helpers shared by the unit tests and the acceptance binary. Oracles here avoid the
// library's own derivative code.

#include "bdp/bdp.hpp"

#include <functional>
#include <random>

namespace bdp::test {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec random_vec(std::mt19937_64& rng, Eigen::Index d, double lo = -1.0, double hi = 1.0) {
  Vec v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = uniform(rng, lo, hi);
  return v;
}

inline Vec random_unit(std::mt19937_64& rng, Eigen::Index d) {
  Vec v;
  do {
    v = random_vec(rng, d);
  } while (v.norm() < 1e-3);
  return v.normalized();
}

/// Polynomial map with 1..5 monomials per component, total degree <= max_degree,
/// coefficients in [-1, 1].
inline std::vector<Polynomial> random_polynomial(std::mt19937_64& rng, int d, int max_degree) {
  std::vector<Polynomial> comps(static_cast<std::size_t>(d));
  std::uniform_int_distribution<int> count(1, 5);
  for (auto& poly : comps) {
    const int terms = count(rng);
    for (int t = 0; t < terms; ++t) {
      Monomial m;
      m.coefficient = uniform(rng, -1.0, 1.0);
      int budget = std::uniform_int_distribution<int>(0, max_degree)(rng);
      for (int i = 0; i < d; ++i) {
        const int p = std::uniform_int_distribution<int>(0, budget)(rng);
        m.powers.push_back(p);
        budget -= p;
      }
      poly.push_back(m);
    }
  }
  return comps;
}

/// The same function with every analytic callback and annotation removed.
inline SmoothMap strip_analytic(const SmoothMap& f) {
  return SmoothMap(
      f.dimension(), [f](const Vec& x) { return f.evaluate_unchecked(x); }, f.name() + "-plain");
}

/// ||a - b|| / max(||b||, 1).
inline double rel_err(const Vec& a, const Vec& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

/// Richardson-extrapolated central difference of an arbitrary function along v.
inline Vec richardson_derivative(const std::function<Vec(const Vec&)>& f, const Vec& x, const Vec& v, double h) {
  auto central = [&](double s) { return Vec((f(x + s * v) - f(x - s * v)) / (2.0 * s)); };
  return (4.0 * central(h / 2.0) - central(h)) / 3.0;
}

/// Largest singular value by power iteration on A^T A.
inline double power_iteration_norm(const Mat& A, int iterations = 500) {
  Vec v = Vec::Ones(A.cols()).normalized();
  double lambda = 0.0;
  for (int k = 0; k < iterations; ++k) {
    Vec w = A.transpose() * (A * v);
    lambda = w.norm();
    if (lambda == 0.0) return 0.0;
    v = w / lambda;
  }
  return std::sqrt(lambda);
}

}  // namespace bdp::test
