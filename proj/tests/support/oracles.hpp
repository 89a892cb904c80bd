#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include "eegdgr/linalg.hpp"
#include "eegdgr/random.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

namespace eegdgr::testing {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, SplitMix64& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

// R R^T + shift * I, well conditioned for shift > 0.
inline Matrix random_spd(Eigen::Index n, SplitMix64& rng, double shift = 0.1) {
  const Matrix r = random_matrix(n, n, rng);
  return r * r.transpose() + shift * Matrix::Identity(n, n);
}

inline Matrix random_symmetric(Eigen::Index n, SplitMix64& rng) {
  const Matrix r = random_matrix(n, n, rng);
  return (r + r.transpose()) / 2.0;
}

inline double rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

// Central difference of f with respect to m(i, j).
inline double central_diff(const std::function<double()>& f, double& x, double h = 1e-5) {
  const double saved = x;
  x = saved + h;
  const double up = f();
  x = saved - h;
  const double down = f();
  x = saved;
  return (up - down) / (2.0 * h);
}

// Fraction of (positive, negative) pairs where the positive scores higher,
// ties counted as one half. Empty when either side is absent.
inline std::optional<double> pairwise_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!positive[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (positive[j]) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) {
        wins += 1.0;
      } else if (scores[i] == scores[j]) {
        wins += 0.5;
      }
    }
  }
  if (pairs == 0.0) return std::nullopt;
  return wins / pairs;
}

// Re-scans the prediction history: after each push, looks at the predictions
// since the last emission, keeps the most recent `window`, and emits any
// class occurring at least `threshold` times there.
inline std::vector<std::optional<int>> brute_force_votes(const std::vector<int>& preds, std::size_t window = 10,
                                                         int threshold = 7) {
  std::vector<std::optional<int>> out;
  std::size_t since = 0;
  for (std::size_t t = 0; t < preds.size(); ++t) {
    const std::size_t begin = std::max(since, t + 1 >= window ? t + 1 - window : std::size_t{0});
    std::optional<int> emitted;
    for (std::size_t k = begin; k <= t; ++k) {
      const int c = preds[k];
      const auto n = std::count(preds.begin() + static_cast<std::ptrdiff_t>(begin),
                                preds.begin() + static_cast<std::ptrdiff_t>(t + 1), c);
      if (n >= threshold) emitted = c;
    }
    if (emitted) since = t + 1;
    out.push_back(emitted);
  }
  return out;
}

}  // namespace eegdgr::testing
