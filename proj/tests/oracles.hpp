// Reference implementations used as test oracles. They materialize what the
// library only represents implicitly and share no code with it.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

using Table = std::vector<std::vector<double>>;  // [tree][point]
using Mask = std::vector<std::vector<bool>>;     // [tree][point]

/// Explicit resampled tree list (with repeats) -> hold-out MSE.
inline double holdout_psi(const Table& pred, const std::vector<double>& labels,
                          const std::vector<std::size_t>& trees) {
  double total = 0;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    double sum = 0;
    for (std::size_t i : trees) sum += pred[i][j];
    const double r = labels[j] - sum / static_cast<double>(trees.size());
    total += r * r;
  }
  return total / static_cast<double>(labels.size());
}

/// Explicit tree list -> OOB MSE; a point without OOB trees has residual 0.
inline double oob_psi(const Table& pred, const Mask& mask,
                      const std::vector<double>& labels,
                      const std::vector<std::size_t>& trees) {
  double total = 0;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    double sum = 0;
    std::size_t count = 0;
    for (std::size_t i : trees) {
      if (!mask[i][j]) continue;
      sum += pred[i][j];
      ++count;
    }
    if (count == 0) continue;
    const double r = labels[j] - sum / static_cast<double>(count);
    total += r * r;
  }
  return total / static_cast<double>(labels.size());
}

/// max_l |mean of resampled rows - mean of all rows|.
inline double vi_eps(const Table& vi, const std::vector<std::size_t>& trees) {
  const std::size_t p = vi.front().size();
  double worst = 0;
  for (std::size_t l = 0; l < p; ++l) {
    double a = 0, b = 0;
    for (std::size_t i : trees) a += vi[i][l];
    for (const auto& row : vi) b += row[l];
    worst = std::max(worst, std::abs(a / trees.size() - b / vi.size()));
  }
  return worst;
}

/// Expand a count vector into a tree list.
inline std::vector<std::size_t> expand(const std::vector<std::uint32_t>& counts) {
  std::vector<std::size_t> trees;
  for (std::size_t i = 0; i < counts.size(); ++i)
    trees.insert(trees.end(), counts[i], i);
  return trees;
}

inline std::vector<std::size_t> identity(std::size_t t) {
  std::vector<std::size_t> v(t);
  for (std::size_t i = 0; i < t; ++i) v[i] = i;
  return v;
}

/// Calls f on each of the t^t ordered draws of t indices.
inline void for_each_ordered_resample(
    std::size_t t, const std::function<void(const std::vector<std::size_t>&)>& f) {
  std::vector<std::size_t> draw(t, 0);
  while (true) {
    f(draw);
    std::size_t k = 0;
    while (k < t && ++draw[k] == t) draw[k++] = 0;
    if (k == t) return;
  }
}

inline std::vector<std::uint32_t> histogram(const std::vector<std::size_t>& draw,
                                            std::size_t t) {
  std::vector<std::uint32_t> counts(t, 0);
  for (std::size_t i : draw) ++counts[i];
  return counts;
}

/// ceil(B * num / den) with integer arithmetic.
inline std::size_t rank_for(std::size_t B, std::size_t num, std::size_t den) {
  return (B * num + den - 1) / den;
}

/// |a - b| <= tol * scale, with scale floored at 1e-300.
inline bool close(double a, double b, double tol, double scale) {
  return std::abs(a - b) <= tol * std::max(scale, 1e-300);
}

}  // namespace oracle
