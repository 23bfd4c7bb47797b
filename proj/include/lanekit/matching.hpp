#pragma once

#include <cstddef>
#include <vector>

namespace lanekit {

/// Dense rows x cols score matrix, row-major.
struct ScoreMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> scores;

  double operator()(std::size_t r, std::size_t c) const { return scores[r * cols + c]; }
};

inline constexpr std::size_t kUnmatched = static_cast<std::size_t>(-1);

/// Kuhn-Munkres assignment maximizing the total score. Returns, per row, the
/// assigned column or kUnmatched when rows > cols.
std::vector<std::size_t> max_weight_assignment(const ScoreMatrix& m);

/// Maximum-cardinality matching on the edges with score > threshold; among
/// those, the one with the largest total score. Returns row -> col or kUnmatched.
std::vector<std::size_t> threshold_matching(const ScoreMatrix& m, double threshold);

}  // namespace lanekit
