#include "lanekit/matching.hpp"

#include <algorithm>
#include <limits>

#include "lanekit/error.hpp"

namespace lanekit {

std::vector<std::size_t> max_weight_assignment(const ScoreMatrix& m) {
  if (m.scores.size() != m.rows * m.cols) {
    throw InvalidArgument("score matrix size mismatch");
  }
  const std::size_t n = std::max(m.rows, m.cols);
  if (n == 0) return {};
  const auto cost = [&](std::size_t r, std::size_t c) {
    return (r < m.rows && c < m.cols) ? -m(r, c) : 0.0;
  };

  // Shortest augmenting path with potentials; 1-based, column 0 is virtual.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(n + 1, 0.0);
  std::vector<std::size_t> owner(n + 1, 0);
  std::vector<std::size_t> way(n + 1, 0);
  for (std::size_t row = 1; row <= n; ++row) {
    owner[0] = row;
    std::size_t col0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col0] = 1;
      const std::size_t r0 = owner[col0];
      double delta = kInf;
      std::size_t col1 = 0;
      for (std::size_t c = 1; c <= n; ++c) {
        if (used[c]) continue;
        const double cur = cost(r0 - 1, c - 1) - u[r0] - v[c];
        if (cur < minv[c]) {
          minv[c] = cur;
          way[c] = col0;
        }
        if (minv[c] < delta) {
          delta = minv[c];
          col1 = c;
        }
      }
      for (std::size_t c = 0; c <= n; ++c) {
        if (used[c]) {
          u[owner[c]] += delta;
          v[c] -= delta;
        } else {
          minv[c] -= delta;
        }
      }
      col0 = col1;
    } while (owner[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      owner[col0] = owner[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  std::vector<std::size_t> assignment(m.rows, kUnmatched);
  for (std::size_t c = 1; c <= n; ++c) {
    const std::size_t r = owner[c] - 1;
    if (r < m.rows && c - 1 < m.cols) assignment[r] = c - 1;
  }
  return assignment;
}

std::vector<std::size_t> threshold_matching(const ScoreMatrix& m, double threshold) {
  // Every admissible edge is worth more than all score sums together, so the
  // optimum first maximizes the edge count and then the total score.
  const double bonus = static_cast<double>(std::min(m.rows, m.cols)) + 1.0;
  double max_score = 0.0;
  for (double s : m.scores) max_score = std::max(max_score, s);
  const double scale = max_score > 1.0 ? 1.0 / max_score : 1.0;

  ScoreMatrix weighted{m.rows, m.cols, std::vector<double>(m.scores.size(), 0.0)};
  for (std::size_t i = 0; i < m.scores.size(); ++i) {
    if (m.scores[i] > threshold) weighted.scores[i] = bonus + m.scores[i] * scale;
  }
  std::vector<std::size_t> assignment = max_weight_assignment(weighted);
  for (std::size_t r = 0; r < assignment.size(); ++r) {
    if (assignment[r] != kUnmatched && !(m(r, assignment[r]) > threshold)) {
      assignment[r] = kUnmatched;
    }
  }
  return assignment;
}

}  // namespace lanekit
