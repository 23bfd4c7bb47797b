#include "lanekit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lanekit {

EmbeddingField::EmbeddingField(ImageGrid grid, std::size_t dim, double fill)
    : grid_(grid), dim_(dim), values_(grid.pixel_count() * dim, fill) {
  if (dim == 0) throw InvalidArgument("embedding dimension must be >= 1");
}

EmbeddingField::EmbeddingField(ImageGrid grid, std::size_t dim, std::vector<double> values)
    : grid_(grid), dim_(dim), values_(std::move(values)) {
  if (dim == 0) throw InvalidArgument("embedding dimension must be >= 1");
  if (values_.size() != grid_.pixel_count() * dim_) {
    throw InvalidArgument("embedding size does not match grid and dimension");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("embedding entries must be finite");
  }
}

ClusterAssignment::ClusterAssignment(std::vector<std::uint32_t> labels, std::uint32_t lane_count)
    : labels_(std::move(labels)), lane_count_(lane_count), members_(lane_count) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const std::uint32_t c = labels_[i];
    if (c == 0) continue;
    if (c > lane_count_) {
      throw InvalidArgument("absent instance id " + std::to_string(c));
    }
    members_[c - 1].push_back(i);
  }
  for (std::uint32_t c = 0; c < lane_count_; ++c) {
    if (members_[c].empty()) {
      throw InvalidArgument("empty cluster " + std::to_string(c + 1));
    }
  }
}

ClusterAssignment ClusterAssignment::from_instances(const InstanceMap& map) {
  return ClusterAssignment(std::vector<std::uint32_t>(map.values().begin(), map.values().end()),
                           instance_count(map));
}

LossParams::LossParams(double delta_v, double delta_d, MarginRule rule) : delta_v_(delta_v), delta_d_(delta_d) {
  if (!(delta_v > 0.0) || !(delta_d > 0.0) || !std::isfinite(delta_v) || !std::isfinite(delta_d)) {
    throw InvalidArgument("margins must be positive and finite");
  }
  if (rule == MarginRule::kEnforceSeparation && !(delta_d > 6.0 * delta_v)) {
    throw InvalidArgument("delta_d must exceed 6 * delta_v");
  }
}

namespace {

void check_shapes(const EmbeddingField& field, const ClusterAssignment& assign) {
  if (assign.pixel_count() != field.grid().pixel_count()) {
    throw InvalidArgument("assignment does not cover the embedding grid");
  }
}

// Norm inside the hinge and its derivative w.r.t. the difference vector.
double hinge_norm(std::span<const double> v, bool squared) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return squared ? s : std::sqrt(s);
}

void accumulate_norm_grad(std::span<const double> v, double norm, bool squared, double scale,
                          std::span<double> out) {
  if (squared) {
    for (std::size_t k = 0; k < v.size(); ++k) out[k] += scale * 2.0 * v[k];
  } else if (norm > 0.0) {
    for (std::size_t k = 0; k < v.size(); ++k) out[k] += scale * v[k] / norm;
  }
}

}  // namespace

ClusterMeans cluster_means(const EmbeddingField& field, const ClusterAssignment& assign) {
  check_shapes(field, assign);
  const std::size_t dim = field.dim();
  ClusterMeans means{dim, std::vector<double>(assign.lane_count() * dim, 0.0)};
  for (std::uint32_t c = 1; c <= assign.lane_count(); ++c) {
    const auto members = assign.members(c);
    double* mu = means.values.data() + (c - 1) * dim;
    for (std::size_t pixel : members) {
      const auto x = field.at(pixel);
      for (std::size_t k = 0; k < dim; ++k) mu[k] += x[k];
    }
    for (std::size_t k = 0; k < dim; ++k) mu[k] /= static_cast<double>(members.size());
  }
  return means;
}

LossValue variance_loss(const EmbeddingField& field, const ClusterAssignment& assign, const LossParams& params) {
  const ClusterMeans means = cluster_means(field, assign);
  const std::size_t dim = field.dim();
  const double lanes = static_cast<double>(assign.lane_count());
  LossValue out{0.0, std::vector<double>(field.values().size(), 0.0)};
  if (assign.lane_count() == 0) return out;

  std::vector<double> diff(dim);
  std::vector<double> push(dim);
  for (std::uint32_t c = 1; c <= assign.lane_count(); ++c) {
    const auto members = assign.members(c);
    const auto mu = means.mean(c - 1);
    const double n_c = static_cast<double>(members.size());
    double cluster_sum = 0.0;
    std::fill(push.begin(), push.end(), 0.0);
    for (std::size_t pixel : members) {
      const auto x = field.at(pixel);
      for (std::size_t k = 0; k < dim; ++k) diff[k] = mu[k] - x[k];
      const double norm = hinge_norm(diff, params.squared_norm);
      const double h = std::max(0.0, norm - params.delta_v());
      if (h <= 0.0) continue;
      cluster_sum += h * h;
      // G_i = 2h / (L N_c) * dn/d(mu - x_i); d/dx_j = sum_i G_i / N_c - G_j.
      std::span<double> g{out.gradient.data() + pixel * dim, dim};
      std::vector<double> gi(dim, 0.0);
      accumulate_norm_grad(diff, norm, params.squared_norm, 2.0 * h / (lanes * n_c), gi);
      for (std::size_t k = 0; k < dim; ++k) {
        g[k] -= gi[k];
        push[k] += gi[k];
      }
    }
    out.value += cluster_sum / n_c;
    for (std::size_t pixel : members) {
      double* g = out.gradient.data() + pixel * dim;
      for (std::size_t k = 0; k < dim; ++k) g[k] += push[k] / n_c;
    }
  }
  out.value /= lanes;
  return out;
}

LossValue distance_loss(const ClusterMeans& means, const LossParams& params) {
  const std::size_t lanes = means.count();
  const std::size_t dim = means.dim;
  LossValue out{0.0, std::vector<double>(means.values.size(), 0.0)};
  if (lanes < 2) return out;

  const double scale = 1.0 / (static_cast<double>(lanes) * static_cast<double>(lanes - 1));
  std::vector<double> diff(dim);
  for (std::size_t a = 0; a < lanes; ++a) {
    for (std::size_t b = a + 1; b < lanes; ++b) {
      const auto ma = means.mean(a);
      const auto mb = means.mean(b);
      for (std::size_t k = 0; k < dim; ++k) diff[k] = ma[k] - mb[k];
      const double norm = hinge_norm(diff, params.squared_norm);
      const double h = std::max(0.0, params.delta_d() - norm);
      if (h <= 0.0) continue;
      // Both ordered pairs (a, b) and (b, a) contribute h^2.
      out.value += 2.0 * h * h;
      std::span<double> ga{out.gradient.data() + a * dim, dim};
      std::span<double> gb{out.gradient.data() + b * dim, dim};
      accumulate_norm_grad(diff, norm, params.squared_norm, -4.0 * h * scale, ga);
      accumulate_norm_grad(diff, norm, params.squared_norm, 4.0 * h * scale, gb);
    }
  }
  out.value *= scale;
  return out;
}

LossValue clustering_loss(const EmbeddingField& field, const ClusterAssignment& assign, const LossParams& params) {
  LossValue var = variance_loss(field, assign, params);
  const LossValue dist = distance_loss(cluster_means(field, assign), params);
  const std::size_t dim = field.dim();

  LossValue out{params.var_weight * var.value + params.dist_weight * dist.value, std::move(var.gradient)};
  for (double& g : out.gradient) g *= params.var_weight;
  for (std::uint32_t c = 1; c <= assign.lane_count(); ++c) {
    const auto members = assign.members(c);
    const double* gmu = dist.gradient.data() + (c - 1) * dim;
    const double share = params.dist_weight / static_cast<double>(members.size());
    for (std::size_t pixel : members) {
      double* g = out.gradient.data() + pixel * dim;
      for (std::size_t k = 0; k < dim; ++k) g[k] += share * gmu[k];
    }
  }
  return out;
}

LossValue weighted_binary_ce(const ProbabilityMap& probabilities, const BinaryMask& target,
                             double background_weight) {
  if (!(probabilities.grid() == target.grid())) {
    throw InvalidArgument("grid mismatch");
  }
  const auto p = probabilities.values();
  const auto t = target.values();
  const double n = static_cast<double>(p.size());
  LossValue out{0.0, std::vector<double>(p.size(), 0.0)};
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0 && p[i] < 1.0)) {
      throw InvalidArgument("saturated probability at pixel " + std::to_string(i));
    }
    if (t[i] != 0) {
      out.value -= std::log(p[i]);
      out.gradient[i] = -1.0 / (p[i] * n);
    } else {
      out.value -= background_weight * std::log1p(-p[i]);
      out.gradient[i] = background_weight / ((1.0 - p[i]) * n);
    }
  }
  out.value /= n;
  return out;
}

LossValue l2_loss(const HeatMap& prediction, const HeatMap& target) {
  if (!(prediction.grid() == target.grid())) {
    throw InvalidArgument("grid mismatch");
  }
  const auto p = prediction.values();
  const auto t = target.values();
  const double n = static_cast<double>(p.size());
  LossValue out{0.0, std::vector<double>(p.size(), 0.0)};
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - t[i];
    out.value += d * d;
    out.gradient[i] = 2.0 * d / n;
  }
  out.value /= n;
  return out;
}

double finite_diff_check(const Objective& loss, std::span<const double> point, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw InvalidArgument("finite-difference step must be positive");
  }
  const LossValue analytic = loss(point);
  if (!std::isfinite(analytic.value)) {
    throw Error("non-finite loss at the evaluation point");
  }
  if (analytic.gradient.size() != point.size()) {
    throw InvalidArgument("gradient size does not match the parameter vector");
  }
  std::vector<double> x(point.begin(), point.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + step;
    const double fp = loss(x).value;
    x[i] = saved - step;
    const double fm = loss(x).value;
    x[i] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw Error("non-finite loss at coordinate " + std::to_string(i));
    }
    const double central = (fp - fm) / (2.0 * step);
    const double g = analytic.gradient[i];
    if (!std::isfinite(g)) {
      throw Error("non-finite gradient at coordinate " + std::to_string(i));
    }
    worst = std::max(worst, std::abs(g - central) / std::max(1.0, std::abs(g)));
  }
  return worst;
}

OptimizationResult optimize_embeddings(EmbeddingField field, const ClusterAssignment& assign,
                                       const LossParams& params, std::size_t steps, double learning_rate) {
  if (steps < 1) throw InvalidArgument("steps must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("learning rate must be positive");
  }
  OptimizationResult result{std::move(field), {}};
  result.losses.reserve(steps + 1);
  for (std::size_t step = 0; step <= steps; ++step) {
    const LossValue loss = clustering_loss(result.field, assign, params);
    if (!std::isfinite(loss.value)) {
      throw DivergedError("diverged at step " + std::to_string(step));
    }
    result.losses.push_back(loss.value);
    if (step == steps || loss.value == 0.0) break;
    auto values = result.field.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] -= learning_rate * loss.gradient[i];
    }
  }
  return result;
}

}  // namespace lanekit
