#include "strokekit/classifier.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "strokekit/errors.hpp"
#include "strokekit/knowledge_graph.hpp"

namespace strokekit {

namespace {
constexpr double kCeClamp = 1e-12;
}

std::vector<double> aggregate_features(const FrameFeatureSeries& series,
                                       int start, int end) {
  const int n = series.num_frames();
  if (start < 0 || end > n || start >= end) {
    throw InputError("aggregate_features: empty or out-of-range segment [" +
                     std::to_string(start) + ", " + std::to_string(end) +
                     ") for " + std::to_string(n) + " frames");
  }
  std::vector<double> mean(static_cast<std::size_t>(series.feature_dim), 0.0);
  for (int t = start; t < end; ++t) {
    const auto row = series.frame(t);
    for (int d = 0; d < series.feature_dim; ++d) mean[d] += row[d];
  }
  const double inv = 1.0 / static_cast<double>(end - start);
  for (double& v : mean) v *= inv;
  return mean;
}

std::vector<double> minmax_normalize(std::span<const double> values) {
  std::vector<double> out(values.size());
  const auto [min_it, max_it] =
      std::minmax_element(values.begin(), values.end());
  const double lo = *min_it;
  const double hi = *max_it;
  if (hi == lo) {
    std::fill(out.begin(), out.end(), 0.5);
    return out;
  }
  const double inv = 1.0 / (hi - lo);
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = (values[i] - lo) * inv;
  }
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  const double hi = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - hi);
    total += out[i];
  }
  const double inv = 1.0 / total;
  for (double& v : out) v *= inv;
  return out;
}

double entropy(std::span<const double> distribution) {
  double h = 0.0;
  for (double p : distribution) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double uncertainty(std::span<const double> logits) {
  const double max_entropy = std::log(static_cast<double>(logits.size()));
  const double u = 1.0 - entropy(softmax(logits)) / max_entropy;
  return std::clamp(u, 0.0, 1.0);
}

double cross_entropy_loss(std::span<const double> distribution,
                          int target_label) {
  assert(target_label >= 0 &&
         target_label < static_cast<int>(distribution.size()));
  return -std::log(std::max(distribution[target_label], kCeClamp));
}

int argmax_index(std::span<const double> values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::vector<double> ClassifierModel::logits(
    std::span<const double> feature) const {
  std::vector<double> hidden, out;
  net.forward(feature, hidden, out);
  return out;
}

ClassifierModel init_classifier(int feature_dim, int hidden_dim,
                                int num_labels, std::uint64_t seed) {
  Rng rng(seed);
  ClassifierModel model;
  model.net = Mlp::init(feature_dim, hidden_dim, num_labels, rng);
  return model;
}

FusedForward fused_forward(const ClassifierModel& model,
                           std::span<const double> feature,
                           std::span<const double> graph_row, double alpha,
                           int target_label) {
  FusedForward result;
  std::vector<double> hidden;
  model.net.forward(feature, hidden, result.raw_logits);
  result.fused = fuse(result.raw_logits, graph_row, alpha);
  result.predicted = argmax_index(result.fused);
  result.loss = cross_entropy_loss(result.fused, target_label);
  return result;
}

namespace {

// dL/d(raw logits) for L = CE(softmax(minmax(z) + alpha*W), target), with
// the extremal indices of z frozen. Writes into dz.
void fused_logit_gradient(std::span<const double> raw_logits,
                          std::span<const double> fused, int target_label,
                          std::vector<double>& dz) {
  const int c = static_cast<int>(raw_logits.size());
  dz.assign(static_cast<std::size_t>(c), 0.0);

  int arg_min = 0;
  int arg_max = 0;
  for (int i = 1; i < c; ++i) {
    if (raw_logits[i] < raw_logits[arg_min]) arg_min = i;
    if (raw_logits[i] > raw_logits[arg_max]) arg_max = i;
  }
  const double range = raw_logits[arg_max] - raw_logits[arg_min];
  if (range == 0.0) return;  // minmax output is constant here

  // g = softmax CE gradient w.r.t. the fused pre-softmax vector; it sums to
  // zero, so the shared -min offset of minmax drops out.
  const double inv_range = 1.0 / range;
  double weighted = 0.0;  // sum_i g_i * minmax_i
  for (int i = 0; i < c; ++i) {
    const double g = fused[i] - (i == target_label ? 1.0 : 0.0);
    const double m = (raw_logits[i] - raw_logits[arg_min]) * inv_range;
    weighted += g * m;
    dz[i] = g * inv_range;
  }
  dz[arg_max] -= weighted * inv_range;
  dz[arg_min] += weighted * inv_range;
}

}  // namespace

MlpGrad fused_gradient(const ClassifierModel& model,
                       std::span<const double> feature,
                       std::span<const double> graph_row, double alpha,
                       int target_label) {
  std::vector<double> hidden, raw_logits;
  model.net.forward(feature, hidden, raw_logits);
  const std::vector<double> fused = fuse(raw_logits, graph_row, alpha);

  std::vector<double> dz;
  fused_logit_gradient(raw_logits, fused, target_label, dz);

  MlpGrad grad = MlpGrad::zeros_like(model.net);
  mlp_backward(model.net, feature, hidden, dz, grad);
  return grad;
}

FusedForward classifier_train_step(ClassifierModel& model,
                                   std::span<const double> feature,
                                   std::span<const double> graph_row,
                                   double alpha, int target_label,
                                   double learning_rate) {
  FusedForward forward;
  std::vector<double> hidden;
  model.net.forward(feature, hidden, forward.raw_logits);
  forward.fused = fuse(forward.raw_logits, graph_row, alpha);
  forward.predicted = argmax_index(forward.fused);
  forward.loss = cross_entropy_loss(forward.fused, target_label);

  std::vector<double> dz;
  fused_logit_gradient(forward.raw_logits, forward.fused, target_label, dz);
  for (double g : dz) {
    if (!std::isfinite(g)) {
      throw TrainingError("classifier gradient is not finite", -1);
    }
  }

  MlpGrad grad = MlpGrad::zeros_like(model.net);
  mlp_backward(model.net, feature, hidden, dz, grad);
  apply_sgd(model.net, grad, learning_rate);
  return forward;
}

}  // namespace strokekit
