#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "strokekit/mlp.hpp"
#include "strokekit/types.hpp"

namespace strokekit {

// Mean of the frame vectors over [start, end). Throws InputError for an
// empty or out-of-range interval.
std::vector<double> aggregate_features(const FrameFeatureSeries& series,
                                       int start, int end);

// (x - min) / (max - min); all 0.5 when max == min.
std::vector<double> minmax_normalize(std::span<const double> values);

std::vector<double> softmax(std::span<const double> logits);

// Natural-log entropy of a probability distribution.
double entropy(std::span<const double> distribution);

// 1 - Entropy(softmax(logits)) / ln(C), clamped to [0, 1]. 0 for a uniform
// distribution, 1 in the one-hot limit.
double uncertainty(std::span<const double> logits);

// -ln(distribution[target]), floor-clamped at 1e-12.
double cross_entropy_loss(std::span<const double> distribution,
                          int target_label);

// Technique classifier: feature -> C logits, one hidden layer.
struct ClassifierModel {
  Mlp net;

  int num_labels() const { return net.out_dim; }
  std::vector<double> logits(std::span<const double> feature) const;
};

ClassifierModel init_classifier(int feature_dim, int hidden_dim,
                                int num_labels, std::uint64_t seed);

// One forward pass through softmax(minmax(cls(f)) + alpha * W).
struct FusedForward {
  std::vector<double> raw_logits;
  std::vector<double> fused;  // probability distribution
  int predicted = 0;          // argmax of fused, ties to the lowest index
  double loss = 0.0;          // CE against target_label
};

FusedForward fused_forward(const ClassifierModel& model,
                           std::span<const double> feature,
                           std::span<const double> graph_row, double alpha,
                           int target_label);

// Gradient of the fused CE loss w.r.t. the classifier weights. The min and
// max indices of the raw logits are treated as constants, which is the true
// derivative wherever they are unique.
MlpGrad fused_gradient(const ClassifierModel& model,
                       std::span<const double> feature,
                       std::span<const double> graph_row, double alpha,
                       int target_label);

// Gradient plus one SGD step. Returns the pre-step forward pass so callers
// can read the prediction that drove the update. Throws TrainingError on a
// non-finite gradient.
FusedForward classifier_train_step(ClassifierModel& model,
                                   std::span<const double> feature,
                                   std::span<const double> graph_row,
                                   double alpha, int target_label,
                                   double learning_rate);

int argmax_index(std::span<const double> values);

}  // namespace strokekit
