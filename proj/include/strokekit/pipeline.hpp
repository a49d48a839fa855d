#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "strokekit/classifier.hpp"
#include "strokekit/event_signal.hpp"
#include "strokekit/knowledge_graph.hpp"
#include "strokekit/types.hpp"

namespace strokekit {

inline constexpr int kModelFormatVersion = 1;

struct Hyperparams {
  double sigma = 8.0;
  double threshold = 0.5;
  double alpha = 1.0;  // graph contribution in the fused distribution
  double beta = 0.1;   // graph update stride scale
  int max_segment_len = 40;
  int epochs = 20;
  int seg_epochs = -1;  // -1 -> epochs
  double learning_rate = 0.01;
  std::uint64_t seed = 42;
  bool use_uncertainty = true;  // false -> fixed stride (u forced to 1)
  int seg_hidden = 64;
  int cls_hidden = 128;

  int effective_seg_epochs() const {
    return seg_epochs < 0 ? epochs : seg_epochs;
  }

  // Throws ConfigError on out-of-range values.
  void validate() const;
};

struct PipelineModel {
  LabelSet labels;
  Hyperparams params;
  SegHead seg_head;
  ClassifierModel classifier;
  TechniqueGraph graph;
};

struct TrainLog {
  std::vector<double> seg_bce;  // per seg-head epoch
  struct ClsEpoch {
    double mean_ce = 0.0;
    double accuracy = 0.0;  // teacher-forced, fused prediction
  };
  std::vector<ClsEpoch> cls;
};

// Stage 1 trains the stroke head on cosine targets. Stage 2 initializes the
// transition graph from the ground-truth sequences, then runs epochs over
// the rallies (order reshuffled per epoch, within-rally order preserved):
// per segment, fuse the classifier logits with the graph row of the
// ground-truth preceding label, take one CE gradient step, and apply the
// graph correction when the fused prediction was wrong. Segments come from
// the ground-truth stroke frames so the stages train independently.
PipelineModel train(std::span<const LabeledRally> corpus,
                    const LabelSet& labels, const Hyperparams& params,
                    TrainLog* log = nullptr);

// Stage-2 decode over given segments: labels chained through the previously
// predicted label (null before the first), graph and weights frozen.
std::vector<int> classify_segments(const PipelineModel& model,
                                   const FrameFeatureSeries& series,
                                   std::span<const Segment> segments);

// Full two-stage inference: probabilities -> events -> segments -> chained
// technique decoding.
StrokeSequence infer(const PipelineModel& model,
                     const FrameFeatureSeries& series);

// Single JSON document; round trips are bit-exact on every weight and
// hyperparameter. load_model throws LoadError naming the offending field.
void save_model(const PipelineModel& model, const std::filesystem::path& path);
PipelineModel load_model(const std::filesystem::path& path);

}  // namespace strokekit
