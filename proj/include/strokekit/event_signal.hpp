#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "strokekit/mlp.hpp"
#include "strokekit/types.hpp"

namespace strokekit {

// Per-frame training target for the stroke head: a cosine pulse of value 1
// at each annotated stroke frame, falling to 0 at distance sigma/2, and 0
// everywhere else. Distances are measured to the nearest stroke frame.
std::vector<double> make_target_signal(std::span<const int> stroke_frames,
                                       int num_frames, double sigma = 8.0);

// Mean binary cross entropy between predicted probabilities and targets.
// Predictions are clamped to [1e-7, 1 - 1e-7] before the logs.
double bce_loss(std::span<const double> predicted,
                std::span<const double> target);

// Mean of p_hat*p + (1-p_hat)*(1-p): an agreement score in [0,1]. Exposed
// alongside bce_loss; training always uses bce_loss.
double agreement_score(std::span<const double> predicted,
                       std::span<const double> target);

// A detected stroke: the above-threshold run [start_frame, end_frame]
// (inclusive), its most probable frame, and that probability.
struct StrokeEvent {
  int start_frame = 0;
  int end_frame = 0;
  int peak_frame = 0;
  double peak_prob = 0.0;
};

// Maximal runs of probability > threshold become events (peak = argmax,
// ties resolved to the earliest frame). Consecutive events closer than
// sigma/2 frames (gap = next start - previous end) are merged; the merged
// event keeps the higher-probability peak. Post-merge gaps are >= sigma/2.
std::vector<StrokeEvent> extract_events(std::span<const double> probabilities,
                                        double threshold = 0.5,
                                        double sigma = 8.0);

// Half-open per-stroke frame interval tied back to the event it came from.
struct Segment {
  int start = 0;
  int end = 0;  // exclusive
  int source_event = 0;
};

// Extends each event symmetrically about its peak to max_len frames, clips
// to [0, num_frames), and cuts overlapping neighbours at the midpoint
// between their peaks. Every output segment contains exactly its own peak.
std::vector<Segment> form_segments(std::span<const StrokeEvent> events,
                                   int num_frames, int max_len = 40);

// Per-frame stroke-probability head: one hidden layer + sigmoid output.
struct SegHead {
  Mlp net;

  double frame_probability(std::span<const double> feature) const;
  std::vector<double> probabilities(const FrameFeatureSeries& series) const;
};

struct SegTrainConfig {
  int hidden_dim = 64;
  int epochs = 20;
  double learning_rate = 0.01;
  double sigma = 8.0;
  std::uint64_t seed = 42;
};

struct SegTrainResult {
  SegHead head;
  std::vector<double> epoch_loss;  // mean BCE per epoch
};

// Minimizes mean BCE between the head's per-frame probabilities and the
// cosine targets with per-rally SGD steps. Rally order is reshuffled every
// epoch from the configured seed; zero epochs returns the initialized head.
// Throws TrainingError when the loss stops being finite.
SegTrainResult train_seg_head(std::span<const LabeledRally> corpus,
                              const SegTrainConfig& config);

}  // namespace strokekit
