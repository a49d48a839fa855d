#pragma once

#include <span>
#include <string>
#include <vector>

namespace strokekit {

inline constexpr int kBackgroundLabel = -1;

// Per-frame label ids; kBackgroundLabel marks frames outside every stroke.
using FrameLabeling = std::vector<int>;

struct LabeledStroke {
  int frame = 0;
  int label = 0;
};

// Expands instantaneous strokes into per-frame labels with the same
// geometry as segment formation: symmetric max_len-frame extension, clip to
// [0, num_frames), midpoint split between overlapping neighbours. Throws
// InputError when frames are unsorted or out of range.
FrameLabeling annotations_to_frame_labels(std::span<const LabeledStroke> strokes,
                                          int num_frames, int max_len = 40);

// Percent of frames with matching labels. Throws InputError on length
// mismatch.
double frame_accuracy(const FrameLabeling& pred, const FrameLabeling& gt);

struct SegmentSpan {
  int label = 0;
  int start = 0;
  int end = 0;  // exclusive
};

// Maximal same-label runs, background dropped.
std::vector<SegmentSpan> collapse_segments(const FrameLabeling& labeling);

// 100 * (1 - Levenshtein(pred_labels, gt_labels) / max(|pred|, |gt|)) over
// the collapsed segment-label sequences; 100 when both are empty.
double edit_score(const FrameLabeling& pred, const FrameLabeling& gt);

struct MatchCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;
};

// Greedy one-to-one matching: each predicted segment takes the unmatched
// same-label ground-truth segment of highest IoU; the pair is a TP when the
// IoU reaches the threshold (the ground-truth segment is consumed only
// then), otherwise the prediction is an FP. Unmatched ground truth is FN.
MatchCounts f1_counts(const FrameLabeling& pred, const FrameLabeling& gt,
                      double iou_threshold);

// F1 = 2TP / (2TP + FP + FN) as a percent; 100 when neither side has any
// segment.
double segmental_f1(const FrameLabeling& pred, const FrameLabeling& gt,
                    double iou_threshold);

inline constexpr double kF1Thresholds[3] = {0.10, 0.25, 0.50};

struct RallyEval {
  std::string rally_id;
  double accuracy = 0.0;
  double edit = 0.0;
  double f1[3] = {0.0, 0.0, 0.0};
};

struct AggregateEval {
  double accuracy = 0.0;
  double edit = 0.0;
  double f1[3] = {0.0, 0.0, 0.0};
};

struct EvalReport {
  std::vector<RallyEval> per_rally;
  AggregateEval micro;  // frame- and segment-pooled
  AggregateEval macro;  // unweighted mean of per-rally scores
};

struct EvalPair {
  std::string rally_id;
  FrameLabeling pred;
  FrameLabeling gt;
};

EvalReport evaluate_rallies(std::span<const EvalPair> pairs);

}  // namespace strokekit
