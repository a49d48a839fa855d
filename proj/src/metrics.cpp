#include "strokekit/metrics.hpp"

#include <algorithm>
#include <cstdint>

#include "strokekit/errors.hpp"
#include "strokekit/event_signal.hpp"

namespace strokekit {

FrameLabeling annotations_to_frame_labels(std::span<const LabeledStroke> strokes,
                                          int num_frames, int max_len) {
  std::vector<StrokeEvent> events;
  events.reserve(strokes.size());
  for (std::size_t i = 0; i < strokes.size(); ++i) {
    const int frame = strokes[i].frame;
    if (frame < 0 || frame >= num_frames) {
      throw InputError("stroke frame " + std::to_string(frame) +
                       " outside [0, " + std::to_string(num_frames) + ")");
    }
    if (i > 0 && frame <= strokes[i - 1].frame) {
      throw InputError("stroke frames must be strictly increasing");
    }
    events.push_back({frame, frame, frame, 1.0});
  }

  FrameLabeling labels(static_cast<std::size_t>(num_frames),
                       kBackgroundLabel);
  const std::vector<Segment> segments =
      form_segments(events, num_frames, max_len);
  for (const Segment& seg : segments) {
    const int label = strokes[static_cast<std::size_t>(seg.source_event)].label;
    for (int t = seg.start; t < seg.end; ++t) {
      labels[static_cast<std::size_t>(t)] = label;
    }
  }
  return labels;
}

double frame_accuracy(const FrameLabeling& pred, const FrameLabeling& gt) {
  if (pred.size() != gt.size()) {
    throw InputError("frame_accuracy: labelings have different lengths");
  }
  if (pred.empty()) return 100.0;
  std::size_t matching = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == gt[i]) ++matching;
  }
  return 100.0 * static_cast<double>(matching) /
         static_cast<double>(pred.size());
}

std::vector<SegmentSpan> collapse_segments(const FrameLabeling& labeling) {
  std::vector<SegmentSpan> segments;
  const int n = static_cast<int>(labeling.size());
  int t = 0;
  while (t < n) {
    const int label = labeling[static_cast<std::size_t>(t)];
    int start = t;
    while (t + 1 < n && labeling[static_cast<std::size_t>(t + 1)] == label) {
      ++t;
    }
    ++t;
    if (label != kBackgroundLabel) segments.push_back({label, start, t});
  }
  return segments;
}

namespace {

int levenshtein(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<int> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

std::vector<int> segment_labels(const FrameLabeling& labeling) {
  std::vector<int> labels;
  for (const SegmentSpan& seg : collapse_segments(labeling)) {
    labels.push_back(seg.label);
  }
  return labels;
}

double iou(const SegmentSpan& a, const SegmentSpan& b) {
  const int inter =
      std::max(0, std::min(a.end, b.end) - std::max(a.start, b.start));
  const int uni = (a.end - a.start) + (b.end - b.start) - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
}

}  // namespace

double edit_score(const FrameLabeling& pred, const FrameLabeling& gt) {
  if (pred.size() != gt.size()) {
    throw InputError("edit_score: labelings have different lengths");
  }
  const std::vector<int> p = segment_labels(pred);
  const std::vector<int> g = segment_labels(gt);
  if (p.empty() && g.empty()) return 100.0;
  const double denom = static_cast<double>(std::max(p.size(), g.size()));
  return 100.0 * (1.0 - static_cast<double>(levenshtein(p, g)) / denom);
}

MatchCounts f1_counts(const FrameLabeling& pred, const FrameLabeling& gt,
                      double iou_threshold) {
  if (pred.size() != gt.size()) {
    throw InputError("segmental_f1: labelings have different lengths");
  }
  const std::vector<SegmentSpan> pred_segs = collapse_segments(pred);
  const std::vector<SegmentSpan> gt_segs = collapse_segments(gt);

  MatchCounts counts;
  std::vector<bool> taken(gt_segs.size(), false);
  for (const SegmentSpan& p : pred_segs) {
    int best = -1;
    double best_iou = 0.0;
    for (std::size_t j = 0; j < gt_segs.size(); ++j) {
      if (taken[j] || gt_segs[j].label != p.label) continue;
      const double overlap = iou(p, gt_segs[j]);
      if (overlap > best_iou) {
        best_iou = overlap;
        best = static_cast<int>(j);
      }
    }
    if (best >= 0 && best_iou >= iou_threshold) {
      ++counts.tp;
      taken[static_cast<std::size_t>(best)] = true;
    } else {
      ++counts.fp;
    }
  }
  counts.fn = static_cast<int>(gt_segs.size()) - counts.tp;
  return counts;
}

double segmental_f1(const FrameLabeling& pred, const FrameLabeling& gt,
                    double iou_threshold) {
  const MatchCounts c = f1_counts(pred, gt, iou_threshold);
  const int denom = 2 * c.tp + c.fp + c.fn;
  if (denom == 0) return 100.0;
  return 100.0 * 2.0 * c.tp / static_cast<double>(denom);
}

EvalReport evaluate_rallies(std::span<const EvalPair> pairs) {
  EvalReport report;
  report.per_rally.reserve(pairs.size());

  std::uint64_t total_frames = 0;
  std::uint64_t matching_frames = 0;
  std::uint64_t edit_distance_total = 0;
  std::uint64_t edit_denom_total = 0;
  MatchCounts pooled[3];

  for (const EvalPair& pair : pairs) {
    RallyEval rally;
    rally.rally_id = pair.rally_id;
    rally.accuracy = frame_accuracy(pair.pred, pair.gt);
    rally.edit = edit_score(pair.pred, pair.gt);
    for (int k = 0; k < 3; ++k) {
      rally.f1[k] = segmental_f1(pair.pred, pair.gt, kF1Thresholds[k]);
      const MatchCounts c = f1_counts(pair.pred, pair.gt, kF1Thresholds[k]);
      pooled[k].tp += c.tp;
      pooled[k].fp += c.fp;
      pooled[k].fn += c.fn;
    }
    report.per_rally.push_back(rally);

    total_frames += pair.gt.size();
    for (std::size_t i = 0; i < pair.gt.size(); ++i) {
      if (pair.pred[i] == pair.gt[i]) ++matching_frames;
    }
    const std::vector<int> p = segment_labels(pair.pred);
    const std::vector<int> g = segment_labels(pair.gt);
    edit_distance_total += static_cast<std::uint64_t>(levenshtein(p, g));
    edit_denom_total += std::max(p.size(), g.size());
  }

  // Micro: pool frames, edit distances, and match counts across rallies.
  report.micro.accuracy =
      total_frames == 0 ? 100.0
                        : 100.0 * static_cast<double>(matching_frames) /
                              static_cast<double>(total_frames);
  report.micro.edit =
      edit_denom_total == 0
          ? 100.0
          : 100.0 * (1.0 - static_cast<double>(edit_distance_total) /
                               static_cast<double>(edit_denom_total));
  for (int k = 0; k < 3; ++k) {
    const int denom = 2 * pooled[k].tp + pooled[k].fp + pooled[k].fn;
    report.micro.f1[k] =
        denom == 0 ? 100.0 : 100.0 * 2.0 * pooled[k].tp / denom;
  }

  // Macro: unweighted mean of per-rally scores.
  if (!report.per_rally.empty()) {
    const double inv = 1.0 / static_cast<double>(report.per_rally.size());
    for (const RallyEval& rally : report.per_rally) {
      report.macro.accuracy += rally.accuracy * inv;
      report.macro.edit += rally.edit * inv;
      for (int k = 0; k < 3; ++k) report.macro.f1[k] += rally.f1[k] * inv;
    }
  } else {
    report.macro.accuracy = 100.0;
    report.macro.edit = 100.0;
    for (int k = 0; k < 3; ++k) report.macro.f1[k] = 100.0;
  }
  return report;
}

}  // namespace strokekit
