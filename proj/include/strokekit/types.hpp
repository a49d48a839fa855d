#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace strokekit {

// Per-frame feature vectors for one rally clip. The video backbone that
// would produce these is an explicit input boundary; anything that emits a
// T x D series of finite reals can feed the pipeline. Stored flat,
// row-major, for cache-friendly per-frame access.
struct FrameFeatureSeries {
  std::string rally_id;
  double fps = 0.0;
  int feature_dim = 0;
  std::vector<double> data;  // num_frames() x feature_dim

  int num_frames() const {
    return feature_dim == 0 ? 0
                            : static_cast<int>(data.size()) / feature_dim;
  }

  std::span<const double> frame(int t) const {
    return {data.data() + static_cast<std::size_t>(t) * feature_dim,
            static_cast<std::size_t>(feature_dim)};
  }

  // Throws InputError on empty series, ragged storage, or non-finite values.
  void validate() const;
};

// Ordered technique vocabulary. The reserved "null" start marker is not a
// member; it exists only as the extra source row of the transition graph.
class LabelSet {
 public:
  LabelSet() = default;
  // Throws InputError if fewer than two names, duplicates, or "null".
  explicit LabelSet(std::vector<std::string> names);

  static LabelSet default_table_tennis();

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int index) const { return names_[index]; }
  const std::vector<std::string>& names() const { return names_; }

  // -1 when absent.
  int index_of(std::string_view name) const;
  // Throws InputError when absent.
  int require(std::string_view name) const;

 private:
  std::vector<std::string> names_;
};

inline constexpr std::string_view kNullNodeName = "null";

struct StrokeAnnotation {
  int frame = 0;
  std::string technique;
};

struct RallyAnnotation {
  std::string rally_id;
  std::vector<StrokeAnnotation> strokes;  // sorted by frame
};

// One rally joined with its annotations, label names resolved to indices.
// This is the unit the training loops consume.
struct LabeledRally {
  FrameFeatureSeries series;
  std::vector<int> stroke_frames;  // sorted, strictly increasing
  std::vector<int> stroke_labels;  // parallel to stroke_frames
};

struct PredictedStroke {
  int label = 0;
  int peak_frame = 0;
  int start = 0;  // segment interval [start, end)
  int end = 0;
};

struct StrokeSequence {
  std::string rally_id;
  std::vector<PredictedStroke> strokes;  // peaks strictly increasing
};

}  // namespace strokekit
