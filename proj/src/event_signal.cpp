#include "strokekit/event_signal.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

#include "strokekit/errors.hpp"

namespace strokekit {

namespace {

constexpr double kPi = 3.141592653589793238462643383279;
constexpr double kProbClamp = 1e-7;

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::vector<double> make_target_signal(std::span<const int> stroke_frames,
                                       int num_frames, double sigma) {
  if (sigma <= 0.0) throw ConfigError("sigma must be positive");
  for (std::size_t i = 0; i < stroke_frames.size(); ++i) {
    if (stroke_frames[i] < 0 || stroke_frames[i] >= num_frames) {
      throw InputError("stroke frame " + std::to_string(stroke_frames[i]) +
                       " outside [0, " + std::to_string(num_frames) + ")");
    }
    if (i > 0 && stroke_frames[i] <= stroke_frames[i - 1]) {
      throw InputError("stroke frames must be strictly increasing");
    }
  }

  std::vector<double> values(static_cast<std::size_t>(num_frames), 0.0);
  if (stroke_frames.empty()) return values;

  const double half = sigma / 2.0;
  for (int t = 0; t < num_frames; ++t) {
    auto it = std::lower_bound(stroke_frames.begin(), stroke_frames.end(), t);
    int nearest = -1;
    if (it != stroke_frames.end()) nearest = *it;
    if (it != stroke_frames.begin()) {
      const int prev = *std::prev(it);
      if (nearest < 0 || t - prev < nearest - t) nearest = prev;
    }
    const double d = std::abs(static_cast<double>(t - nearest));
    if (d <= half) {
      values[static_cast<std::size_t>(t)] = std::cos(d * kPi / sigma);
    }
  }
  return values;
}

double bce_loss(std::span<const double> predicted,
                std::span<const double> target) {
  if (predicted.size() != target.size()) {
    throw InputError("bce_loss: prediction and target lengths differ");
  }
  if (predicted.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double p_hat =
        std::clamp(predicted[i], kProbClamp, 1.0 - kProbClamp);
    const double p = target[i];
    total -= p * std::log(p_hat) + (1.0 - p) * std::log(1.0 - p_hat);
  }
  return total / static_cast<double>(predicted.size());
}

double agreement_score(std::span<const double> predicted,
                       std::span<const double> target) {
  if (predicted.size() != target.size()) {
    throw InputError("agreement_score: prediction and target lengths differ");
  }
  if (predicted.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    total += predicted[i] * target[i] +
             (1.0 - predicted[i]) * (1.0 - target[i]);
  }
  return total / static_cast<double>(predicted.size());
}

std::vector<StrokeEvent> extract_events(std::span<const double> probabilities,
                                        double threshold, double sigma) {
  std::vector<StrokeEvent> events;
  const int n = static_cast<int>(probabilities.size());
  int t = 0;
  while (t < n) {
    if (!(probabilities[t] > threshold)) {
      ++t;
      continue;
    }
    StrokeEvent ev;
    ev.start_frame = t;
    ev.peak_frame = t;
    ev.peak_prob = probabilities[t];
    while (t + 1 < n && probabilities[t + 1] > threshold) {
      ++t;
      if (probabilities[t] > ev.peak_prob) {
        ev.peak_prob = probabilities[t];
        ev.peak_frame = t;
      }
    }
    ev.end_frame = t;
    events.push_back(ev);
    ++t;
  }

  // Merge runs separated by less than sigma/2 frames.
  const double min_gap = sigma / 2.0;
  std::vector<StrokeEvent> merged;
  for (const StrokeEvent& ev : events) {
    if (!merged.empty() &&
        static_cast<double>(ev.start_frame - merged.back().end_frame) <
            min_gap) {
      StrokeEvent& prev = merged.back();
      prev.end_frame = ev.end_frame;
      if (ev.peak_prob > prev.peak_prob) {
        prev.peak_prob = ev.peak_prob;
        prev.peak_frame = ev.peak_frame;
      }
    } else {
      merged.push_back(ev);
    }
  }
  return merged;
}

std::vector<Segment> form_segments(std::span<const StrokeEvent> events,
                                   int num_frames, int max_len) {
  if (max_len < 1) throw ConfigError("max segment length must be >= 1");
  std::vector<Segment> segments;
  segments.reserve(events.size());
  const int left = max_len / 2;
  const int right = max_len - left;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const int peak = events[i].peak_frame;
    Segment seg;
    seg.start = std::max(0, peak - left);
    seg.end = std::min(num_frames, peak + right);
    seg.source_event = static_cast<int>(i);
    segments.push_back(seg);
  }
  // Cut overlapping neighbours at the midpoint between their peaks. The cut
  // is clamped so both segments keep their own peak.
  for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
    if (segments[i].end <= segments[i + 1].start) continue;
    const int p0 = events[i].peak_frame;
    const int p1 = events[i + 1].peak_frame;
    int mid = (p0 + p1) / 2;
    mid = std::clamp(mid, p0 + 1, p1);
    segments[i].end = mid;
    segments[i + 1].start = mid;
  }
  return segments;
}

double SegHead::frame_probability(std::span<const double> feature) const {
  std::vector<double> hidden, out;
  net.forward(feature, hidden, out);
  return sigmoid(out[0]);
}

std::vector<double> SegHead::probabilities(
    const FrameFeatureSeries& series) const {
  if (series.feature_dim != net.in_dim) {
    throw InputError("rally '" + series.rally_id + "': feature dimension " +
                     std::to_string(series.feature_dim) +
                     " does not match the head's input dimension " +
                     std::to_string(net.in_dim));
  }
  const int n = series.num_frames();
  std::vector<double> probs(static_cast<std::size_t>(n));
  std::vector<double> hidden, out;
  for (int t = 0; t < n; ++t) {
    net.forward(series.frame(t), hidden, out);
    probs[static_cast<std::size_t>(t)] = sigmoid(out[0]);
  }
  return probs;
}

SegTrainResult train_seg_head(std::span<const LabeledRally> corpus,
                              const SegTrainConfig& config) {
  if (corpus.empty()) throw InputError("seg head training corpus is empty");
  if (config.epochs < 0) throw ConfigError("epochs must be >= 0");
  if (config.learning_rate <= 0.0) {
    throw ConfigError("learning rate must be positive");
  }
  const int dim = corpus[0].series.feature_dim;
  for (const LabeledRally& rally : corpus) {
    if (rally.series.feature_dim != dim) {
      throw InputError("inconsistent feature dimensions across corpus");
    }
  }

  Rng rng(config.seed);
  SegTrainResult result;
  result.head.net = Mlp::init(dim, config.hidden_dim, 1, rng);

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  MlpGrad grad = MlpGrad::zeros_like(result.head.net);
  std::vector<double> hidden, out, dout(1);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_total = 0.0;
    for (std::size_t idx : order) {
      const LabeledRally& rally = corpus[idx];
      const int n = rally.series.num_frames();
      const std::vector<double> target = make_target_signal(
          rally.stroke_frames, n, config.sigma);

      grad.reset();
      double rally_loss = 0.0;
      const double inv_n = 1.0 / static_cast<double>(n);
      for (int t = 0; t < n; ++t) {
        const auto x = rally.series.frame(t);
        result.head.net.forward(x, hidden, out);
        const double p_hat = sigmoid(out[0]);
        const double p = target[static_cast<std::size_t>(t)];
        const double clamped =
            std::clamp(p_hat, kProbClamp, 1.0 - kProbClamp);
        rally_loss -= p * std::log(clamped) +
                      (1.0 - p) * std::log(1.0 - clamped);
        dout[0] = (p_hat - p) * inv_n;
        mlp_backward(result.head.net, x, hidden, dout, grad);
      }
      epoch_total += rally_loss * inv_n;
      apply_sgd(result.head.net, grad, config.learning_rate);
    }
    const double mean_loss = epoch_total / static_cast<double>(corpus.size());
    if (!std::isfinite(mean_loss)) {
      throw TrainingError("seg head training diverged: loss is not finite",
                          epoch);
    }
    result.epoch_loss.push_back(mean_loss);
  }
  return result;
}

}  // namespace strokekit
