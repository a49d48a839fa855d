#include "strokekit/synth.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "strokekit/errors.hpp"
#include "strokekit/rng.hpp"

namespace strokekit {

namespace {

constexpr double kPi = 3.141592653589793238462643383279;

std::string trigram_key(const std::string& a, const std::string& b,
                        const std::string& c) {
  return a + "," + b + "," + c;
}

}  // namespace

void SynthConfig::validate() const {
  const std::vector<std::string> names =
      labels.empty() ? LabelSet::default_table_tennis().names() : labels;
  const int c = static_cast<int>(names.size());
  if (c < 2) throw ConfigError("synth config needs at least two labels");

  if (!transition.empty()) {
    if (static_cast<int>(transition.size()) != c + 1) {
      throw ConfigError("transition matrix must have C+1 rows (null last)");
    }
    for (const auto& row : transition) {
      if (static_cast<int>(row.size()) != c) {
        throw ConfigError("transition rows must have C entries");
      }
      double sum = 0.0;
      for (double p : row) {
        if (!(p >= 0.0)) throw ConfigError("transition probabilities must be >= 0");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("transition rows must sum to 1");
      }
    }
  } else if (transition_strength < 0.0 || transition_strength > 1.0) {
    throw ConfigError("transition_strength must be in [0, 1]");
  }

  if (rally_count < 1) throw ConfigError("rally_count must be >= 1");
  if (strokes_per_rally[0] < 1 || strokes_per_rally[1] < strokes_per_rally[0]) {
    throw ConfigError("invalid strokes_per_rally range");
  }
  if (gap_range[0] > gap_range[1]) throw ConfigError("invalid gap range");
  if (static_cast<double>(gap_range[0]) < sigma) {
    throw ConfigError("minimum inter-stroke gap must be >= sigma");
  }
  if (sigma <= 0.0) throw ConfigError("sigma must be positive");
  if (feature_dim < 1) throw ConfigError("feature_dim must be >= 1");
  if (lead_in < 0 || tail < 0) throw ConfigError("lead_in/tail must be >= 0");
  for (const auto& [key, p] : win_table) {
    if (p < 0.0 || p > 1.0) {
      throw ConfigError("win probability for '" + key + "' outside [0, 1]");
    }
  }
  if (default_win_prob < 0.0 || default_win_prob > 1.0) {
    throw ConfigError("default_win_prob outside [0, 1]");
  }
  if (max_rally_frames > 0) {
    const long long worst = lead_in + tail +
        static_cast<long long>(strokes_per_rally[1] - 1) * gap_range[1] + 1;
    if (worst > max_rally_frames) {
      throw ConfigError(
          "strokes_per_rally and gap_range cannot fit inside max_rally_frames");
    }
  }
}

std::vector<std::vector<double>> SynthConfig::effective_transition() const {
  if (!transition.empty()) return transition;
  const std::vector<std::string> names =
      labels.empty() ? LabelSet::default_table_tennis().names() : labels;
  const int c = static_cast<int>(names.size());
  std::vector<std::vector<double>> rows(
      static_cast<std::size_t>(c) + 1, std::vector<double>(c, 0.0));
  const double off = (1.0 - transition_strength) / static_cast<double>(c - 1);
  for (int i = 0; i < c; ++i) {
    for (int j = 0; j < c; ++j) {
      rows[i][j] = (j == (i + 1) % c) ? transition_strength : off;
    }
  }
  rows[c][0] = 1.0;  // every rally opens with label 0 (the serve)
  return rows;
}

SynthCorpus generate(const SynthConfig& config) {
  config.validate();

  SynthCorpus corpus;
  corpus.labels = config.labels.empty() ? LabelSet::default_table_tennis()
                                        : LabelSet(config.labels);
  const int c = corpus.labels.size();
  const int dim = config.feature_dim;
  const auto transition = config.effective_transition();

  // Class means live on dims 1..D-1; dim 0 is reserved for the stroke
  // marker so an analytic detector can find events without the classifier.
  Rng master(config.seed);
  corpus.class_means.assign(static_cast<std::size_t>(c),
                            std::vector<double>(dim, 0.0));
  for (int label = 0; label < c; ++label) {
    for (int d = 1; d < dim; ++d) {
      corpus.class_means[label][d] =
          master.gaussian() * config.class_mean_scale;
    }
  }

  const int half_window = static_cast<int>(config.sigma / 2.0);
  corpus.rallies.reserve(static_cast<std::size_t>(config.rally_count));
  corpus.outcomes.reserve(static_cast<std::size_t>(config.rally_count));

  for (int r = 0; r < config.rally_count; ++r) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(r)));

    const int n_strokes =
        rng.uniform_int(config.strokes_per_rally[0], config.strokes_per_rally[1]);
    std::vector<int> labels(static_cast<std::size_t>(n_strokes));
    int prev = c;  // null row
    for (int k = 0; k < n_strokes; ++k) {
      labels[static_cast<std::size_t>(k)] = rng.categorical(transition[prev]);
      prev = labels[static_cast<std::size_t>(k)];
    }

    std::vector<int> frames(static_cast<std::size_t>(n_strokes));
    int frame = config.lead_in;
    for (int k = 0; k < n_strokes; ++k) {
      if (k > 0) frame += rng.uniform_int(config.gap_range[0], config.gap_range[1]);
      frames[static_cast<std::size_t>(k)] = frame;
    }
    const int num_frames = frame + config.tail + 1;

    LabeledRally rally;
    char id[16];
    std::snprintf(id, sizeof(id), "r%05d", r);
    rally.series.rally_id = id;
    rally.series.fps = config.fps;
    rally.series.feature_dim = dim;
    rally.series.data.resize(static_cast<std::size_t>(num_frames) * dim);
    for (double& v : rally.series.data) v = rng.gaussian() * config.noise_scale;

    for (int k = 0; k < n_strokes; ++k) {
      const int center = frames[static_cast<std::size_t>(k)];
      const auto& mean = corpus.class_means[labels[static_cast<std::size_t>(k)]];
      for (int d = -half_window; d <= half_window; ++d) {
        const int t = center + d;
        if (t < 0 || t >= num_frames) continue;
        const double env = std::cos(d * kPi / config.sigma);
        double* row = rally.series.data.data() +
                      static_cast<std::size_t>(t) * dim;
        row[0] += config.stroke_offset * env;
        for (int j = 1; j < dim; ++j) row[j] += mean[j] * env;
      }
    }
    rally.stroke_frames = std::move(frames);
    rally.stroke_labels = labels;

    Rally outcome;
    outcome.rally_id = rally.series.rally_id;
    for (int label : labels) outcome.strokes.push_back(corpus.labels.name(label));
    outcome.server = (r % 2 == 0) ? Side::A : Side::B;
    double win_prob = config.default_win_prob;
    if (n_strokes >= 3) {
      const auto it = config.win_table.find(trigram_key(
          outcome.strokes[0], outcome.strokes[1], outcome.strokes[2]));
      if (it != config.win_table.end()) win_prob = it->second;
    }
    outcome.winner =
        rng.uniform() < win_prob ? outcome.server : other_side(outcome.server);

    corpus.rallies.push_back(std::move(rally));
    corpus.outcomes.push_back(std::move(outcome));
  }
  return corpus;
}

std::vector<std::vector<long long>> oracle_transition_counts(
    std::span<const std::vector<int>> sequences, int num_labels) {
  std::vector<std::vector<long long>> counts(
      static_cast<std::size_t>(num_labels) + 1,
      std::vector<long long>(num_labels, 0));
  for (const std::vector<int>& seq : sequences) {
    int prev = num_labels;
    for (int label : seq) {
      if (label < 0 || label >= num_labels) {
        throw InputError("unknown label id " + std::to_string(label));
      }
      ++counts[static_cast<std::size_t>(prev)][static_cast<std::size_t>(label)];
      prev = label;
    }
  }
  return counts;
}

}  // namespace strokekit
