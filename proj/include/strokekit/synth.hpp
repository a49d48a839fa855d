#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "strokekit/tactics.hpp"
#include "strokekit/types.hpp"

namespace strokekit {

// Deterministic corpus generator: technique sequences from a Markov chain,
// stroke frames with configurable gaps, per-frame features made of Gaussian
// background noise plus cosine-shaped class bumps at stroke frames, and
// rally winners drawn from a per-trigram win table.
struct SynthConfig {
  std::vector<std::string> labels;  // empty -> default table-tennis set

  // Row-stochastic (C+1) x C transitions, label rows first, null row last.
  // Empty -> a strong prior: null goes to label 0, label i puts
  // transition_strength on (i+1) mod C and spreads the rest uniformly.
  std::vector<std::vector<double>> transition;
  double transition_strength = 0.7;

  int rally_count = 500;
  std::array<int, 2> strokes_per_rally = {4, 10};
  std::array<int, 2> gap_range = {12, 30};  // frames; min must be >= sigma
  int lead_in = 20;
  int tail = 20;
  int max_rally_frames = 0;  // 0 = unlimited

  int feature_dim = 32;
  double sigma = 8.0;
  double noise_scale = 2.5;       // background Gaussian noise, all dims
  double class_mean_scale = 1.0;  // cluster-overlap knob for dims 1..D-1
  double stroke_offset = 6.0;     // event marker on dim 0

  // Probability that the server wins, keyed by the rally's first trigram
  // ("tec1,tec2,tec3"). Rallies whose first trigram is absent (or that have
  // fewer than three strokes) use default_win_prob.
  std::map<std::string, double> win_table;
  double default_win_prob = 0.5;

  double fps = 25.0;
  std::uint64_t seed = 42;

  // Throws ConfigError on non-stochastic rows, gaps below sigma, or rallies
  // that cannot fit inside max_rally_frames.
  void validate() const;

  // The transition matrix actually used (explicit rows, or the strong-prior
  // default when `transition` is empty).
  std::vector<std::vector<double>> effective_transition() const;
};

struct SynthCorpus {
  LabelSet labels;
  std::vector<LabeledRally> rallies;
  std::vector<Rally> outcomes;  // parallel to rallies
  std::vector<std::vector<double>> class_means;
};

SynthCorpus generate(const SynthConfig& config);

// Exhaustive (C+1) x C transition counts over label-id sequences; the null
// row (index C) counts sequence starts. Test oracle for graph construction.
std::vector<std::vector<long long>> oracle_transition_counts(
    std::span<const std::vector<int>> sequences, int num_labels);

}  // namespace strokekit
