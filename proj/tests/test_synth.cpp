#include <doctest.h>

#include <cmath>
#include <vector>

#include "strokekit/errors.hpp"
#include "strokekit/synth.hpp"

using namespace strokekit;

namespace {

SynthConfig small_config() {
  SynthConfig config;
  config.rally_count = 30;
  config.feature_dim = 8;
  config.strokes_per_rally = {3, 6};
  config.noise_scale = 1.0;  // separable regime
  config.seed = 7;
  return config;
}

}  // namespace

TEST_CASE("deterministic chain produces identical label sequences") {
  SynthConfig config = small_config();
  config.transition_strength = 1.0;
  const SynthCorpus corpus = generate(config);
  for (const LabeledRally& rally : corpus.rallies) {
    for (std::size_t k = 0; k < rally.stroke_labels.size(); ++k) {
      // null -> 0, then i -> (i+1) mod C.
      CHECK(rally.stroke_labels[k] ==
            static_cast<int>(k) % corpus.labels.size());
    }
  }
}

TEST_CASE("fixed seed reproduces the corpus byte for byte") {
  const SynthConfig config = small_config();
  const SynthCorpus a = generate(config);
  const SynthCorpus b = generate(config);
  REQUIRE(a.rallies.size() == b.rallies.size());
  for (std::size_t i = 0; i < a.rallies.size(); ++i) {
    CHECK(a.rallies[i].series.data == b.rallies[i].series.data);
    CHECK(a.rallies[i].stroke_frames == b.rallies[i].stroke_frames);
    CHECK(a.rallies[i].stroke_labels == b.rallies[i].stroke_labels);
    CHECK(a.outcomes[i].winner == b.outcomes[i].winner);
  }
}

TEST_CASE("empirical transition frequencies approach the configured rows") {
  SynthConfig config;
  config.rally_count = 4000;
  config.feature_dim = 2;  // keep feature generation cheap
  config.strokes_per_rally = {6, 10};
  config.seed = 13;
  const SynthCorpus corpus = generate(config);

  std::vector<std::vector<int>> sequences;
  for (const LabeledRally& rally : corpus.rallies) {
    sequences.push_back(rally.stroke_labels);
  }
  long long total = 0;
  for (const auto& seq : sequences) total += static_cast<long long>(seq.size());
  CHECK(total > 10000);

  const auto counts = oracle_transition_counts(sequences, corpus.labels.size());
  const auto expected = config.effective_transition();
  int rows_checked = 0;
  for (int s = 0; s <= corpus.labels.size(); ++s) {
    long long row_total = 0;
    for (long long v : counts[s]) row_total += v;
    if (row_total < 2000) continue;
    ++rows_checked;
    double l1 = 0.0;
    for (int d = 0; d < corpus.labels.size(); ++d) {
      l1 += std::abs(static_cast<double>(counts[s][d]) / row_total -
                     expected[s][d]);
    }
    CHECK(l1 < 0.05);
  }
  CHECK(rows_checked >= 8);
}

TEST_CASE("stroke frames respect gaps and fit inside the rally") {
  const SynthCorpus corpus = generate(small_config());
  const SynthConfig config = small_config();
  for (const LabeledRally& rally : corpus.rallies) {
    const int n = rally.series.num_frames();
    REQUIRE(!rally.stroke_frames.empty());
    for (std::size_t k = 0; k < rally.stroke_frames.size(); ++k) {
      CHECK(rally.stroke_frames[k] >= 0);
      CHECK(rally.stroke_frames[k] < n);
      if (k > 0) {
        const int gap = rally.stroke_frames[k] - rally.stroke_frames[k - 1];
        CHECK(gap >= config.gap_range[0]);
        CHECK(gap <= config.gap_range[1]);
      }
    }
  }
}

TEST_CASE("a matched filter on the marker dimension finds every stroke") {
  SynthConfig config = small_config();
  config.rally_count = 50;
  const SynthCorpus corpus = generate(config);
  const double pi = 3.14159265358979323846;

  for (const LabeledRally& rally : corpus.rallies) {
    const int n = rally.series.num_frames();
    auto score_at = [&](int center) {
      double score = 0.0;
      for (int d = -4; d <= 4; ++d) {
        const int t = center + d;
        if (t < 0 || t >= n) continue;
        score += std::cos(d * pi / 8.0) * rally.series.frame(t)[0];
      }
      return score;
    };
    // Half the envelope's own energy: ~3.14 * offset / 2.
    const double detect = 3.14 * config.stroke_offset / 2.0;
    for (int frame : rally.stroke_frames) {
      CHECK(score_at(frame) > detect);
    }
  }
}

TEST_CASE("win table drives first-trigram outcomes") {
  SynthConfig config;
  config.rally_count = 4000;
  config.feature_dim = 2;
  config.transition_strength = 1.0;  // every rally opens Serve, Topspin, Short
  config.strokes_per_rally = {3, 3};
  config.win_table["Serve,Topspin,Short"] = 0.9;
  config.seed = 21;
  const SynthCorpus corpus = generate(config);

  int server_wins = 0;
  for (const Rally& rally : corpus.outcomes) {
    if (rally.winner == rally.server) ++server_wins;
  }
  const double rate = static_cast<double>(server_wins) /
                      static_cast<double>(corpus.outcomes.size());
  CHECK(rate == doctest::Approx(0.9).epsilon(0.03));
}

TEST_CASE("invalid configs are rejected") {
  SynthConfig config = small_config();
  config.gap_range = {4, 20};  // below sigma
  CHECK_THROWS_AS(generate(config), ConfigError);

  config = small_config();
  config.transition.assign(3, std::vector<double>(2, 0.6));  // rows sum to 1.2
  CHECK_THROWS_AS(generate(config), ConfigError);

  config = small_config();
  config.strokes_per_rally = {8, 12};
  config.gap_range = {20, 24};
  config.max_rally_frames = 100;  // cannot fit 12 strokes
  CHECK_THROWS_AS(generate(config), ConfigError);
}

TEST_CASE("transition count oracle worked examples") {
  const std::vector<std::vector<int>> corpus = {{0, 1}, {0, 1}, {0, 0}};
  const auto counts = oracle_transition_counts(corpus, 2);
  CHECK(counts[0][1] == 2);  // A->B
  CHECK(counts[0][0] == 1);  // A->A
  CHECK(counts[2][0] == 3);  // null->A
  CHECK(counts[2][1] == 0);

  const auto empty = oracle_transition_counts({}, 2);
  for (const auto& row : empty) {
    for (long long v : row) CHECK(v == 0);
  }

  const std::vector<std::vector<int>> single = {{0}};
  const auto one = oracle_transition_counts(single, 2);
  CHECK(one[2][0] == 1);
  CHECK(one[0][0] == 0);
  CHECK(one[0][1] == 0);
}
