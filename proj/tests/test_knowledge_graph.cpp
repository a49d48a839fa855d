#include <doctest.h>

#include <cmath>
#include <vector>

#include "strokekit/classifier.hpp"
#include "strokekit/errors.hpp"
#include "strokekit/knowledge_graph.hpp"
#include "strokekit/rng.hpp"
#include "strokekit/synth.hpp"

using namespace strokekit;

namespace {

// Labels {A=0, B=1}; corpus {(A,B), (A,B), (A,A)} from the smoothed-count
// worked example.
std::vector<std::vector<int>> small_corpus() {
  return {{0, 1}, {0, 1}, {0, 0}};
}

}  // namespace

TEST_CASE("init counts transitions, smooths, and scales rows to max 1") {
  const auto graph = TechniqueGraph::init_from_corpus(small_corpus(), 2);

  // Row A: counts A->A 1, A->B 2; smoothed 2 and 3; divided by 3.
  const auto row_a = graph.row(0);
  CHECK(row_a[0] == doctest::Approx(2.0 / 3.0));
  CHECK(row_a[1] == doctest::Approx(1.0));

  // Row null: counts null->A 3, null->B 0; smoothed 4 and 1; divided by 4.
  const auto row_null = graph.row(graph.null_node());
  CHECK(row_null[0] == doctest::Approx(1.0));
  CHECK(row_null[1] == doctest::Approx(0.25));

  // Row B saw nothing: pure smoothing, uniform 1.
  const auto row_b = graph.row(1);
  CHECK(row_b[0] == doctest::Approx(1.0));
  CHECK(row_b[1] == doctest::Approx(1.0));
}

TEST_CASE("empty corpus gives uniform rows") {
  const auto graph = TechniqueGraph::init_from_corpus({}, 3);
  for (int s = 0; s <= 3; ++s) {
    for (double w : graph.row(s)) CHECK(w == doctest::Approx(1.0));
  }
}

TEST_CASE("unknown labels and nodes are rejected") {
  const std::vector<std::vector<int>> bad = {{0, 5}};
  CHECK_THROWS_AS(TechniqueGraph::init_from_corpus(bad, 2), InputError);
  const auto graph = TechniqueGraph::uniform(2);
  CHECK_THROWS_AS(graph.row(3), InputError);
  CHECK_THROWS_AS(graph.row(-1), InputError);
}

TEST_CASE("the null row is a source but not a destination") {
  const auto graph = TechniqueGraph::init_from_corpus(small_corpus(), 2);
  CHECK(graph.num_sources() == 3);
  CHECK(graph.row(graph.null_node()).size() == 2);
}

TEST_CASE("init matches the exhaustive count oracle on random corpora") {
  Rng rng(19);
  for (int trial = 0; trial < 40; ++trial) {
    const int c = rng.uniform_int(2, 6);
    std::vector<std::vector<int>> sequences(
        static_cast<std::size_t>(rng.uniform_int(0, 100)));
    for (auto& seq : sequences) {
      seq.resize(static_cast<std::size_t>(rng.uniform_int(1, 12)));
      for (int& label : seq) label = rng.uniform_int(0, c - 1);
    }
    const auto graph = TechniqueGraph::init_from_corpus(sequences, c);
    const auto counts = oracle_transition_counts(sequences, c);
    for (int s = 0; s <= c; ++s) {
      long long max_smoothed = 0;
      for (int d = 0; d < c; ++d) {
        max_smoothed = std::max(max_smoothed, counts[s][d] + 1);
      }
      const auto row = graph.row(s);
      for (int d = 0; d < c; ++d) {
        CHECK(row[d] == doctest::Approx(
                            static_cast<double>(counts[s][d] + 1) /
                            static_cast<double>(max_smoothed)));
      }
    }
  }
}

TEST_CASE("fuse combines normalized logits with the weight row") {
  const std::vector<double> logits = {0.0, 1.0, 2.0};  // minmax -> 0, .5, 1
  const std::vector<double> row = {1.0, 0.0, 0.0};
  const auto fused = fuse(logits, row, 1.0);
  CHECK(fused[0] == doctest::Approx(0.38365).epsilon(1e-4));
  CHECK(fused[1] == doctest::Approx(0.23269).epsilon(1e-4));
  CHECK(fused[2] == doctest::Approx(0.38365).epsilon(1e-4));
}

TEST_CASE("alpha zero disables the graph") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> logits(6);
    for (double& v : logits) v = rng.uniform(-3.0, 3.0);
    std::vector<double> row(6);
    for (double& v : row) v = rng.uniform(0.1, 1.0);
    const auto with_graph = fuse(logits, row, 0.0);
    const auto graph_free = softmax(minmax_normalize(logits));
    for (std::size_t i = 0; i < with_graph.size(); ++i) {
      CHECK(with_graph[i] == doctest::Approx(graph_free[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("equal logits and equal weights fuse to uniform") {
  const std::vector<double> logits(4, 1.7);
  const std::vector<double> row(4, 1.0);
  for (double p : fuse(logits, row, 1.0)) {
    CHECK(p == doctest::Approx(0.25));
  }
}

TEST_CASE("update hand trace: shrink wrong edge, grow right edge, rescale") {
  auto graph = TechniqueGraph::uniform(3);
  // Shape row 0 to [1.0, 0.8, 0.5] through from_matrix.
  std::vector<double> matrix = graph.matrix();
  matrix[0] = 1.0;
  matrix[1] = 0.8;
  matrix[2] = 0.5;
  graph = TechniqueGraph::from_matrix(3, std::move(matrix));

  graph.update_row(0, 0, 2, 0.1, 1.0);  // beta*u = 0.1
  const auto row = graph.row(0);
  CHECK(row[0] == doctest::Approx(1.0));
  CHECK(row[1] == doctest::Approx(0.88889).epsilon(1e-5));
  CHECK(row[2] == doctest::Approx(0.61111).epsilon(1e-5));
}

TEST_CASE("correct predictions and zero stride change nothing") {
  auto graph = TechniqueGraph::init_from_corpus(small_corpus(), 2);
  const auto before = graph.matrix();
  graph.update_row(0, 1, 1, 0.2, 0.9);  // correct
  CHECK(graph.matrix() == before);
  graph.update_row(0, 0, 1, 0.2, 0.0);  // wrong but zero stride
  CHECK(graph.matrix() == before);
}

TEST_CASE("stride of one or more is a configuration error") {
  auto graph = TechniqueGraph::uniform(2);
  CHECK_THROWS_AS(graph.update_row(0, 0, 1, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(graph.update_row(0, 0, 1, 2.0, 0.6), ConfigError);
}

TEST_CASE("update property suite over random graphs") {
  Rng rng(101);
  for (int trial = 0; trial < 500; ++trial) {
    const int c = rng.uniform_int(2, 8);
    // Random valid matrix: positive rows scaled to max 1.
    std::vector<double> matrix(static_cast<std::size_t>(c + 1) * c);
    for (int s = 0; s <= c; ++s) {
      double row_max = 0.0;
      for (int d = 0; d < c; ++d) {
        double& w = matrix[static_cast<std::size_t>(s) * c + d];
        w = rng.uniform(0.05, 1.0);
        row_max = std::max(row_max, w);
      }
      for (int d = 0; d < c; ++d) {
        matrix[static_cast<std::size_t>(s) * c + d] /= row_max;
      }
    }
    TechniqueGraph graph = TechniqueGraph::from_matrix(c, matrix);

    const int source = rng.uniform_int(0, c);
    const int pred = rng.uniform_int(0, c - 1);
    int gt = rng.uniform_int(0, c - 1);
    const double beta = rng.uniform(0.0, 0.95);
    const double u = rng.uniform(0.0, 1.0);

    const std::vector<double> before = graph.matrix();
    const auto row_before = std::vector<double>(
        before.begin() + static_cast<std::ptrdiff_t>(source) * c,
        before.begin() + static_cast<std::ptrdiff_t>(source + 1) * c);
    graph.update_row(source, pred, gt, beta, u);
    const std::vector<double>& after = graph.matrix();

    // Untouched rows bit-identical.
    for (int s = 0; s <= c; ++s) {
      if (s == source) continue;
      for (int d = 0; d < c; ++d) {
        CHECK(after[static_cast<std::size_t>(s) * c + d] ==
              before[static_cast<std::size_t>(s) * c + d]);
      }
    }

    const auto row = graph.row(source);
    double row_max = 0.0;
    for (double w : row) {
      CHECK(w > 0.0);
      CHECK(w <= 1.0);
      row_max = std::max(row_max, w);
    }
    CHECK(row_max == 1.0);

    if (pred == gt || beta * u == 0.0) {
      for (int d = 0; d < c; ++d) CHECK(row[d] == row_before[d]);
    } else {
      const double expected_growth =
          (1.0 + beta * u) / (1.0 - beta * u);
      const double ratio_before = row_before[gt] / row_before[pred];
      const double ratio_after = row[gt] / row[pred];
      CHECK(ratio_after / ratio_before ==
            doctest::Approx(expected_growth).epsilon(1e-12));
    }
  }
}
