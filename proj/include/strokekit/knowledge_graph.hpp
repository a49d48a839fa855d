#pragma once

#include <span>
#include <vector>

namespace strokekit {

// Directed technique-transition graph. Sources are the C technique labels
// plus a "null" start node (row index C); destinations are the C labels
// only, so no edge ever enters "null". Every weight stays in (0, 1] and
// every row's maximum is 1 after construction and after every update.
class TechniqueGraph {
 public:
  TechniqueGraph() = default;

  // All weights 1 (no evidence).
  static TechniqueGraph uniform(int num_labels);

  // Counts a->b transitions over the label-id sequences (each sequence also
  // contributes null->first), applies add-one smoothing, and divides each
  // row by its maximum. Throws InputError on out-of-range ids.
  static TechniqueGraph init_from_corpus(
      std::span<const std::vector<int>> sequences, int num_labels);

  // Deserialization path; validates shape and the row invariants.
  static TechniqueGraph from_matrix(int num_labels,
                                    std::vector<double> matrix);

  int num_labels() const { return num_labels_; }
  int null_node() const { return num_labels_; }
  int num_sources() const { return num_labels_ + 1; }

  // Transition weights out of `source` (a label id, or null_node()).
  std::span<const double> row(int source) const;

  // Multiplicative correction after a misprediction: shrinks
  // source->predicted by (1 - beta*u), grows source->ground_truth by
  // (1 + beta*u), then renormalizes the row by its maximum. No-op when the
  // prediction was correct. Throws ConfigError when beta*u >= 1.
  void update_row(int source, int predicted, int ground_truth, double beta,
                  double u);

  // Row-major (C+1) x C weights, label rows first, null row last.
  const std::vector<double>& matrix() const { return weights_; }

 private:
  int num_labels_ = 0;
  std::vector<double> weights_;

  void check_source(int source) const;
  void check_label(int label) const;
};

// softmax(minmax(cls_logits) + alpha * weight_row).
std::vector<double> fuse(std::span<const double> cls_logits,
                         std::span<const double> weight_row, double alpha);

}  // namespace strokekit
