#include "strokekit/knowledge_graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "strokekit/classifier.hpp"
#include "strokekit/errors.hpp"

namespace strokekit {

TechniqueGraph TechniqueGraph::uniform(int num_labels) {
  if (num_labels < 2) throw InputError("graph needs at least two labels");
  TechniqueGraph g;
  g.num_labels_ = num_labels;
  g.weights_.assign(
      static_cast<std::size_t>(num_labels + 1) * num_labels, 1.0);
  return g;
}

TechniqueGraph TechniqueGraph::init_from_corpus(
    std::span<const std::vector<int>> sequences, int num_labels) {
  if (num_labels < 2) throw InputError("graph needs at least two labels");
  const int sources = num_labels + 1;
  std::vector<long long> counts(
      static_cast<std::size_t>(sources) * num_labels, 0);

  auto check = [num_labels](int label) {
    if (label < 0 || label >= num_labels) {
      throw InputError("unknown label id " + std::to_string(label) +
                       " in technique sequence");
    }
  };
  for (const std::vector<int>& seq : sequences) {
    int prev = num_labels;  // null start node
    for (int label : seq) {
      check(label);
      ++counts[static_cast<std::size_t>(prev) * num_labels + label];
      prev = label;
    }
  }

  TechniqueGraph g;
  g.num_labels_ = num_labels;
  g.weights_.resize(counts.size());
  for (int s = 0; s < sources; ++s) {
    double* row = g.weights_.data() + static_cast<std::size_t>(s) * num_labels;
    const long long* count_row =
        counts.data() + static_cast<std::size_t>(s) * num_labels;
    long long max_count = 0;
    for (int d = 0; d < num_labels; ++d) {
      max_count = std::max(max_count, count_row[d] + 1);
    }
    for (int d = 0; d < num_labels; ++d) {
      row[d] = static_cast<double>(count_row[d] + 1) /
               static_cast<double>(max_count);
    }
  }
  return g;
}

TechniqueGraph TechniqueGraph::from_matrix(int num_labels,
                                           std::vector<double> matrix) {
  if (num_labels < 2) throw LoadError("graph needs at least two labels");
  const std::size_t expected =
      static_cast<std::size_t>(num_labels + 1) * num_labels;
  if (matrix.size() != expected) {
    throw LoadError("graph matrix has " + std::to_string(matrix.size()) +
                    " entries, expected " + std::to_string(expected));
  }
  for (int s = 0; s <= num_labels; ++s) {
    double row_max = 0.0;
    for (int d = 0; d < num_labels; ++d) {
      const double w = matrix[static_cast<std::size_t>(s) * num_labels + d];
      if (!std::isfinite(w) || w <= 0.0 || w > 1.0) {
        throw LoadError("graph weight out of (0, 1] at row " +
                        std::to_string(s));
      }
      row_max = std::max(row_max, w);
    }
    if (std::abs(row_max - 1.0) > 1e-9) {
      throw LoadError("graph row " + std::to_string(s) +
                      " maximum is not 1");
    }
  }
  TechniqueGraph g;
  g.num_labels_ = num_labels;
  g.weights_ = std::move(matrix);
  return g;
}

void TechniqueGraph::check_source(int source) const {
  if (source < 0 || source > num_labels_) {
    throw InputError("unknown graph source node " + std::to_string(source));
  }
}

void TechniqueGraph::check_label(int label) const {
  if (label < 0 || label >= num_labels_) {
    throw InputError("unknown graph label " + std::to_string(label));
  }
}

std::span<const double> TechniqueGraph::row(int source) const {
  check_source(source);
  return {weights_.data() + static_cast<std::size_t>(source) * num_labels_,
          static_cast<std::size_t>(num_labels_)};
}

void TechniqueGraph::update_row(int source, int predicted, int ground_truth,
                                double beta, double u) {
  check_source(source);
  check_label(predicted);
  check_label(ground_truth);
  if (u < 0.0 || u > 1.0) {
    throw ConfigError("uncertainty must be in [0, 1]");
  }
  const double stride = beta * u;
  if (stride >= 1.0) {
    throw ConfigError("beta * uncertainty = " + std::to_string(stride) +
                      " >= 1 would zero or negate a weight");
  }
  if (stride < 0.0) throw ConfigError("beta must be >= 0");
  if (predicted == ground_truth) return;

  double* row = weights_.data() +
                static_cast<std::size_t>(source) * num_labels_;
  row[predicted] *= 1.0 - stride;
  row[ground_truth] *= 1.0 + stride;
  double row_max = row[0];
  for (int d = 1; d < num_labels_; ++d) row_max = std::max(row_max, row[d]);
  for (int d = 0; d < num_labels_; ++d) row[d] /= row_max;
}

std::vector<double> fuse(std::span<const double> cls_logits,
                         std::span<const double> weight_row, double alpha) {
  if (cls_logits.size() != weight_row.size()) {
    throw InputError("fuse: logit and weight vector lengths differ");
  }
  std::vector<double> combined = minmax_normalize(cls_logits);
  for (std::size_t i = 0; i < combined.size(); ++i) {
    combined[i] += alpha * weight_row[i];
  }
  return softmax(combined);
}

}  // namespace strokekit
