#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "strokekit/rng.hpp"

namespace strokekit {

// Single-hidden-layer feed-forward network with tanh activation and linear
// output. Weights are row-major: w1 is hidden_dim x in_dim, w2 is
// out_dim x hidden_dim.
struct Mlp {
  int in_dim = 0;
  int hidden_dim = 0;
  int out_dim = 0;
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  std::vector<double> b2;

  static Mlp init(int in_dim, int hidden_dim, int out_dim, Rng& rng);

  // Fills `hidden` (tanh activations) and `out` (raw logits). Buffers are
  // resized as needed so they can be reused across calls.
  void forward(std::span<const double> x, std::vector<double>& hidden,
               std::vector<double>& out) const;

  bool finite() const;
};

// Gradient accumulator with the same shapes as the network.
struct MlpGrad {
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  std::vector<double> b2;

  static MlpGrad zeros_like(const Mlp& net);
  void reset();
};

// Accumulates dL/dparams into `grad` given the input, the hidden activations
// from forward(), and dL/dout.
void mlp_backward(const Mlp& net, std::span<const double> x,
                  std::span<const double> hidden,
                  std::span<const double> dout, MlpGrad& grad);

void apply_sgd(Mlp& net, const MlpGrad& grad, double learning_rate);

}  // namespace strokekit
