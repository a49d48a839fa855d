#include "strokekit/mlp.hpp"

#include <cassert>
#include <cmath>

namespace strokekit {

namespace {

void init_layer(std::vector<double>& w, int fan_out, int fan_in, Rng& rng) {
  const double scale = std::sqrt(6.0 / (fan_in + fan_out));
  w.resize(static_cast<std::size_t>(fan_out) * fan_in);
  for (double& v : w) v = rng.uniform(-scale, scale);
}

}  // namespace

Mlp Mlp::init(int in_dim, int hidden_dim, int out_dim, Rng& rng) {
  Mlp net;
  net.in_dim = in_dim;
  net.hidden_dim = hidden_dim;
  net.out_dim = out_dim;
  init_layer(net.w1, hidden_dim, in_dim, rng);
  net.b1.assign(hidden_dim, 0.0);
  init_layer(net.w2, out_dim, hidden_dim, rng);
  net.b2.assign(out_dim, 0.0);
  return net;
}

void Mlp::forward(std::span<const double> x, std::vector<double>& hidden,
                  std::vector<double>& out) const {
  assert(static_cast<int>(x.size()) == in_dim);
  hidden.resize(hidden_dim);
  out.resize(out_dim);
  for (int h = 0; h < hidden_dim; ++h) {
    const double* row = w1.data() + static_cast<std::size_t>(h) * in_dim;
    double acc = b1[h];
    for (int i = 0; i < in_dim; ++i) acc += row[i] * x[i];
    hidden[h] = std::tanh(acc);
  }
  for (int o = 0; o < out_dim; ++o) {
    const double* row = w2.data() + static_cast<std::size_t>(o) * hidden_dim;
    double acc = b2[o];
    for (int h = 0; h < hidden_dim; ++h) acc += row[h] * hidden[h];
    out[o] = acc;
  }
}

bool Mlp::finite() const {
  auto all_finite = [](const std::vector<double>& v) {
    for (double x : v) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  };
  return all_finite(w1) && all_finite(b1) && all_finite(w2) && all_finite(b2);
}

MlpGrad MlpGrad::zeros_like(const Mlp& net) {
  MlpGrad g;
  g.w1.assign(net.w1.size(), 0.0);
  g.b1.assign(net.b1.size(), 0.0);
  g.w2.assign(net.w2.size(), 0.0);
  g.b2.assign(net.b2.size(), 0.0);
  return g;
}

void MlpGrad::reset() {
  std::fill(w1.begin(), w1.end(), 0.0);
  std::fill(b1.begin(), b1.end(), 0.0);
  std::fill(w2.begin(), w2.end(), 0.0);
  std::fill(b2.begin(), b2.end(), 0.0);
}

void mlp_backward(const Mlp& net, std::span<const double> x,
                  std::span<const double> hidden,
                  std::span<const double> dout, MlpGrad& grad) {
  assert(static_cast<int>(dout.size()) == net.out_dim);
  // Output layer.
  for (int o = 0; o < net.out_dim; ++o) {
    const double g = dout[o];
    if (g == 0.0) continue;
    double* wrow = grad.w2.data() + static_cast<std::size_t>(o) * net.hidden_dim;
    for (int h = 0; h < net.hidden_dim; ++h) wrow[h] += g * hidden[h];
    grad.b2[o] += g;
  }
  // Hidden layer: dL/dh then through tanh.
  for (int h = 0; h < net.hidden_dim; ++h) {
    double dh = 0.0;
    for (int o = 0; o < net.out_dim; ++o) {
      dh += dout[o] * net.w2[static_cast<std::size_t>(o) * net.hidden_dim + h];
    }
    const double dz = dh * (1.0 - hidden[h] * hidden[h]);
    if (dz == 0.0) continue;
    double* wrow = grad.w1.data() + static_cast<std::size_t>(h) * net.in_dim;
    for (int i = 0; i < net.in_dim; ++i) wrow[i] += dz * x[i];
    grad.b1[h] += dz;
  }
}

void apply_sgd(Mlp& net, const MlpGrad& grad, double learning_rate) {
  auto step = [learning_rate](std::vector<double>& w,
                              const std::vector<double>& g) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= learning_rate * g[i];
  };
  step(net.w1, grad.w1);
  step(net.b1, grad.b1);
  step(net.w2, grad.w2);
  step(net.b2, grad.b2);
}

}  // namespace strokekit
