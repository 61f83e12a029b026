#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "sagin/rng.hpp"

namespace sagin {

enum class Head { Identity, Softmax };

// Fully-connected net with tanh hidden layers and an identity or softmax
// output head. Weights are row-major (out x in) per layer. Double precision
// throughout so the finite-difference checks are meaningful.
struct Mlp {
  std::vector<int> sizes;  // input, hidden..., output
  Head head = Head::Identity;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  // Xavier-uniform initialization, deterministic per seed.
  static Mlp xavier(std::vector<int> layer_sizes, Head head, std::uint64_t seed);

  int input_size() const { return sizes.front(); }
  int output_size() const { return sizes.back(); }
  int layer_count() const { return static_cast<int>(weights.size()); }
  std::size_t parameter_count() const;
};

struct ForwardCache {
  std::vector<double> input;
  std::vector<std::vector<double>> hidden;  // post-tanh activations per hidden layer
  std::vector<double> logits;               // pre-head output layer
  std::vector<double> output;               // post-head
};

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  static Gradients zeros_like(const Mlp& net);
  void add(const Gradients& other);
  void scale(double factor);
};

std::vector<double> softmax(std::span<const double> logits);

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input);
ForwardCache mlp_forward_cached(const Mlp& net, std::span<const double> input);

// Reverse-mode gradients of the forward map. `output_grad` is the loss
// gradient with respect to the post-head output; the head Jacobian is applied
// internally. Accumulates into `accum` (one allocation per batch).
void mlp_backward_into(const Mlp& net, const ForwardCache& cache,
                       std::span<const double> output_grad, Gradients& accum);
Gradients mlp_backward(const Mlp& net, const ForwardCache& cache,
                       std::span<const double> output_grad);

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<std::vector<double>> m_weights, v_weights, m_biases, v_biases;

  static AdamState for_net(const Mlp& net, double learning_rate);
};

void adam_step(Mlp& net, const Gradients& grads, AdamState& state);

// Max relative error between analytic and central-difference gradients of a
// random linear functional of the output. h = 1e-5.
double gradient_check(const Mlp& net, std::uint64_t seed);
double gradient_check_against(Mlp net, std::span<const double> input,
                              std::span<const double> coeffs, const Gradients& analytic);

// target <- tau * source + (1 - tau) * target, elementwise.
void soft_update(const Mlp& source, Mlp& target, double tau);

// Versioned text serialization (layer sizes header, then row-major values).
void save_mlp(const Mlp& net, std::ostream& out);
Mlp load_mlp(std::istream& in);

}  // namespace sagin
