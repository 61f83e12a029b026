#include "sagin/nn.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace sagin {

namespace {

void check_shapes(const Mlp& net) {
  if (net.sizes.size() < 2) throw std::invalid_argument("mlp: need at least two layer sizes");
  if (net.weights.size() != net.sizes.size() - 1 || net.biases.size() != net.weights.size()) {
    throw std::invalid_argument("mlp: layer count mismatch");
  }
}

// y = W x + b, W row-major (rows x cols)
void affine(const std::vector<double>& w, const std::vector<double>& b, int rows, int cols,
            const double* x, double* y) {
  for (int r = 0; r < rows; ++r) {
    const double* wr = w.data() + static_cast<std::size_t>(r) * cols;
    double acc = b[static_cast<std::size_t>(r)];
    for (int c = 0; c < cols; ++c) acc += wr[c] * x[c];
    y[r] = acc;
  }
}

}  // namespace

Mlp Mlp::xavier(std::vector<int> layer_sizes, Head head, std::uint64_t seed) {
  Mlp net;
  net.sizes = std::move(layer_sizes);
  net.head = head;
  if (net.sizes.size() < 2) throw std::invalid_argument("mlp: need at least two layer sizes");
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < net.sizes.size(); ++l) {
    const int fan_in = net.sizes[l];
    const int fan_out = net.sizes[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::vector<double> w(static_cast<std::size_t>(fan_out) * fan_in);
    for (double& v : w) v = rng.uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(static_cast<std::size_t>(fan_out), 0.0);
  }
  return net;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

Gradients Gradients::zeros_like(const Mlp& net) {
  Gradients g;
  g.weights.reserve(net.weights.size());
  g.biases.reserve(net.biases.size());
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    g.weights.emplace_back(net.weights[l].size(), 0.0);
    g.biases.emplace_back(net.biases[l].size(), 0.0);
  }
  return g;
}

void Gradients::add(const Gradients& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (std::size_t i = 0; i < weights[l].size(); ++i) weights[l][i] += other.weights[l][i];
    for (std::size_t i = 0; i < biases[l].size(); ++i) biases[l][i] += other.biases[l][i];
  }
}

void Gradients::scale(double factor) {
  for (auto& w : weights)
    for (double& v : w) v *= factor;
  for (auto& b : biases)
    for (double& v : b) v *= factor;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> probs(logits.size());
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - max_logit);
    sum += probs[i];
  }
  for (double& p : probs) p /= sum;
  return probs;
}

ForwardCache mlp_forward_cached(const Mlp& net, std::span<const double> input) {
  check_shapes(net);
  if (static_cast<int>(input.size()) != net.input_size()) {
    throw std::invalid_argument("mlp_forward: input size mismatch");
  }
  ForwardCache cache;
  cache.input.assign(input.begin(), input.end());
  const double* x = cache.input.data();
  const int layers = net.layer_count();
  cache.hidden.reserve(static_cast<std::size_t>(layers) - 1);
  std::vector<double> buf;
  for (int l = 0; l < layers; ++l) {
    const int rows = net.sizes[static_cast<std::size_t>(l) + 1];
    const int cols = net.sizes[static_cast<std::size_t>(l)];
    buf.assign(static_cast<std::size_t>(rows), 0.0);
    affine(net.weights[static_cast<std::size_t>(l)], net.biases[static_cast<std::size_t>(l)],
           rows, cols, x, buf.data());
    if (l + 1 < layers) {
      for (double& v : buf) v = std::tanh(v);
      cache.hidden.push_back(buf);
      x = cache.hidden.back().data();
    } else {
      cache.logits = buf;
    }
  }
  cache.output = (net.head == Head::Softmax) ? softmax(cache.logits) : cache.logits;
  return cache;
}

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input) {
  return mlp_forward_cached(net, input).output;
}

void mlp_backward_into(const Mlp& net, const ForwardCache& cache,
                       std::span<const double> output_grad, Gradients& accum) {
  check_shapes(net);
  const int layers = net.layer_count();
  if (static_cast<int>(cache.input.size()) != net.input_size() ||
      static_cast<int>(cache.hidden.size()) != layers - 1 ||
      static_cast<int>(cache.logits.size()) != net.output_size() ||
      static_cast<int>(output_grad.size()) != net.output_size()) {
    throw std::invalid_argument("mlp_backward: cache does not match this net");
  }

  // Head Jacobian: identity passes the gradient through; softmax contracts it.
  std::vector<double> delta(output_grad.begin(), output_grad.end());
  if (net.head == Head::Softmax) {
    const std::vector<double>& p = cache.output;
    double dot = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) dot += p[i] * delta[i];
    for (std::size_t i = 0; i < p.size(); ++i) delta[i] = p[i] * (delta[i] - dot);
  }

  std::vector<double> next_delta;
  for (int l = layers - 1; l >= 0; --l) {
    const int rows = net.sizes[static_cast<std::size_t>(l) + 1];
    const int cols = net.sizes[static_cast<std::size_t>(l)];
    const double* below =
        (l == 0) ? cache.input.data() : cache.hidden[static_cast<std::size_t>(l) - 1].data();
    auto& gw = accum.weights[static_cast<std::size_t>(l)];
    auto& gb = accum.biases[static_cast<std::size_t>(l)];
    for (int r = 0; r < rows; ++r) {
      const double d = delta[static_cast<std::size_t>(r)];
      gb[static_cast<std::size_t>(r)] += d;
      double* gwr = gw.data() + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) gwr[c] += d * below[c];
    }
    if (l == 0) break;
    // propagate through W^T and the tanh derivative of the layer below
    next_delta.assign(static_cast<std::size_t>(cols), 0.0);
    const auto& w = net.weights[static_cast<std::size_t>(l)];
    for (int r = 0; r < rows; ++r) {
      const double d = delta[static_cast<std::size_t>(r)];
      const double* wr = w.data() + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) next_delta[static_cast<std::size_t>(c)] += d * wr[c];
    }
    const auto& act = cache.hidden[static_cast<std::size_t>(l) - 1];
    for (int c = 0; c < cols; ++c) {
      next_delta[static_cast<std::size_t>(c)] *= 1.0 - act[static_cast<std::size_t>(c)] *
                                                           act[static_cast<std::size_t>(c)];
    }
    delta.swap(next_delta);
  }
}

Gradients mlp_backward(const Mlp& net, const ForwardCache& cache,
                       std::span<const double> output_grad) {
  Gradients g = Gradients::zeros_like(net);
  mlp_backward_into(net, cache, output_grad, g);
  return g;
}

AdamState AdamState::for_net(const Mlp& net, double learning_rate) {
  AdamState s;
  s.learning_rate = learning_rate;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    s.m_weights.emplace_back(net.weights[l].size(), 0.0);
    s.v_weights.emplace_back(net.weights[l].size(), 0.0);
    s.m_biases.emplace_back(net.biases[l].size(), 0.0);
    s.v_biases.emplace_back(net.biases[l].size(), 0.0);
  }
  return s;
}

namespace {
void adam_update(std::vector<double>& param, const std::vector<double>& grad,
                 std::vector<double>& m, std::vector<double>& v, const AdamState& s,
                 double bias1, double bias2) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * grad[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / bias1;
    const double v_hat = v[i] / bias2;
    param[i] -= s.learning_rate * m_hat / (std::sqrt(v_hat) + s.epsilon);
  }
}
}  // namespace

void adam_step(Mlp& net, const Gradients& grads, AdamState& state) {
  if (grads.weights.size() != net.weights.size()) {
    throw std::invalid_argument("adam_step: gradient shape mismatch");
  }
  ++state.step;
  const double bias1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    adam_update(net.weights[l], grads.weights[l], state.m_weights[l], state.v_weights[l],
                state, bias1, bias2);
    adam_update(net.biases[l], grads.biases[l], state.m_biases[l], state.v_biases[l],
                state, bias1, bias2);
  }
}

double gradient_check_against(Mlp net, std::span<const double> input,
                              std::span<const double> coeffs, const Gradients& analytic) {
  constexpr double kStep = 1e-5;
  const auto loss = [&](const Mlp& n) {
    const std::vector<double> out = mlp_forward(n, input);
    double acc = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) acc += coeffs[i] * out[i];
    return acc;
  };

  double max_rel = 0.0;
  const auto probe = [&](std::vector<double>& param, const std::vector<double>& grad) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      const double saved = param[i];
      param[i] = saved + kStep;
      const double up = loss(net);
      param[i] = saved - kStep;
      const double down = loss(net);
      param[i] = saved;
      const double numeric = (up - down) / (2.0 * kStep);
      const double denom = std::max(std::abs(numeric) + std::abs(grad[i]), 1e-6);
      max_rel = std::max(max_rel, std::abs(numeric - grad[i]) / denom);
    }
  };
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    probe(net.weights[l], analytic.weights[l]);
    probe(net.biases[l], analytic.biases[l]);
  }
  return max_rel;
}

double gradient_check(const Mlp& net, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> input(static_cast<std::size_t>(net.input_size()));
  for (double& v : input) v = rng.uniform(-1.0, 1.0);
  std::vector<double> coeffs(static_cast<std::size_t>(net.output_size()));
  for (double& v : coeffs) v = rng.uniform(-1.0, 1.0);

  const ForwardCache cache = mlp_forward_cached(net, input);
  const Gradients analytic = mlp_backward(net, cache, coeffs);
  return gradient_check_against(net, input, coeffs, analytic);
}

void soft_update(const Mlp& source, Mlp& target, double tau) {
  if (source.sizes != target.sizes) {
    throw std::invalid_argument("soft_update: shape mismatch");
  }
  for (std::size_t l = 0; l < source.weights.size(); ++l) {
    for (std::size_t i = 0; i < source.weights[l].size(); ++i) {
      target.weights[l][i] += tau * (source.weights[l][i] - target.weights[l][i]);
    }
    for (std::size_t i = 0; i < source.biases[l].size(); ++i) {
      target.biases[l][i] += tau * (source.biases[l][i] - target.biases[l][i]);
    }
  }
}

void save_mlp(const Mlp& net, std::ostream& out) {
  out << "mlp 1\n";
  out << (net.head == Head::Softmax ? "softmax" : "identity") << '\n';
  out << net.sizes.size();
  for (int s : net.sizes) out << ' ' << s;
  out << '\n';
  out.precision(17);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    for (double v : net.weights[l]) out << v << '\n';
    for (double v : net.biases[l]) out << v << '\n';
  }
}

Mlp load_mlp(std::istream& in) {
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "mlp" || version != 1) throw std::runtime_error("load_mlp: bad header");
  std::string head_name;
  in >> head_name;
  std::size_t count = 0;
  in >> count;
  if (count < 2 || count > 64) throw std::runtime_error("load_mlp: bad layer count");
  std::vector<int> sizes(count);
  for (int& s : sizes) {
    in >> s;
    if (s <= 0) throw std::runtime_error("load_mlp: bad layer size");
  }
  Mlp net = Mlp::xavier(sizes, head_name == "softmax" ? Head::Softmax : Head::Identity, 0);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    for (double& v : net.weights[l]) in >> v;
    for (double& v : net.biases[l]) in >> v;
  }
  if (!in) throw std::runtime_error("load_mlp: truncated parameter block");
  return net;
}

}  // namespace sagin
