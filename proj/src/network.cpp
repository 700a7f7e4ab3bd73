#include "fbpinn/network.hpp"

#include <cmath>
#include <stdexcept>

namespace fbpinn {

size_t NetworkParams::param_count() const {
  size_t n = 0;
  for (size_t i = 0; i < weights.size(); ++i) n += weights[i].size() + biases[i].size();
  return n;
}

uint64_t Rng::next_u64() {
  // splitmix64 (Vigna), public domain reference constants
  uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

uint64_t derive_seed(uint64_t seed, uint64_t stream) {
  Rng r(seed ^ (0xA0761D6478BD642FULL * (stream + 1)));
  return r.next_u64();
}

NetworkParams init_fcn(std::span<const int> layer_sizes, uint64_t seed) {
  if (layer_sizes.size() < 2) throw std::invalid_argument("init_fcn: need at least 2 layer sizes");
  for (int s : layer_sizes) {
    if (s <= 0) throw std::invalid_argument("init_fcn: zero-size layer");
  }

  NetworkParams net;
  net.sizes.assign(layer_sizes.begin(), layer_sizes.end());
  Rng rng(seed);
  const int n_layers = static_cast<int>(layer_sizes.size()) - 1;
  for (int l = 0; l < n_layers; ++l) {
    const int fan_in = layer_sizes[static_cast<size_t>(l)];
    const int fan_out = layer_sizes[static_cast<size_t>(l) + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::vector<double> w(static_cast<size_t>(fan_in) * static_cast<size_t>(fan_out));
    for (double& v : w) v = rng.uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(static_cast<size_t>(fan_out), 0.0);
    net.activations.push_back(l + 1 == n_layers ? Activation::Identity : Activation::Tanh);
  }
  return net;
}

double fcn_forward(const NetworkParams& net, std::span<const double> x) {
  if (static_cast<int>(x.size()) != net.input_dim()) {
    throw std::invalid_argument("fcn_forward: input dimension mismatch");
  }
  if (net.output_dim() != 1) throw std::invalid_argument("fcn_forward: scalar output expected");

  std::vector<double> cur(x.begin(), x.end());
  std::vector<double> next;
  for (int l = 0; l < net.num_layers(); ++l) {
    const int rows = net.sizes[static_cast<size_t>(l) + 1];
    const int cols = net.sizes[static_cast<size_t>(l)];
    const auto& w = net.weights[static_cast<size_t>(l)];
    const auto& b = net.biases[static_cast<size_t>(l)];
    next.resize(static_cast<size_t>(rows));
    for (int r = 0; r < rows; ++r) {
      double acc = b[static_cast<size_t>(r)];
      const double* wr = w.data() + static_cast<size_t>(r) * static_cast<size_t>(cols);
      for (int c = 0; c < cols; ++c) acc += wr[c] * cur[static_cast<size_t>(c)];
      next[static_cast<size_t>(r)] =
          net.activations[static_cast<size_t>(l)] == Activation::Tanh ? std::tanh(acc) : acc;
    }
    cur.swap(next);
  }
  return cur[0];
}

Jet fcn_forward_jet(const NetworkParams& net, std::span<const Jet> x) {
  if (static_cast<int>(x.size()) != net.input_dim()) {
    throw std::invalid_argument("fcn_forward_jet: input dimension mismatch");
  }
  const int d = x.front().dim;
  std::vector<Jet> cur(x.begin(), x.end());
  std::vector<Jet> next;
  for (int l = 0; l < net.num_layers(); ++l) {
    const int rows = net.sizes[static_cast<size_t>(l) + 1];
    const int cols = net.sizes[static_cast<size_t>(l)];
    const auto& w = net.weights[static_cast<size_t>(l)];
    const auto& b = net.biases[static_cast<size_t>(l)];
    next.assign(static_cast<size_t>(rows), Jet(d));
    for (int r = 0; r < rows; ++r) {
      Jet acc = Jet::constant(d, b[static_cast<size_t>(r)]);
      const double* wr = w.data() + static_cast<size_t>(r) * static_cast<size_t>(cols);
      for (int c = 0; c < cols; ++c) {
        for (int i = 0; i < jet_width(d); ++i) {
          acc.c[static_cast<size_t>(i)] += wr[c] * cur[static_cast<size_t>(c)].c[static_cast<size_t>(i)];
        }
      }
      next[static_cast<size_t>(r)] =
          net.activations[static_cast<size_t>(l)] == Activation::Tanh ? tanh(acc) : acc;
    }
    cur.swap(next);
  }
  return cur[0];
}

DualValue eval_with_input_derivatives(const NetworkParams& net, std::span<const double> x) {
  const int d = static_cast<int>(x.size());
  std::vector<Jet> in(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) in[static_cast<size_t>(i)] = Jet::variable(d, i, x[static_cast<size_t>(i)]);
  return to_dual(fcn_forward_jet(net, in));
}

uint32_t emit_fcn(TapeProgram& prog, const NetworkParams& net, std::span<const uint32_t> inputs,
                  uint32_t slot_base) {
  if (static_cast<int>(inputs.size()) != net.input_dim()) {
    throw std::invalid_argument("emit_fcn: input dimension mismatch");
  }
  std::vector<uint32_t> cur(inputs.begin(), inputs.end());
  std::vector<uint32_t> next;
  std::vector<std::pair<uint32_t, uint32_t>> terms;
  uint32_t slot = slot_base;
  for (int l = 0; l < net.num_layers(); ++l) {
    const int rows = net.sizes[static_cast<size_t>(l) + 1];
    const int cols = net.sizes[static_cast<size_t>(l)];
    const uint32_t w_base = slot;
    const uint32_t b_base = slot + static_cast<uint32_t>(rows * cols);
    next.clear();
    for (int r = 0; r < rows; ++r) {
      terms.clear();
      for (int c = 0; c < cols; ++c) {
        terms.emplace_back(w_base + static_cast<uint32_t>(r * cols + c),
                           cur[static_cast<size_t>(c)]);
      }
      uint32_t node = prog.affine(b_base + static_cast<uint32_t>(r), terms);
      if (net.activations[static_cast<size_t>(l)] == Activation::Tanh) node = prog.tanh(node);
      next.push_back(node);
    }
    cur.swap(next);
    slot = b_base + static_cast<uint32_t>(rows);
  }
  return cur[0];
}

void copy_params_flat(const NetworkParams& net, std::span<double> out) {
  size_t k = 0;
  for (int l = 0; l < net.num_layers(); ++l) {
    for (double v : net.weights[static_cast<size_t>(l)]) out[k++] = v;
    for (double v : net.biases[static_cast<size_t>(l)]) out[k++] = v;
  }
}

void load_params_flat(NetworkParams& net, std::span<const double> in) {
  size_t k = 0;
  for (int l = 0; l < net.num_layers(); ++l) {
    for (double& v : net.weights[static_cast<size_t>(l)]) v = in[k++];
    for (double& v : net.biases[static_cast<size_t>(l)]) v = in[k++];
  }
}

}  // namespace fbpinn
