#pragma once

// Fully connected networks: u = f_n ∘ ... ∘ f_1(x), f_i(x) = act_i(W_i x + b_i).
// Hidden layers use tanh, the output layer is identity. All evaluation paths
// (plain value, jet forward, tape emission) accumulate each row as
// bias + sum_k w_k * x_k in column order so they agree bit for bit.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fbpinn/jet.hpp"
#include "fbpinn/tape.hpp"

namespace fbpinn {

enum class Activation : uint8_t { Tanh, Identity };

struct NetworkParams {
  std::vector<int> sizes;                       // layer widths, input first
  std::vector<std::vector<double>> weights;     // per layer, row-major d_i x d_{i-1}
  std::vector<std::vector<double>> biases;      // per layer, length d_i
  std::vector<Activation> activations;          // per layer

  int input_dim() const { return sizes.front(); }
  int output_dim() const { return sizes.back(); }
  int num_layers() const { return static_cast<int>(weights.size()); }
  size_t param_count() const;
};

// Deterministic counter-based generator (splitmix64). Gives bit-identical
// streams on every platform, which the reproducibility guarantees rely on.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}
  uint64_t next_u64();
  double next_unit();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

 private:
  uint64_t state_;
};

// stable per-stream seed derivation (e.g. one stream per subdomain network)
uint64_t derive_seed(uint64_t seed, uint64_t stream);

// Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases,
// tanh hidden layers, identity output layer.
NetworkParams init_fcn(std::span<const int> layer_sizes, uint64_t seed);

// scalar forward pass, output_dim must be 1
double fcn_forward(const NetworkParams& net, std::span<const double> x);

// forward pass over jets (inputs carry their own derivative seeding)
Jet fcn_forward_jet(const NetworkParams& net, std::span<const Jet> x);

// value + exact first and diagonal second input derivatives at x
DualValue eval_with_input_derivatives(const NetworkParams& net, std::span<const double> x);

// Records the forward pass on a tape. `inputs` are node ids of the network
// inputs; parameter slots start at slot_base and follow the canonical flat
// order (per layer: W row-major, then b). Returns the output node id.
uint32_t emit_fcn(TapeProgram& prog, const NetworkParams& net, std::span<const uint32_t> inputs,
                  uint32_t slot_base);

// canonical flat parameter order: per layer, W row-major then b
void copy_params_flat(const NetworkParams& net, std::span<double> out);
void load_params_flat(NetworkParams& net, std::span<const double> in);

}  // namespace fbpinn
