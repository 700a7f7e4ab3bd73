#pragma once

// Solution ansatz: windowed, input-normalized subdomain networks summed over
// all decomposition levels and averaged by 1/L, then multiplied by a
// constraining operator that enforces Dirichlet boundary values exactly:
//
//   u(x) = C(x) * (1/L) * sum_l sum_j  w_lj(x) * v_lj(normalize_lj(x))
//
// The PINN baseline is the degenerate case of a single global subdomain
// (window identically one, inputs normalized over the whole domain), so all
// models share one evaluation, loss, and optimizer path.
//
// Every evaluation route (plain value, jet, tape) accumulates active terms
// in (level, j) order, multiplies window * network in that operand order,
// scales by the precomputed 1/L, and applies the constraint last. Keeping
// the routes bit-identical is a tested guarantee.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fbpinn/decomposition.hpp"
#include "fbpinn/jet.hpp"
#include "fbpinn/network.hpp"
#include "fbpinn/tape.hpp"

namespace fbpinn {

// One multiplicative factor tanh(sign*(x_dim - loc)/sharpness); the product
// over factors vanishes exactly on each constrained boundary face.
struct ConstraintFactor {
  int dim = 0;
  double loc = 0.0;
  double sign = 1.0;
  double sharpness = 1.0;
};

struct ConstraintOp {
  std::vector<ConstraintFactor> factors;

  double value(std::span<const double> x) const;
  Jet jet(int dim, std::span<const double> x) const;
};

// factors for every face of the box: tanh((x-lo)/s) * tanh((hi-x)/s) per dim
ConstraintOp dirichlet_box_constraint(const Box& box, double sharpness);

enum class ModelKind : uint8_t { MultilevelFbpinn, OneLevelFbpinn, Pinn };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

struct ModelSpec {
  ModelKind kind = ModelKind::MultilevelFbpinn;
  Decomposition dec;
  std::vector<NetworkParams> nets;  // decomposition order: level asc, j asc
  ConstraintOp constraint;
  std::vector<size_t> net_offsets;  // flat-parameter offset per net
  size_t total_params = 0;

  int dim() const { return dec.dim; }
  int num_levels() const { return dec.num_levels(); }
  size_t net_index(uint32_t level, uint32_t j) const;
  const NetworkParams& net(uint32_t level, uint32_t j) const { return nets[net_index(level, j)]; }

  // canonical flat parameter vector: nets in decomposition order, each in
  // the network module's flat order
  std::vector<double> flat_params() const;
  void set_flat_params(std::span<const double> p);
};

// Builds a model with identical subdomain networks.
// hidden_sizes lists the hidden layer widths (input/output sizes implied);
// network k is initialized from derive_seed(seed, k).
ModelSpec make_model(ModelKind kind, Decomposition dec, std::span<const int> hidden_sizes,
                     ConstraintOp constraint, uint64_t seed);

// PINN baseline over the global domain box.
ModelSpec make_pinn(const Box& domain, std::span<const int> hidden_sizes, ConstraintOp constraint,
                    uint64_t seed);

// Windowed subdomain-network sum over the given active pairs, scaled by 1/L.
double raw_solution(const ModelSpec& m, std::span<const double> x,
                    std::span<const ActivePair> active);
Jet raw_solution_jet(const ModelSpec& m, std::span<const double> x,
                     std::span<const ActivePair> active);

// constraint(x) * raw_solution(x)
double constrained_solution(const ModelSpec& m, std::span<const double> x,
                            std::span<const ActivePair> active);
Jet constrained_solution_jet(const ModelSpec& m, std::span<const double> x,
                             std::span<const ActivePair> active);

// Records constrained_solution on a tape against the model's flat parameter
// layout. Window and constraint jets are parameter-independent and may be
// supplied precomputed; window_jets must align with `active`.
uint32_t emit_constrained_solution(TapeProgram& prog, const ModelSpec& m,
                                   std::span<const double> x, std::span<const ActivePair> active,
                                   std::span<const Jet> window_jets, const Jet& constraint_jet);

// all (level, j) pairs of the decomposition, the brute-force active set
std::vector<ActivePair> all_pairs(const Decomposition& dec);

// active pairs for a single point
std::vector<ActivePair> active_pairs_at(const Decomposition& dec, std::span<const double> x);

// Text checkpoint: header (kind, dims, overlap ratio, level counts, layer
// sizes, constraint factors, domain box) followed by the flat parameters,
// one shortest-round-trip double per line.
void save_checkpoint(std::ostream& os, const ModelSpec& m);
ModelSpec load_checkpoint(std::istream& is);

}  // namespace fbpinn
