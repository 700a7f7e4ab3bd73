#pragma once

// Recorded computation tape over jets: forward-mode input derivatives per
// node, reverse-mode parameter gradients over the whole program.
//
// A TapeProgram is a flat list of nodes recorded once and replayed many
// times against changing parameter vectors. Replaying fills a TapeWorkspace
// with one jet per node (forward) and, on request, one adjoint jet per node
// (reverse). Network parameters are referenced by slot index into an
// external flat parameter array rather than stored in the program, so
// a program stays valid across optimizer steps.
//
// The reverse pass differentiates through all jet channels, i.e. the
// gradient of any function of the output's value/first/second derivative
// channels is exact (third-order derivatives overall).

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fbpinn/jet.hpp"

namespace fbpinn {

enum class TapeOp : uint8_t {
  ConstJet,    // a = payload offset (jet, width W)
  Param,       // a = parameter slot
  Add,         // a, b = operand nodes
  Sub,         // a, b = operand nodes
  Mul,         // a, b = operand nodes
  Neg,         // a = operand node
  Recip,       // a = operand node
  Tanh,        // a = operand node
  Sin,         // a = operand node
  Cos,         // a = operand node
  Exp,         // a = operand node
  ScaleShift,  // a = operand node, b = payload offset of {scale, shift}
  Affine,      // a = args offset, b = term count; args = [bias slot, (weight slot, node)...]
};

struct TapeNode {
  TapeOp op;
  uint32_t a = 0;
  uint32_t b = 0;
};

class TapeProgram {
 public:
  explicit TapeProgram(int dim) : dim_(dim), width_(jet_width(dim)) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("tape dim out of range");
  }

  int dim() const { return dim_; }
  int width() const { return width_; }
  size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

  void clear() {
    nodes_.clear();
    args_.clear();
    payload_.clear();
  }

  // rough footprint, used to decide whether per-point programs are cached
  size_t byte_size() const {
    return nodes_.size() * sizeof(TapeNode) + args_.size() * sizeof(uint32_t) +
           payload_.size() * sizeof(double);
  }

  uint32_t const_jet(const Jet& j) {
    if (j.dim != dim_) throw std::invalid_argument("const_jet dimension mismatch");
    return const_jet(j.data());
  }
  uint32_t const_jet(const double* jet) {
    uint32_t off = static_cast<uint32_t>(payload_.size());
    payload_.insert(payload_.end(), jet, jet + width_);
    return push({TapeOp::ConstJet, off, 0});
  }
  uint32_t constant(double c) {
    Jet j = Jet::constant(dim_, c);
    return const_jet(j.data());
  }
  // input coordinate leaf; equivalent to const_jet of Jet::variable
  uint32_t input(int axis, double x) {
    Jet j = Jet::variable(dim_, axis, x);
    return const_jet(j.data());
  }
  uint32_t param(uint32_t slot) { return push({TapeOp::Param, slot, 0}); }

  uint32_t add(uint32_t a, uint32_t b) { return push({TapeOp::Add, check(a), check(b)}); }
  uint32_t sub(uint32_t a, uint32_t b) { return push({TapeOp::Sub, check(a), check(b)}); }
  uint32_t mul(uint32_t a, uint32_t b) { return push({TapeOp::Mul, check(a), check(b)}); }
  uint32_t neg(uint32_t a) { return push({TapeOp::Neg, check(a), 0}); }
  uint32_t recip(uint32_t a) { return push({TapeOp::Recip, check(a), 0}); }
  // a / b recorded as a * recip(b)
  uint32_t div(uint32_t a, uint32_t b) { return mul(check(a), recip(b)); }
  uint32_t tanh(uint32_t a) { return push({TapeOp::Tanh, check(a), 0}); }
  uint32_t sin(uint32_t a) { return push({TapeOp::Sin, check(a), 0}); }
  uint32_t cos(uint32_t a) { return push({TapeOp::Cos, check(a), 0}); }
  uint32_t exp(uint32_t a) { return push({TapeOp::Exp, check(a), 0}); }

  uint32_t scale_shift(uint32_t a, double s, double t) {
    uint32_t off = static_cast<uint32_t>(payload_.size());
    payload_.push_back(s);
    payload_.push_back(t);
    return push({TapeOp::ScaleShift, check(a), off});
  }

  // bias_slot + sum_k params[weight_slot_k] * node_k. Weights and bias are
  // parameter slots (x-constant by construction), the cheap common case for
  // network layers.
  uint32_t affine(uint32_t bias_slot, std::span<const std::pair<uint32_t, uint32_t>> terms) {
    uint32_t off = static_cast<uint32_t>(args_.size());
    args_.push_back(bias_slot);
    for (const auto& [w_slot, node] : terms) {
      args_.push_back(w_slot);
      args_.push_back(check(node));
    }
    return push({TapeOp::Affine, off, static_cast<uint32_t>(terms.size())});
  }

  const std::vector<TapeNode>& nodes() const { return nodes_; }
  const std::vector<uint32_t>& args() const { return args_; }
  const std::vector<double>& payload() const { return payload_; }

 private:
  uint32_t push(TapeNode n) {
    nodes_.push_back(n);
    return static_cast<uint32_t>(nodes_.size() - 1);
  }
  uint32_t check(uint32_t node) const {
    if (node >= nodes_.size()) throw std::invalid_argument("tape operand out of range");
    return node;
  }

  int dim_;
  int width_;
  std::vector<TapeNode> nodes_;
  std::vector<uint32_t> args_;
  std::vector<double> payload_;
};

// Scratch buffers for replay; reusable across programs and owned per thread.
struct TapeWorkspace {
  std::vector<double> jets;
  std::vector<double> adjoints;
};

// Replays the program forward; returns the jet of the last node.
// Jets of all nodes are left in ws.jets for a subsequent reverse pass.
const double* tape_forward(const TapeProgram& prog, std::span<const double> params,
                           TapeWorkspace& ws);

// Reverse pass over a forward-evaluated workspace. `seed` is the adjoint jet
// of the final node (width prog.width()); parameter adjoints are accumulated
// into grad[slot]. ws.jets must hold the jets of the matching forward call.
void tape_reverse(const TapeProgram& prog, std::span<const double> params,
                  std::span<const double> seed, TapeWorkspace& ws, std::span<double> grad);

// Convenience: forward-evaluate and return the output as a DualValue.
DualValue tape_eval(const TapeProgram& prog, std::span<const double> params);

// Convenience for scalar objectives recorded on a tape: returns the value of
// the last node and accumulates d(value)/d(param) into grad.
double tape_value_and_grad(const TapeProgram& prog, std::span<const double> params,
                           std::span<double> grad);

}  // namespace fbpinn
