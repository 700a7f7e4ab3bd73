#pragma once

// Full-batch training of the windowed-ansatz models: collocation grids,
// hard-constrained squared-residual loss, Adam, and the normalized L1 test
// metric.
//
// The loss and its parameter gradient are reduced over fixed 64-point chunks
// that are always folded in chunk order, so the OpenMP kernel, the serial
// reference kernel, and any thread count produce bit-identical results. The
// serial kernel is kept as the reference implementation; the benchmark
// target compares the two.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbpinn/ansatz.hpp"
#include "fbpinn/problems.hpp"
#include "fbpinn/tape.hpp"

namespace fbpinn {

// a PDE residual became non-finite during a loss evaluation
class NonFiniteLossError : public std::runtime_error {
 public:
  explicit NonFiniteLossError(size_t point_index)
      : std::runtime_error("non-finite residual at collocation point " +
                           std::to_string(point_index)),
        point_index_(point_index) {}
  size_t point_index() const { return point_index_; }

 private:
  size_t point_index_;
};

struct TrainConfig {
  int steps = 20000;
  double learning_rate = 1e-3;
  std::vector<int> collocation_counts;
  std::vector<int> test_counts;
  uint64_t seed = 0;
  int log_every = 500;
  bool use_active_map = true;  // off = brute-force summation over all subdomains
  bool parallel = true;        // off = serial reference kernel
};

struct TrainHistoryRow {
  int step = 0;
  double time_s = 0.0;
  double train_loss = 0.0;
  double test_l1 = 0.0;
};

struct TrainHistory {
  std::vector<TrainHistoryRow> rows;
};

// header: step,time_s,train_loss,test_l1
void write_history_csv(std::ostream& os, const TrainHistory& h);

struct AdamState {
  std::vector<double> m, v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// standard bias-corrected Adam update
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad,
               double learning_rate);

// Tensor-product uniformly spaced points including the box endpoints,
// row-major with the last dimension fastest. Returns n*dim doubles.
std::vector<double> collocation_grid(const Box& domain, std::span<const int> counts);

// mean |pred - truth| divided by the population standard deviation of truth
double normalized_l1(std::span<const double> pred, std::span<const double> truth);

// Loss machinery over a fixed collocation set. Records one tape program per
// point (or re-records on the fly when the programs would not fit in memory)
// and owns the window/constraint jets, which do not depend on parameters.
class ResidualKernel {
 public:
  ResidualKernel(const ModelSpec& model, const ProblemSpec& problem,
                 std::span<const double> points, const ActiveMap& map);

  size_t num_points() const { return n_points_; }
  size_t num_params() const { return model_->total_params; }

  // mean squared residual; throws NonFiniteLossError on a bad point
  double loss(std::span<const double> params, bool parallel) const;

  // loss and its exact parameter gradient (grad is overwritten)
  double loss_and_grad(std::span<const double> params, std::span<double> grad,
                       bool parallel) const;

  static constexpr size_t kChunk = 64;

 private:
  struct Scratch;
  void compute_chunk(size_t chunk, std::span<const double> params, bool with_grad,
                     Scratch& s) const;
  double reduce(std::span<const double> params, bool with_grad, std::span<double> grad,
                bool parallel) const;
  void emit_point(size_t p, TapeProgram& prog) const;

  const ModelSpec* model_;
  const ProblemSpec* problem_;
  std::span<const double> points_;
  const ActiveMap* map_;
  size_t n_points_ = 0;
  size_t n_chunks_ = 0;

  std::vector<double> source_;       // f at each point
  std::vector<Jet> window_jets_;     // aligned with map_->pairs
  std::vector<Jet> constraint_jets_; // per point
  std::vector<double> seed_;         // d(residual)/d(jet channel), fixed per problem
  std::vector<TapeProgram> programs_;  // empty when re-recording per evaluation
  bool cache_programs_ = false;
};

// Spec-level convenience: mean squared residual of the model over the given
// points (map must be built for exactly these points).
double loss(const ModelSpec& m, const ProblemSpec& p, std::span<const double> points,
            const ActiveMap& map);

// loss and parameter gradient in the model's flat layout
double loss_gradient(const ModelSpec& m, const ProblemSpec& p, std::span<const double> points,
                     const ActiveMap& map, std::span<double> grad);

// constrained model values at each point (row-major points, n x dim)
std::vector<double> evaluate_model(const ModelSpec& m, std::span<const double> points,
                                   size_t n_points, bool parallel = true);
std::vector<double> evaluate_model(const ModelSpec& m, std::span<const double> points,
                                   const ActiveMap& map, bool parallel = true);

struct TrainResult {
  ModelSpec model;
  TrainHistory history;
  bool diverged = false;
  std::string message;
};

// Full-batch Adam for cfg.steps steps. Logs step 0, every log_every steps,
// and the final step; rows carry wall-clock seconds, the training loss, and
// the normalized L1 test metric (against the closed-form solution, or the FD
// reference for helmholtz2d). Divergence aborts and returns the partial
// history with the diverged flag set.
TrainResult train(const ModelSpec& model, const ProblemSpec& problem, const TrainConfig& cfg);

}  // namespace fbpinn
