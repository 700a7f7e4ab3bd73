#include "fbpinn/training.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include "fbpinn/fdsolver.hpp"
#include "fbpinn/textio.hpp"

namespace fbpinn {

void write_history_csv(std::ostream& os, const TrainHistory& h) {
  os << "step,time_s,train_loss,test_l1\n";
  for (const TrainHistoryRow& r : h.rows) {
    os << r.step << "," << format_double(r.time_s) << "," << format_double(r.train_loss) << ","
       << format_double(r.test_l1) << "\n";
  }
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad,
               double learning_rate) {
  if (params.size() != grad.size() || params.size() != state.m.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * (g * g);
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

std::vector<double> collocation_grid(const Box& domain, std::span<const int> counts) {
  const int d = domain.dim();
  if (static_cast<int>(counts.size()) != d) {
    throw std::invalid_argument("collocation_grid: counts/domain dimension mismatch");
  }
  size_t total = 1;
  for (int c : counts) {
    if (c < 2) throw std::invalid_argument("collocation_grid: need at least 2 points per dim");
    total *= static_cast<size_t>(c);
  }

  std::vector<double> pts(total * static_cast<size_t>(d));
  std::vector<int> idx(static_cast<size_t>(d), 0);
  for (size_t p = 0; p < total; ++p) {
    for (int i = 0; i < d; ++i) {
      pts[p * static_cast<size_t>(d) + static_cast<size_t>(i)] =
          domain.lo[static_cast<size_t>(i)] +
          domain.extent(i) * static_cast<double>(idx[static_cast<size_t>(i)]) /
              static_cast<double>(counts[static_cast<size_t>(i)] - 1);
    }
    for (int i = d - 1; i >= 0; --i) {
      if (++idx[static_cast<size_t>(i)] < counts[static_cast<size_t>(i)]) break;
      idx[static_cast<size_t>(i)] = 0;
    }
  }
  return pts;
}

double normalized_l1(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw std::invalid_argument("normalized_l1: size mismatch");
  const size_t m = truth.size();
  if (m < 2) throw std::invalid_argument("normalized_l1: need at least 2 entries");

  double mean = 0.0;
  for (double t : truth) mean += t;
  mean /= static_cast<double>(m);
  double var = 0.0;
  for (double t : truth) var += (t - mean) * (t - mean);
  var /= static_cast<double>(m);
  const double sigma = std::sqrt(var);
  if (!(sigma > 0.0)) throw std::invalid_argument("normalized_l1: degenerate truth set");

  double acc = 0.0;
  for (size_t i = 0; i < m; ++i) acc += std::abs(pred[i] - truth[i]);
  return (acc / static_cast<double>(m)) / sigma;
}

// --- ResidualKernel ---------------------------------------------------------

ResidualKernel::ResidualKernel(const ModelSpec& model, const ProblemSpec& problem,
                               std::span<const double> points, const ActiveMap& map)
    : model_(&model), problem_(&problem), points_(points), map_(&map) {
  const int d = model.dim();
  if (problem.dim() != d) throw std::invalid_argument("kernel: model/problem dimension mismatch");
  n_points_ = map.num_points();
  if (points.size() != n_points_ * static_cast<size_t>(d)) {
    throw std::invalid_argument("kernel: points/map mismatch");
  }
  if (n_points_ == 0) throw std::invalid_argument("kernel: empty collocation set");
  n_chunks_ = (n_points_ + kChunk - 1) / kChunk;

  seed_.resize(static_cast<size_t>(jet_width(d)));
  residual_seed(problem, seed_);

  source_.resize(n_points_);
  constraint_jets_.resize(n_points_);
  window_jets_.resize(map.pairs.size());
  std::vector<uint32_t> level_js;
  std::vector<Jet> level_w;
  for (size_t p = 0; p < n_points_; ++p) {
    const std::span<const double> x = points.subspan(p * static_cast<size_t>(d), static_cast<size_t>(d));
    source_[p] = source(problem, x);
    constraint_jets_[p] = model.constraint.jet(d, x);
    const auto pairs = map.at(p);
    size_t k = 0;
    while (k < pairs.size()) {
      const uint32_t level = pairs[k].level;
      size_t end = k;
      level_js.clear();
      while (end < pairs.size() && pairs[end].level == level) {
        level_js.push_back(pairs[end].j);
        ++end;
      }
      level_w.assign(level_js.size(), Jet(d));
      pou_window_jets(model.dec, static_cast<int>(level), level_js, x, level_w);
      for (size_t i = 0; i < level_js.size(); ++i) {
        window_jets_[map.offsets[p] + k + i] = level_w[i];
      }
      k = end;
    }
  }

  // Cache one recorded program per point when that fits comfortably in
  // memory; otherwise re-record per evaluation (identical node sequence,
  // identical results). Program size scales with the active pair count, so
  // estimate from the probe's per-pair cost and the map's total pair count.
  TapeProgram probe(d);
  emit_point(0, probe);
  const size_t probe_pairs = std::max<size_t>(1, map.at(0).size());
  const size_t estimate = (probe.byte_size() / probe_pairs) * map.pairs.size();
  cache_programs_ = estimate <= size_t{512} * 1024 * 1024;
  if (cache_programs_) {
    programs_.reserve(n_points_);
    for (size_t p = 0; p < n_points_; ++p) {
      TapeProgram prog(d);
      emit_point(p, prog);
      programs_.push_back(std::move(prog));
    }
  }
}

void ResidualKernel::emit_point(size_t p, TapeProgram& prog) const {
  const int d = model_->dim();
  const std::span<const double> x =
      points_.subspan(p * static_cast<size_t>(d), static_cast<size_t>(d));
  const auto pairs = map_->at(p);
  const std::span<const Jet> windows(window_jets_.data() + map_->offsets[p], pairs.size());
  emit_constrained_solution(prog, *model_, x, pairs, windows, constraint_jets_[p]);
}

struct ResidualKernel::Scratch {
  TapeWorkspace ws;
  TapeProgram prog;
  std::vector<double> grad;       // dense, zeroed outside the touched ranges
  std::vector<uint32_t> touched;  // net indices touched by this chunk
  double loss = 0.0;
  size_t bad_point = SIZE_MAX;

  explicit Scratch(int dim) : prog(dim) {}
};

void ResidualKernel::compute_chunk(size_t chunk, std::span<const double> params, bool with_grad,
                                   Scratch& s) const {
  const int d = model_->dim();
  const int W = jet_width(d);
  const size_t begin = chunk * kChunk;
  const size_t end = std::min(begin + kChunk, n_points_);

  s.loss = 0.0;
  s.bad_point = SIZE_MAX;
  s.touched.clear();
  if (with_grad && s.grad.size() != model_->total_params) {
    s.grad.assign(model_->total_params, 0.0);
  }

  double seed[1 + 2 * kMaxDim];
  for (size_t p = begin; p < end; ++p) {
    const TapeProgram* prog = nullptr;
    if (cache_programs_) {
      prog = &programs_[p];
    } else {
      s.prog.clear();
      emit_point(p, s.prog);
      prog = &s.prog;
    }

    const double* out = tape_forward(*prog, params, s.ws);
    Jet u(d);
    jk_copy(u.data(), out, d);
    const std::span<const double> x =
        points_.subspan(p * static_cast<size_t>(d), static_cast<size_t>(d));
    const double r = residual(*problem_, u, x);
    if (!std::isfinite(r)) {
      s.bad_point = p;
      return;
    }
    s.loss += r * r;

    if (with_grad) {
      const double scale = 2.0 * r;
      for (int i = 0; i < W; ++i) seed[i] = scale * seed_[static_cast<size_t>(i)];
      tape_reverse(*prog, params, std::span<const double>(seed, static_cast<size_t>(W)), s.ws,
                   s.grad);
      for (const ActivePair& pr : map_->at(p)) {
        s.touched.push_back(static_cast<uint32_t>(model_->net_index(pr.level, pr.j)));
      }
    }
  }

  if (with_grad) {
    std::sort(s.touched.begin(), s.touched.end());
    s.touched.erase(std::unique(s.touched.begin(), s.touched.end()), s.touched.end());
  }
}

double ResidualKernel::reduce(std::span<const double> params, bool with_grad,
                              std::span<double> grad, bool parallel) const {
  if (with_grad) {
    if (grad.size() != model_->total_params) {
      throw std::invalid_argument("loss_and_grad: gradient size mismatch");
    }
    std::fill(grad.begin(), grad.end(), 0.0);
  }

  const int d = model_->dim();
  double total = 0.0;
  size_t bad_point = SIZE_MAX;

  auto fold = [&](Scratch& s) {
    if (s.bad_point != SIZE_MAX) {
      if (bad_point == SIZE_MAX) bad_point = s.bad_point;
      return;
    }
    if (bad_point != SIZE_MAX) return;
    total += s.loss;
    if (with_grad) {
      for (uint32_t net : s.touched) {
        const size_t off = model_->net_offsets[net];
        const size_t len = model_->nets[net].param_count();
        for (size_t i = off; i < off + len; ++i) {
          grad[i] += s.grad[i];
          s.grad[i] = 0.0;
        }
      }
    }
  };

  if (!parallel) {
    // serial reference: same chunk partials, same fold order, no OpenMP
    Scratch s(d);
    for (size_t c = 0; c < n_chunks_ && bad_point == SIZE_MAX; ++c) {
      compute_chunk(c, params, with_grad, s);
      fold(s);
    }
  } else {
    const size_t window = 16;
    std::vector<Scratch> slots;
    slots.reserve(std::min(window, n_chunks_));
    for (size_t i = 0; i < std::min(window, n_chunks_); ++i) slots.emplace_back(d);

    for (size_t w0 = 0; w0 < n_chunks_ && bad_point == SIZE_MAX; w0 += window) {
      const size_t w_end = std::min(w0 + window, n_chunks_);
#pragma omp parallel for schedule(dynamic)
      for (long c = static_cast<long>(w0); c < static_cast<long>(w_end); ++c) {
        compute_chunk(static_cast<size_t>(c), params, with_grad,
                      slots[static_cast<size_t>(c) - w0]);
      }
      for (size_t c = w0; c < w_end; ++c) fold(slots[c - w0]);
    }
  }

  if (bad_point != SIZE_MAX) throw NonFiniteLossError(bad_point);

  const double n = static_cast<double>(n_points_);
  if (with_grad) {
    for (size_t i = 0; i < grad.size(); ++i) grad[i] = grad[i] / n;
  }
  return total / n;
}

double ResidualKernel::loss(std::span<const double> params, bool parallel) const {
  return reduce(params, false, {}, parallel);
}

double ResidualKernel::loss_and_grad(std::span<const double> params, std::span<double> grad,
                                     bool parallel) const {
  return reduce(params, true, grad, parallel);
}

double loss(const ModelSpec& m, const ProblemSpec& p, std::span<const double> points,
            const ActiveMap& map) {
  ResidualKernel kernel(m, p, points, map);
  const std::vector<double> params = m.flat_params();
  return kernel.loss(params, false);
}

double loss_gradient(const ModelSpec& m, const ProblemSpec& p, std::span<const double> points,
                     const ActiveMap& map, std::span<double> grad) {
  ResidualKernel kernel(m, p, points, map);
  const std::vector<double> params = m.flat_params();
  return kernel.loss_and_grad(params, grad, false);
}

std::vector<double> evaluate_model(const ModelSpec& m, std::span<const double> points,
                                   const ActiveMap& map, bool parallel) {
  const int d = m.dim();
  const size_t n_points = map.num_points();
  std::vector<double> out(n_points);
#pragma omp parallel for schedule(static) if (parallel)
  for (long p = 0; p < static_cast<long>(n_points); ++p) {
    const auto x = points.subspan(static_cast<size_t>(p) * static_cast<size_t>(d),
                                  static_cast<size_t>(d));
    out[static_cast<size_t>(p)] = constrained_solution(m, x, map.at(static_cast<size_t>(p)));
  }
  return out;
}

std::vector<double> evaluate_model(const ModelSpec& m, std::span<const double> points,
                                   size_t n_points, bool parallel) {
  const ActiveMap map = build_active_map(m.dec, points, n_points);
  return evaluate_model(m, points, map, parallel);
}

namespace {

// all-pairs map: the brute-force alternative to the active-subdomain
// optimization, used to verify it changes nothing
ActiveMap full_map(const Decomposition& dec, size_t n_points) {
  const std::vector<ActivePair> pairs = all_pairs(dec);
  ActiveMap map;
  map.offsets.reserve(n_points + 1);
  map.offsets.push_back(0);
  map.pairs.reserve(pairs.size() * n_points);
  for (size_t p = 0; p < n_points; ++p) {
    map.pairs.insert(map.pairs.end(), pairs.begin(), pairs.end());
    map.offsets.push_back(static_cast<uint32_t>(map.pairs.size()));
  }
  return map;
}

}  // namespace

TrainResult train(const ModelSpec& model, const ProblemSpec& problem, const TrainConfig& cfg) {
  if (cfg.steps < 1) throw std::invalid_argument("train: steps must be >= 1");
  if (cfg.log_every < 1) throw std::invalid_argument("train: log_every must be >= 1");
  if (cfg.collocation_counts.empty() || cfg.test_counts.empty()) {
    throw std::invalid_argument("train: collocation and test counts required");
  }

  const int d = model.dim();
  const std::vector<double> points = collocation_grid(problem.domain, cfg.collocation_counts);
  const size_t n_points = points.size() / static_cast<size_t>(d);
  const ActiveMap map = cfg.use_active_map ? build_active_map(model.dec, points, n_points)
                                           : full_map(model.dec, n_points);

  // test set and reference values
  std::vector<double> test_points;
  std::vector<double> truth;
  if (problem.has_exact()) {
    test_points = collocation_grid(problem.domain, cfg.test_counts);
    const size_t m = test_points.size() / static_cast<size_t>(d);
    truth.resize(m);
    for (size_t i = 0; i < m; ++i) {
      truth[i] = *exact(problem, std::span<const double>(test_points)
                                     .subspan(i * static_cast<size_t>(d), static_cast<size_t>(d)));
    }
  } else {
    if (cfg.test_counts.size() != 2 || cfg.test_counts[0] != cfg.test_counts[1]) {
      throw std::invalid_argument("train: helmholtz test grid must be square");
    }
    const GridField ref = solve_helmholtz_fd(problem, cfg.test_counts[0]);
    sample_grid_nodes(ref, test_points, truth);
  }
  const size_t n_test = truth.size();

  TrainResult result;
  result.model = model;
  std::vector<double> params = model.flat_params();
  std::vector<double> grad(params.size());
  AdamState adam(params.size());

  ResidualKernel kernel(result.model, problem, points, map);
  const ActiveMap test_map = build_active_map(model.dec, test_points, n_test);

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  auto log_row = [&](int step) {
    result.model.set_flat_params(params);
    const double l = kernel.loss(params, cfg.parallel);
    const std::vector<double> pred =
        evaluate_model(result.model, test_points, test_map, cfg.parallel);
    result.history.rows.push_back({step, elapsed(), l, normalized_l1(pred, truth)});
  };

  try {
    log_row(0);
    for (int step = 1; step <= cfg.steps; ++step) {
      kernel.loss_and_grad(params, grad, cfg.parallel);
      adam_step(adam, params, grad, cfg.learning_rate);
      if (step % cfg.log_every == 0 || step == cfg.steps) log_row(step);
    }
  } catch (const NonFiniteLossError& e) {
    result.model.set_flat_params(params);
    result.diverged = true;
    result.message = e.what();
    return result;
  }

  result.model.set_flat_params(params);
  return result;
}

}  // namespace fbpinn
