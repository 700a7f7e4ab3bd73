// Compares the serial reference loss/gradient kernel against the OpenMP
// kernel on the 2D Laplace baseline, checks they agree bit for bit, and
// reports throughput.

#include <omp.h>

#include <chrono>
#include <cstring>
#include <iostream>
#include <vector>

#include "fbpinn/harness.hpp"
#include "fbpinn/training.hpp"

using namespace fbpinn;

namespace {

double time_evals(const ResidualKernel& kernel, std::span<const double> params,
                  std::span<double> grad, bool parallel, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) kernel.loss_and_grad(params, grad, parallel);
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  int colloc = 80;
  int reps = 5;
  if (argc > 1) colloc = std::atoi(argv[1]);
  if (argc > 2) reps = std::atoi(argv[2]);

  const ProblemSpec problem = make_laplace2d();
  const Decomposition dec = build_levels(problem.domain, 3, 1.9);
  const ModelSpec model =
      make_model(ModelKind::MultilevelFbpinn, dec, std::vector<int>{16}, problem.constraint, 0);

  std::vector<int> counts = {colloc, colloc};
  const std::vector<double> points = collocation_grid(problem.domain, counts);
  const size_t n = points.size() / 2;
  const ActiveMap map = build_active_map(model.dec, points, n);
  const ResidualKernel kernel(model, problem, points, map);

  const std::vector<double> params = model.flat_params();
  std::vector<double> grad_serial(params.size()), grad_parallel(params.size());

  std::cout << "collocation " << colloc << "x" << colloc << " (" << n << " points), "
            << params.size() << " parameters, " << omp_get_max_threads() << " threads\n";

  // warm-up + correctness
  const double loss_s = kernel.loss_and_grad(params, grad_serial, false);
  const double loss_p = kernel.loss_and_grad(params, grad_parallel, true);
  const bool same_loss = std::memcmp(&loss_s, &loss_p, sizeof(double)) == 0;
  const bool same_grad =
      std::memcmp(grad_serial.data(), grad_parallel.data(), params.size() * sizeof(double)) == 0;
  std::cout << "serial == parallel: loss " << (same_loss ? "yes" : "NO") << ", gradient "
            << (same_grad ? "yes" : "NO") << "\n";
  if (!same_loss || !same_grad) return 1;

  const double t_serial = time_evals(kernel, params, grad_serial, false, reps);
  const double t_parallel = time_evals(kernel, params, grad_parallel, true, reps);
  std::cout << "serial:   " << t_serial * 1e3 << " ms/eval\n";
  std::cout << "parallel: " << t_parallel * 1e3 << " ms/eval  (speedup " << t_serial / t_parallel
            << "x)\n";
  return 0;
}
