// Command-line front end: run experiments from presets or config files,
// summarize finished output directories, solve the FD Helmholtz reference,
// and run the quick invariant suite.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "fbpinn/fdsolver.hpp"
#include "fbpinn/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"multilevel FBPINN solver"};
  app.require_subcommand(1);

  // run
  std::string run_target;
  int run_steps = 0;
  long run_seed = -1;
  std::string run_out;
  bool scale_down = false;
  auto* run = app.add_subcommand("run", "train all variants of a preset or config file");
  run->add_option("preset", run_target, "preset name or config path")->required();
  run->add_option("--steps", run_steps, "override training steps");
  run->add_option("--seed", run_seed, "override seed");
  run->add_option("--out", run_out, "override output directory");
  run->add_flag("--scale-down", scale_down, "apply the config's small.* overrides");

  // summarize
  std::string sum_dir;
  auto* sum = app.add_subcommand("summarize", "rank variants from an output directory");
  sum->add_option("dir", sum_dir, "experiment output directory")->required();

  // fd-solve
  double fd_k = 0.0, fd_sigma = 0.0;
  int fd_n = 320;
  std::string fd_out;
  std::string fd_sign = "minus";
  auto* fd = app.add_subcommand("fd-solve", "finite-difference Helmholtz reference solve");
  fd->add_option("--k", fd_k, "wave number")->required();
  fd->add_option("--sigma", fd_sigma, "Gaussian source width")->required();
  fd->add_option("--n", fd_n, "grid nodes per dimension");
  fd->add_option("--out", fd_out, "output grid file")->required();
  fd->add_option("--sign", fd_sign, "k^2 term sign convention: minus|plus");

  // check
  auto* check = app.add_subcommand("check", "run the invariant suite");
  (void)check;

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      fbpinn::ExperimentSpec e = fbpinn::load_experiment(run_target, scale_down);
      if (run_steps > 0) e.base.steps = run_steps;
      if (run_seed >= 0) e.base.seed = static_cast<uint64_t>(run_seed);
      if (!run_out.empty()) e.out_dir = run_out;
      const auto rows = fbpinn::run_experiment(e, std::cout);
      for (const auto& r : rows) {
        if (r.status != "ok") return 1;
      }
      return 0;
    }
    if (sum->parsed()) {
      const auto rows = fbpinn::summarize(sum_dir);
      fbpinn::print_summary(std::cout, rows);
      std::ofstream f(sum_dir + "/summary.csv");
      if (f) fbpinn::write_summary_csv(f, rows);
      return 0;
    }
    if (fd->parsed()) {
      const auto sign =
          fd_sign == "plus" ? fbpinn::HelmholtzSign::Plus : fbpinn::HelmholtzSign::Minus;
      const fbpinn::ProblemSpec p = fbpinn::make_helmholtz2d(fd_k, fd_sigma, sign);
      const fbpinn::GridField g = fbpinn::solve_helmholtz_fd(p, fd_n);
      std::ofstream f(fd_out);
      if (!f) throw std::runtime_error("cannot write " + fd_out);
      fbpinn::write_grid(f, g);
      std::cout << "wrote " << fd_out << " (" << fd_n << "x" << fd_n << ")\n";
      return 0;
    }
    if (check->parsed()) {
      return fbpinn::run_invariant_checks(std::cout) == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
