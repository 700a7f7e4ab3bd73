#pragma once

// Experiment harness: runs named presets or config files describing a
// problem plus a list of model variants, trains every variant on shared
// point sets, and emits convergence CSVs, checkpoints, solution grids and a
// ranked summary table.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fbpinn/ansatz.hpp"
#include "fbpinn/problems.hpp"
#include "fbpinn/training.hpp"

namespace fbpinn {

struct VariantSpec {
  std::string name;
  ModelKind kind = ModelKind::MultilevelFbpinn;
  std::vector<int> levels;       // per-dim subdomain counts per level (not for pinn)
  double delta = 1.9;
  std::vector<int> hidden = {16};

  // optional per-variant overrides (scaling studies vary these)
  std::vector<int> collocation;  // empty = experiment default
  int steps = 0;                 // 0 = experiment default
  int n_freq = 0;                // multiscale component count override
  double k = 0.0;                // helmholtz wave number override
  double sigma_g = 0.0;          // helmholtz source width override
};

struct ExperimentSpec {
  std::string name = "experiment";
  ProblemId problem = ProblemId::Laplace2d;
  int n_freq = 1;                 // multiscale
  std::vector<double> omegas;     // multiscale; empty = 2^i rule over n_freq
  double k = 0.0;                 // helmholtz
  double sigma_g = 0.0;
  HelmholtzSign sign = HelmholtzSign::Minus;
  TrainConfig base;
  std::vector<VariantSpec> variants;
  std::string out_dir = "out";
};

struct SummaryRow {
  std::string variant;
  std::string status;  // ok | diverged | incomplete
  double final_train_loss = 0.0;
  double final_test_l1 = 0.0;
  double wall_s = 0.0;
  size_t param_count = 0;
};

// if scale_down, keys prefixed "small." override their base counterparts
ExperimentSpec parse_config(std::istream& is, bool scale_down);

// literal path, then <preset dir>/<name>.cfg, then ./presets/<name>.cfg
ExperimentSpec load_experiment(const std::string& name_or_path, bool scale_down);

// problem spec for one variant (applies the variant's problem overrides)
ProblemSpec make_problem(const ExperimentSpec& e, const VariantSpec& v);

// model for one variant of an experiment
ModelSpec make_variant_model(const ExperimentSpec& e, const VariantSpec& v,
                             const ProblemSpec& problem);

// Trains every variant; writes per-variant convergence.csv, model.ckpt,
// solution.grid, decomposition.csv and meta.txt plus a ranked summary.csv.
// Returns the summary; a diverged variant is flagged and the run continues.
std::vector<SummaryRow> run_experiment(const ExperimentSpec& e, std::ostream& log);

// Rebuilds the ranked summary table from the files in an output directory.
// Missing or unreadable variant outputs become "incomplete" rows.
std::vector<SummaryRow> summarize(const std::string& out_dir);

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);
void print_summary(std::ostream& os, const std::vector<SummaryRow>& rows);

// quick invariant suite behind the `check` CLI subcommand; returns the
// number of failed checks
int run_invariant_checks(std::ostream& os);

}  // namespace fbpinn
