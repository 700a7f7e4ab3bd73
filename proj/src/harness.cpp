#include "fbpinn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "fbpinn/fdsolver.hpp"
#include "fbpinn/network.hpp"
#include "fbpinn/textio.hpp"

#ifndef FBPINN_PRESET_DIR
#define FBPINN_PRESET_DIR "presets"
#endif

namespace fs = std::filesystem;

namespace fbpinn {

namespace {

std::vector<int> parse_int_list(std::string_view s) {
  std::vector<int> out;
  std::string cur;
  std::istringstream iss{std::string(s)};
  while (std::getline(iss, cur, ',')) out.push_back(static_cast<int>(parse_long(trim(cur))));
  if (out.empty()) throw std::runtime_error("empty integer list");
  return out;
}

std::vector<double> parse_double_list(std::string_view s) {
  std::vector<double> out;
  std::string cur;
  std::istringstream iss{std::string(s)};
  while (std::getline(iss, cur, ',')) out.push_back(parse_double(trim(cur)));
  if (out.empty()) throw std::runtime_error("empty number list");
  return out;
}

VariantSpec parse_variant(std::string_view desc) {
  VariantSpec v;
  std::istringstream iss{std::string(desc)};
  std::string tok;
  bool have_name = false;
  while (iss >> tok) {
    const size_t eq = tok.find('=');
    if (eq == std::string::npos) throw std::runtime_error("variant token needs key=value: " + tok);
    const std::string key = tok.substr(0, eq);
    const std::string val = tok.substr(eq + 1);
    if (key == "name") {
      v.name = val;
      have_name = true;
    } else if (key == "kind") {
      v.kind = model_kind_from_string(val);
    } else if (key == "levels") {
      v.levels = parse_int_list(val);
    } else if (key == "delta") {
      v.delta = parse_double(val);
    } else if (key == "hidden") {
      v.hidden = parse_int_list(val);
    } else if (key == "colloc") {
      v.collocation = parse_int_list(val);
    } else if (key == "steps") {
      v.steps = static_cast<int>(parse_long(val));
    } else if (key == "n") {
      v.n_freq = static_cast<int>(parse_long(val));
    } else if (key == "k") {
      v.k = parse_double(val);
    } else if (key == "sigma_g") {
      v.sigma_g = parse_double(val);
    } else {
      throw std::runtime_error("unknown variant key: " + key);
    }
  }
  if (!have_name) throw std::runtime_error("variant needs a name: " + std::string(desc));
  return v;
}

std::string sanitize_name(const std::string& name) {
  std::string out;
  for (char c : name) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')
               ? c
               : '_';
  }
  return out;
}

}  // namespace

ExperimentSpec parse_config(std::istream& is, bool scale_down) {
  std::map<std::string, std::string> kv;
  std::vector<std::string> variants, small_variants;

  std::string line;
  size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    const size_t eq = sv.find('=');
    if (eq == std::string_view::npos) {
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key{trim(sv.substr(0, eq))};
    const std::string val{trim(sv.substr(eq + 1))};
    if (key == "variant") {
      variants.push_back(val);
    } else if (key == "small.variant") {
      small_variants.push_back(val);
    } else {
      kv[key] = val;
    }
  }

  if (scale_down) {
    // apply small.* overrides, including replacing the variant list
    for (auto& [key, val] : std::map<std::string, std::string>(kv)) {
      if (key.rfind("small.", 0) == 0) kv[key.substr(6)] = val;
    }
    if (!small_variants.empty()) variants = small_variants;
  }

  ExperimentSpec e;
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };

  if (auto v = get("name")) e.name = *v;
  if (auto v = get("problem")) e.problem = problem_id_from_string(*v);
  if (auto v = get("n")) e.n_freq = static_cast<int>(parse_long(*v));
  if (auto v = get("omega")) e.omegas = parse_double_list(*v);
  if (auto v = get("k")) e.k = parse_double(*v);
  if (auto v = get("sigma_g")) e.sigma_g = parse_double(*v);
  if (auto v = get("helmholtz_sign")) {
    if (*v == "minus") {
      e.sign = HelmholtzSign::Minus;
    } else if (*v == "plus") {
      e.sign = HelmholtzSign::Plus;
    } else {
      throw std::runtime_error("helmholtz_sign must be minus or plus");
    }
  }
  if (auto v = get("steps")) e.base.steps = static_cast<int>(parse_long(*v));
  if (auto v = get("lr")) e.base.learning_rate = parse_double(*v);
  if (auto v = get("collocation")) e.base.collocation_counts = parse_int_list(*v);
  if (auto v = get("test")) e.base.test_counts = parse_int_list(*v);
  if (auto v = get("seed")) e.base.seed = static_cast<uint64_t>(parse_long(*v));
  if (auto v = get("log_every")) e.base.log_every = static_cast<int>(parse_long(*v));
  if (auto v = get("out")) e.out_dir = *v;

  for (const std::string& d : variants) e.variants.push_back(parse_variant(d));
  if (e.variants.empty()) throw std::runtime_error("config defines no variants");
  return e;
}

ExperimentSpec load_experiment(const std::string& name_or_path, bool scale_down) {
  std::vector<fs::path> candidates = {
      fs::path(name_or_path),
      fs::path(FBPINN_PRESET_DIR) / (name_or_path + ".cfg"),
      fs::path("presets") / (name_or_path + ".cfg"),
  };
  for (const fs::path& p : candidates) {
    std::ifstream f(p);
    if (f) {
      ExperimentSpec e = parse_config(f, scale_down);
      if (e.name == "experiment") e.name = p.stem().string();
      return e;
    }
  }
  throw std::runtime_error("no preset or config file named '" + name_or_path + "'");
}

ProblemSpec make_problem(const ExperimentSpec& e, const VariantSpec& v) {
  switch (e.problem) {
    case ProblemId::Laplace1d:
      return make_laplace1d();
    case ProblemId::Laplace2d:
      return make_laplace2d();
    case ProblemId::Multiscale2d: {
      if (v.n_freq > 0) return make_multiscale2d(v.n_freq);
      if (!e.omegas.empty()) return make_multiscale2d(e.omegas);
      return make_multiscale2d(e.n_freq);
    }
    case ProblemId::Helmholtz2d: {
      const double k = v.k > 0.0 ? v.k : e.k;
      const double sg = v.sigma_g > 0.0 ? v.sigma_g : e.sigma_g;
      return make_helmholtz2d(k, sg, e.sign);
    }
  }
  throw std::logic_error("unreachable");
}

ModelSpec make_variant_model(const ExperimentSpec& e, const VariantSpec& v,
                             const ProblemSpec& problem) {
  if (v.kind == ModelKind::Pinn) {
    return make_pinn(problem.domain, v.hidden, problem.constraint, e.base.seed);
  }
  if (v.levels.empty()) throw std::runtime_error("variant '" + v.name + "' needs levels=");
  Decomposition dec = build_levels(problem.domain, v.levels, v.delta);
  return make_model(v.kind, std::move(dec), v.hidden, problem.constraint, e.base.seed);
}

namespace {

void write_solution_grid(std::ostream& os, const ProblemSpec& p, std::span<const int> counts,
                         std::span<const double> values) {
  os << "n,h,sign_convention,k,sigma\n";
  const int n = counts[0];
  const double h = p.domain.extent(0) / static_cast<double>(n - 1);
  os << n << "," << format_double(h) << ","
     << (p.sign == HelmholtzSign::Minus ? "minus" : "plus") << "," << format_double(p.k) << ","
     << format_double(p.sigma_g) << "\n";
  const size_t cols = counts.size() == 2 ? static_cast<size_t>(counts[1]) : values.size();
  for (size_t i = 0; i < values.size(); ++i) {
    if (i && i % cols == 0) os << "\n";
    if (i % cols) os << " ";
    os << format_double(values[i]);
  }
  os << "\n";
}

void write_meta(std::ostream& os, const std::string& name, const std::string& status,
                size_t param_count, double wall_s, double final_loss, double final_l1,
                int steps) {
  os << "name " << name << "\n";
  os << "status " << status << "\n";
  os << "param_count " << param_count << "\n";
  os << "wall_s " << format_double(wall_s) << "\n";
  os << "final_train_loss " << format_double(final_loss) << "\n";
  os << "final_test_l1 " << format_double(final_l1) << "\n";
  os << "steps " << steps << "\n";
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

void rank_rows(std::vector<SummaryRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
    const bool a_ok = a.status == "ok";
    const bool b_ok = b.status == "ok";
    if (a_ok != b_ok) return a_ok;
    if (!a_ok) return false;
    return a.final_test_l1 < b.final_test_l1;
  });
}

}  // namespace

std::vector<SummaryRow> run_experiment(const ExperimentSpec& e, std::ostream& log) {
  if (e.base.collocation_counts.empty() || e.base.test_counts.empty()) {
    throw std::runtime_error("experiment needs collocation and test counts");
  }
  if (e.base.steps < 1) throw std::runtime_error("experiment needs steps >= 1");

  const fs::path out_dir(e.out_dir);
  fs::create_directories(out_dir);

  std::vector<SummaryRow> rows;
  for (const VariantSpec& v : e.variants) {
    const ProblemSpec problem = make_problem(e, v);
    TrainConfig cfg = e.base;
    if (!v.collocation.empty()) cfg.collocation_counts = v.collocation;
    if (v.steps > 0) cfg.steps = v.steps;

    log << "[" << e.name << "] variant " << v.name << ": training " << cfg.steps << " steps, "
        << "collocation";
    for (int c : cfg.collocation_counts) log << " " << c;
    log << "\n" << std::flush;

    const ModelSpec model = make_variant_model(e, v, problem);
    TrainResult result = train(model, problem, cfg);

    const fs::path vdir = out_dir / sanitize_name(v.name);
    fs::create_directories(vdir);
    {
      auto f = open_out(vdir / "convergence.csv");
      write_history_csv(f, result.history);
    }
    {
      auto f = open_out(vdir / "model.ckpt");
      save_checkpoint(f, result.model);
    }
    {
      auto f = open_out(vdir / "decomposition.csv");
      write_decomposition_csv(f, result.model.dec);
    }
    {
      const std::vector<double> test_points =
          collocation_grid(problem.domain, e.base.test_counts);
      const size_t n_test = test_points.size() / static_cast<size_t>(problem.dim());
      const std::vector<double> pred =
          evaluate_model(result.model, test_points, n_test, e.base.parallel);
      auto f = open_out(vdir / "solution.grid");
      write_solution_grid(f, problem, e.base.test_counts, pred);
    }

    SummaryRow row;
    row.variant = v.name;
    row.status = result.diverged ? "diverged" : "ok";
    row.param_count = result.model.total_params;
    if (!result.history.rows.empty()) {
      const TrainHistoryRow& last = result.history.rows.back();
      row.final_train_loss = last.train_loss;
      row.final_test_l1 = last.test_l1;
      row.wall_s = last.time_s;
    }
    {
      auto f = open_out(vdir / "meta.txt");
      write_meta(f, v.name, row.status, row.param_count, row.wall_s, row.final_train_loss,
                 row.final_test_l1, cfg.steps);
    }
    if (result.diverged) {
      log << "[" << e.name << "] variant " << v.name << " diverged: " << result.message << "\n";
    } else {
      log << "[" << e.name << "] variant " << v.name
          << " done: test L1 = " << format_double(row.final_test_l1)
          << ", wall = " << format_double(row.wall_s) << " s\n";
    }
    rows.push_back(row);
  }

  rank_rows(rows);
  {
    auto f = open_out(out_dir / "summary.csv");
    write_summary_csv(f, rows);
  }
  print_summary(log, rows);
  return rows;
}

std::vector<SummaryRow> summarize(const std::string& out_dir) {
  std::vector<SummaryRow> rows;
  if (!fs::is_directory(out_dir)) return rows;

  std::vector<fs::path> subdirs;
  for (const auto& entry : fs::directory_iterator(out_dir)) {
    if (entry.is_directory()) subdirs.push_back(entry.path());
  }
  std::sort(subdirs.begin(), subdirs.end());

  for (const fs::path& dir : subdirs) {
    SummaryRow row;
    row.variant = dir.filename().string();
    row.status = "incomplete";

    std::ifstream meta(dir / "meta.txt");
    std::ifstream conv(dir / "convergence.csv");
    if (meta && conv) {
      std::string key, val, line;
      std::string status;
      while (std::getline(meta, line)) {
        std::istringstream iss(line);
        if (!(iss >> key)) continue;
        std::getline(iss, val);
        const std::string value{trim(val)};
        if (key == "name") row.variant = value;
        else if (key == "status") status = value;
        else if (key == "param_count") row.param_count = static_cast<size_t>(parse_long(value));
        else if (key == "wall_s") row.wall_s = parse_double(value);
        else if (key == "final_train_loss") row.final_train_loss = parse_double(value);
        else if (key == "final_test_l1") row.final_test_l1 = parse_double(value);
      }
      std::string last;
      std::getline(conv, line);  // header
      bool any = false;
      while (std::getline(conv, line)) {
        if (!trim(line).empty()) {
          last = line;
          any = true;
        }
      }
      if (any && (status == "ok" || status == "diverged")) row.status = status;
    }
    rows.push_back(row);
  }
  rank_rows(rows);
  return rows;
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "variant,status,final_train_loss,final_test_l1,wall_s,param_count\n";
  for (const SummaryRow& r : rows) {
    os << r.variant << "," << r.status << "," << format_double(r.final_train_loss) << ","
       << format_double(r.final_test_l1) << "," << format_double(r.wall_s) << ","
       << r.param_count << "\n";
  }
}

void print_summary(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "variant                          status     train_loss     test_l1        wall_s   params\n";
  for (const SummaryRow& r : rows) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-32s %-10s %-14.6g %-14.6g %-8.1f %zu", r.variant.c_str(),
                  r.status.c_str(), r.final_train_loss, r.final_test_l1, r.wall_s, r.param_count);
    os << buf << "\n";
  }
}

// --- invariant checks --------------------------------------------------------

namespace {

struct Check {
  std::ostream& os;
  int failures = 0;

  void report(const std::string& name, bool ok, const std::string& detail = "") {
    os << (ok ? "[PASS] " : "[FAIL] ") << name;
    if (!detail.empty()) os << " (" << detail << ")";
    os << "\n";
    if (!ok) ++failures;
  }
};

}  // namespace

int run_invariant_checks(std::ostream& os) {
  Check check{os};

  // partition of unity across decompositions
  {
    double worst = 0.0;
    for (int d = 1; d <= 2; ++d) {
      for (int L = 1; L <= 3; ++L) {
        for (double delta : {1.1, 1.9, 2.7}) {
          const Decomposition dec = build_levels(unit_box(d), L, delta);
          Rng rng(17);
          std::vector<double> x(static_cast<size_t>(d));
          for (int trial = 0; trial < 2000; ++trial) {
            for (double& xi : x) xi = rng.next_unit();
            for (int l = 0; l < dec.num_levels(); ++l) {
              double sum = 0.0;
              for (size_t j = 0; j < dec.num_subdomains(l); ++j) {
                sum += pou_window(dec, l, j, x);
              }
              worst = std::max(worst, std::abs(sum - 1.0));
            }
          }
        }
      }
    }
    check.report("partition of unity", worst < 1e-9, "max |sum-1| = " + format_double(worst));
  }

  // input derivatives against central finite differences
  {
    const std::vector<int> sizes = {2, 8, 1};
    const NetworkParams net = init_fcn(sizes, 3);
    const double h = 1e-4;
    double worst = 0.0;
    Rng rng(5);
    for (int trial = 0; trial < 5; ++trial) {
      double x[2] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const DualValue dv = eval_with_input_derivatives(net, {x, 2});
      for (int i = 0; i < 2; ++i) {
        double xp[2] = {x[0], x[1]}, xm[2] = {x[0], x[1]};
        xp[i] += h;
        xm[i] -= h;
        const double fp = fcn_forward(net, {xp, 2});
        const double fm = fcn_forward(net, {xm, 2});
        const double f0 = fcn_forward(net, {x, 2});
        const double fd1 = (fp - fm) / (2 * h);
        const double fd2 = (fp - 2 * f0 + fm) / (h * h);
        const double scale = std::max({std::abs(fd1), std::abs(fd2), 1e-3});
        worst = std::max(worst, std::abs(dv.input_partials[static_cast<size_t>(i)] - fd1) / scale);
        worst = std::max(
            worst, std::abs(dv.input_second_partials[static_cast<size_t>(i)] - fd2) / scale);
      }
    }
    check.report("input derivatives vs finite differences", worst < 1e-6,
                 "max rel err = " + format_double(worst));
  }

  // manufactured residual of the closed-form laplace2d solution
  {
    const ProblemSpec p = make_laplace2d();
    Rng rng(11);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      double x[2] = {rng.next_unit(), rng.next_unit()};
      const Jet u = exact_jet(p, {x, 2});
      worst = std::max(worst, std::abs(residual(p, u, {x, 2})));
    }
    check.report("manufactured laplace2d residual", worst < 1e-9,
                 "max |r| = " + format_double(worst));
  }

  // active-subdomain optimization changes nothing
  {
    const ProblemSpec p = make_laplace1d();
    const Decomposition dec = build_levels(p.domain, 2, 1.9);
    const ModelSpec m =
        make_model(ModelKind::MultilevelFbpinn, dec, std::vector<int>{4}, p.constraint, 7);
    std::vector<int> counts = {16};
    const std::vector<double> pts = collocation_grid(p.domain, counts);
    const ActiveMap map = build_active_map(m.dec, pts, 16);
    ActiveMap full;
    full.offsets.push_back(0);
    const auto pairs = all_pairs(m.dec);
    for (size_t q = 0; q < 16; ++q) {
      full.pairs.insert(full.pairs.end(), pairs.begin(), pairs.end());
      full.offsets.push_back(static_cast<uint32_t>(full.pairs.size()));
    }
    const double a = loss(m, p, pts, map);
    const double b = loss(m, p, pts, full);
    check.report("active-map equivalence", a == b,
                 format_double(a) + " vs " + format_double(b));
  }

  // homogeneous FD problem has the zero solution
  {
    const ProblemSpec p = make_helmholtz2d(5.0, 0.1);
    std::vector<double> zero_rhs(21 * 21, 0.0);
    const GridField g = solve_helmholtz_fd_rhs(p, 21, zero_rhs);
    double worst = 0.0;
    for (double v : g.values) worst = std::max(worst, std::abs(v));
    check.report("fd zero source", worst == 0.0, "max |u| = " + format_double(worst));
  }

  os << (check.failures == 0 ? "all checks passed\n" : "some checks FAILED\n");
  return check.failures;
}

}  // namespace fbpinn
