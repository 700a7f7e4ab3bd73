#include "fbpinn/ansatz.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fbpinn/textio.hpp"

namespace fbpinn {

double ConstraintOp::value(std::span<const double> x) const {
  double acc = 1.0;
  bool first = true;
  for (const ConstraintFactor& f : factors) {
    const double t = (x[static_cast<size_t>(f.dim)] - f.loc) / f.sharpness;
    const double v = std::tanh(f.sign * t);
    acc = first ? v : acc * v;
    first = false;
  }
  return acc;
}

Jet ConstraintOp::jet(int dim, std::span<const double> x) const {
  Jet acc = Jet::constant(dim, 1.0);
  bool first = true;
  for (const ConstraintFactor& f : factors) {
    Jet t = Jet::constant(dim, (x[static_cast<size_t>(f.dim)] - f.loc) / f.sharpness);
    t.c[static_cast<size_t>(1 + f.dim)] = 1.0 / f.sharpness;
    Jet a(dim);
    jk_scale_shift(a.data(), t.data(), f.sign, 0.0, dim);
    Jet v(dim);
    jk_tanh(v.data(), a.data(), dim);
    if (first) {
      acc = v;
      first = false;
    } else {
      Jet next(dim);
      jk_mul(next.data(), acc.data(), v.data(), dim);
      acc = next;
    }
  }
  return acc;
}

ConstraintOp dirichlet_box_constraint(const Box& box, double sharpness) {
  if (!(sharpness > 0.0)) throw std::invalid_argument("constraint sharpness must be positive");
  ConstraintOp op;
  for (int i = 0; i < box.dim(); ++i) {
    op.factors.push_back({i, box.lo[static_cast<size_t>(i)], 1.0, sharpness});
    op.factors.push_back({i, box.hi[static_cast<size_t>(i)], -1.0, sharpness});
  }
  return op;
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::MultilevelFbpinn: return "multilevel";
    case ModelKind::OneLevelFbpinn: return "one-level";
    case ModelKind::Pinn: return "pinn";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "multilevel") return ModelKind::MultilevelFbpinn;
  if (s == "one-level") return ModelKind::OneLevelFbpinn;
  if (s == "pinn") return ModelKind::Pinn;
  throw std::invalid_argument("unknown model kind: " + s);
}

size_t ModelSpec::net_index(uint32_t level, uint32_t j) const {
  size_t base = 0;
  for (uint32_t l = 0; l < level; ++l) base += dec.num_subdomains(static_cast<int>(l));
  return base + j;
}

std::vector<double> ModelSpec::flat_params() const {
  std::vector<double> out(total_params);
  for (size_t k = 0; k < nets.size(); ++k) {
    copy_params_flat(nets[k], std::span<double>(out).subspan(net_offsets[k]));
  }
  return out;
}

void ModelSpec::set_flat_params(std::span<const double> p) {
  if (p.size() != total_params) throw std::invalid_argument("flat parameter size mismatch");
  for (size_t k = 0; k < nets.size(); ++k) {
    load_params_flat(nets[k], p.subspan(net_offsets[k]));
  }
}

ModelSpec make_model(ModelKind kind, Decomposition dec, std::span<const int> hidden_sizes,
                     ConstraintOp constraint, uint64_t seed) {
  if (hidden_sizes.empty()) throw std::invalid_argument("need at least one hidden layer");
  for (const ConstraintFactor& f : constraint.factors) {
    if (f.dim < 0 || f.dim >= dec.dim) {
      throw std::invalid_argument("constraint factor dimension out of range");
    }
  }

  ModelSpec m;
  m.kind = kind;
  m.dec = std::move(dec);
  std::vector<int> sizes;
  sizes.push_back(m.dec.dim);
  sizes.insert(sizes.end(), hidden_sizes.begin(), hidden_sizes.end());
  sizes.push_back(1);

  const size_t total = m.dec.total_subdomains();
  m.nets.reserve(total);
  m.net_offsets.reserve(total);
  size_t offset = 0;
  for (size_t k = 0; k < total; ++k) {
    NetworkParams net = init_fcn(sizes, derive_seed(seed, k));
    m.net_offsets.push_back(offset);
    offset += net.param_count();
    m.nets.push_back(std::move(net));
  }
  m.total_params = offset;
  m.constraint = std::move(constraint);
  return m;
}

ModelSpec make_pinn(const Box& domain, std::span<const int> hidden_sizes, ConstraintOp constraint,
                    uint64_t seed) {
  return make_model(ModelKind::Pinn, global_decomposition(domain), hidden_sizes,
                    std::move(constraint), seed);
}

namespace {

// level sums of raw windows over the active pairs (zeros elsewhere make this
// equal to the full level sums)
void level_inverse_sums(const ModelSpec& m, std::span<const double> x,
                        std::span<const ActivePair> active, std::span<double> inv_sums) {
  for (int l = 0; l < m.num_levels(); ++l) inv_sums[static_cast<size_t>(l)] = 0.0;
  std::vector<double> sums(static_cast<size_t>(m.num_levels()), 0.0);
  for (const ActivePair& p : active) {
    sums[p.level] += raw_window(m.dec.subdomain(static_cast<int>(p.level), p.j), x);
  }
  for (int l = 0; l < m.num_levels(); ++l) {
    const double s = sums[static_cast<size_t>(l)];
    if (!(s > 0.0)) {
      throw std::runtime_error("raw_solution: window sum vanished at level " +
                               std::to_string(l + 1));
    }
    inv_sums[static_cast<size_t>(l)] = 1.0 / s;
  }
}

}  // namespace

double raw_solution(const ModelSpec& m, std::span<const double> x,
                    std::span<const ActivePair> active) {
  if (active.empty()) throw std::invalid_argument("raw_solution: empty active set");
  const int d = m.dim();
  std::vector<double> inv_sums(static_cast<size_t>(m.num_levels()));
  level_inverse_sums(m, x, active, inv_sums);

  std::vector<double> xn(static_cast<size_t>(d));
  double acc = 0.0;
  bool first = true;
  for (const ActivePair& p : active) {
    const Subdomain& s = m.dec.subdomain(static_cast<int>(p.level), p.j);
    const double w = raw_window(s, x) * inv_sums[p.level];
    normalize_input(s, x, xn);
    const double v = fcn_forward(m.net(p.level, p.j), xn);
    const double term = w * v;
    acc = first ? term : acc + term;
    first = false;
  }
  return acc * (1.0 / static_cast<double>(m.num_levels()));
}

Jet raw_solution_jet(const ModelSpec& m, std::span<const double> x,
                     std::span<const ActivePair> active) {
  if (active.empty()) throw std::invalid_argument("raw_solution: empty active set");
  const int d = m.dim();

  // group active pairs per level to compute normalized window jets
  std::vector<Jet> windows(active.size());
  {
    std::vector<uint32_t> level_js;
    std::vector<Jet> level_w;
    size_t k = 0;
    while (k < active.size()) {
      const uint32_t level = active[k].level;
      size_t end = k;
      level_js.clear();
      while (end < active.size() && active[end].level == level) {
        level_js.push_back(active[end].j);
        ++end;
      }
      level_w.assign(level_js.size(), Jet(d));
      pou_window_jets(m.dec, static_cast<int>(level), level_js, x, level_w);
      for (size_t i = 0; i < level_js.size(); ++i) windows[k + i] = level_w[i];
      k = end;
    }
  }

  std::vector<Jet> xn(static_cast<size_t>(d));
  Jet acc(d);
  bool first = true;
  for (size_t k = 0; k < active.size(); ++k) {
    const ActivePair& p = active[k];
    const Subdomain& s = m.dec.subdomain(static_cast<int>(p.level), p.j);
    for (int i = 0; i < d; ++i) {
      xn[static_cast<size_t>(i)] = local_coord_jet(s, i, x[static_cast<size_t>(i)]);
    }
    const Jet v = fcn_forward_jet(m.net(p.level, p.j), xn);
    Jet term(d);
    jk_mul(term.data(), windows[k].data(), v.data(), d);
    if (first) {
      acc = term;
      first = false;
    } else {
      Jet next(d);
      jk_add(next.data(), acc.data(), term.data(), d);
      acc = next;
    }
  }
  Jet out(d);
  jk_scale_shift(out.data(), acc.data(), 1.0 / static_cast<double>(m.num_levels()), 0.0, d);
  return out;
}

double constrained_solution(const ModelSpec& m, std::span<const double> x,
                            std::span<const ActivePair> active) {
  return m.constraint.value(x) * raw_solution(m, x, active);
}

Jet constrained_solution_jet(const ModelSpec& m, std::span<const double> x,
                             std::span<const ActivePair> active) {
  const Jet c = m.constraint.jet(m.dim(), x);
  const Jet u = raw_solution_jet(m, x, active);
  Jet out(m.dim());
  jk_mul(out.data(), c.data(), u.data(), m.dim());
  return out;
}

uint32_t emit_constrained_solution(TapeProgram& prog, const ModelSpec& m,
                                   std::span<const double> x, std::span<const ActivePair> active,
                                   std::span<const Jet> window_jets, const Jet& constraint_jet) {
  if (active.empty()) throw std::invalid_argument("emit: empty active set");
  if (window_jets.size() != active.size()) {
    throw std::invalid_argument("emit: window jets do not match active pairs");
  }
  const int d = m.dim();
  std::vector<uint32_t> inputs(static_cast<size_t>(d));
  uint32_t acc = 0;
  bool first = true;
  for (size_t k = 0; k < active.size(); ++k) {
    const ActivePair& p = active[k];
    const Subdomain& s = m.dec.subdomain(static_cast<int>(p.level), p.j);
    const size_t ni = m.net_index(p.level, p.j);
    for (int i = 0; i < d; ++i) {
      inputs[static_cast<size_t>(i)] = prog.const_jet(local_coord_jet(s, i, x[static_cast<size_t>(i)]));
    }
    const uint32_t w_node = prog.const_jet(window_jets[k]);
    const uint32_t v_node =
        emit_fcn(prog, m.nets[ni], inputs, static_cast<uint32_t>(m.net_offsets[ni]));
    const uint32_t term = prog.mul(w_node, v_node);
    acc = first ? term : prog.add(acc, term);
    first = false;
  }
  acc = prog.scale_shift(acc, 1.0 / static_cast<double>(m.num_levels()), 0.0);
  const uint32_t c_node = prog.const_jet(constraint_jet);
  return prog.mul(c_node, acc);
}

std::vector<ActivePair> all_pairs(const Decomposition& dec) {
  std::vector<ActivePair> pairs;
  pairs.reserve(dec.total_subdomains());
  for (int l = 0; l < dec.num_levels(); ++l) {
    for (size_t j = 0; j < dec.num_subdomains(l); ++j) {
      pairs.push_back({static_cast<uint32_t>(l), static_cast<uint32_t>(j)});
    }
  }
  return pairs;
}

std::vector<ActivePair> active_pairs_at(const Decomposition& dec, std::span<const double> x) {
  ActiveMap map = build_active_map(dec, x, 1);
  return {map.pairs.begin(), map.pairs.end()};
}

void save_checkpoint(std::ostream& os, const ModelSpec& m) {
  os << "fbpinn-checkpoint v1\n";
  os << "kind " << to_string(m.kind) << "\n";
  os << "dim " << m.dim() << "\n";
  os << "delta " << format_double(m.dec.delta) << "\n";
  os << "domain";
  for (int i = 0; i < m.dim(); ++i) {
    os << " " << format_double(m.dec.domain.lo[static_cast<size_t>(i)]) << " "
       << format_double(m.dec.domain.hi[static_cast<size_t>(i)]);
  }
  os << "\n";
  os << "levels";
  for (int c : m.dec.per_dim_counts) os << " " << c;
  os << "\n";
  os << "layers";
  for (int s : m.nets.front().sizes) os << " " << s;
  os << "\n";
  os << "constraint " << m.constraint.factors.size() << "\n";
  for (const ConstraintFactor& f : m.constraint.factors) {
    os << f.dim << " " << format_double(f.loc) << " " << format_double(f.sign) << " "
       << format_double(f.sharpness) << "\n";
  }
  const std::vector<double> flat = m.flat_params();
  os << "params " << flat.size() << "\n";
  for (double v : flat) os << format_double(v) << "\n";
}

namespace {

std::string expect_line(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("checkpoint truncated");
  return line;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

}  // namespace

ModelSpec load_checkpoint(std::istream& is) {
  if (expect_line(is) != "fbpinn-checkpoint v1") {
    throw std::runtime_error("not a fbpinn checkpoint");
  }
  auto kind_tok = split_ws(expect_line(is));
  auto dim_tok = split_ws(expect_line(is));
  auto delta_tok = split_ws(expect_line(is));
  auto domain_tok = split_ws(expect_line(is));
  auto levels_tok = split_ws(expect_line(is));
  auto layers_tok = split_ws(expect_line(is));
  if (kind_tok.size() != 2 || kind_tok[0] != "kind" || dim_tok.size() != 2 ||
      dim_tok[0] != "dim" || delta_tok.size() != 2 || delta_tok[0] != "delta" ||
      domain_tok.empty() || domain_tok[0] != "domain" || levels_tok.empty() ||
      levels_tok[0] != "levels" || layers_tok.empty() || layers_tok[0] != "layers") {
    throw std::runtime_error("malformed checkpoint header");
  }

  const ModelKind kind = model_kind_from_string(kind_tok[1]);
  const int dim = static_cast<int>(parse_long(dim_tok[1]));
  const double delta = parse_double(delta_tok[1]);

  Box domain;
  if (domain_tok.size() != 1 + 2 * static_cast<size_t>(dim)) {
    throw std::runtime_error("malformed checkpoint domain");
  }
  for (int i = 0; i < dim; ++i) {
    domain.lo.push_back(parse_double(domain_tok[1 + 2 * static_cast<size_t>(i)]));
    domain.hi.push_back(parse_double(domain_tok[2 + 2 * static_cast<size_t>(i)]));
  }

  std::vector<int> counts;
  for (size_t i = 1; i < levels_tok.size(); ++i) {
    counts.push_back(static_cast<int>(parse_long(levels_tok[i])));
  }
  std::vector<int> sizes;
  for (size_t i = 1; i < layers_tok.size(); ++i) {
    sizes.push_back(static_cast<int>(parse_long(layers_tok[i])));
  }
  if (sizes.size() < 3) throw std::runtime_error("malformed checkpoint layers");
  std::vector<int> hidden(sizes.begin() + 1, sizes.end() - 1);

  auto cons_tok = split_ws(expect_line(is));
  if (cons_tok.size() != 2 || cons_tok[0] != "constraint") {
    throw std::runtime_error("malformed checkpoint constraint");
  }
  ConstraintOp constraint;
  const long n_factors = parse_long(cons_tok[1]);
  for (long f = 0; f < n_factors; ++f) {
    auto t = split_ws(expect_line(is));
    if (t.size() != 4) throw std::runtime_error("malformed constraint factor");
    constraint.factors.push_back({static_cast<int>(parse_long(t[0])), parse_double(t[1]),
                                  parse_double(t[2]), parse_double(t[3])});
  }

  Decomposition dec = kind == ModelKind::Pinn ? global_decomposition(domain)
                                              : build_levels(domain, counts, delta);
  ModelSpec m = make_model(kind, std::move(dec), hidden, std::move(constraint), 0);

  auto params_tok = split_ws(expect_line(is));
  if (params_tok.size() != 2 || params_tok[0] != "params") {
    throw std::runtime_error("malformed checkpoint params");
  }
  const size_t n_params = static_cast<size_t>(parse_long(params_tok[1]));
  if (n_params != m.total_params) throw std::runtime_error("checkpoint parameter count mismatch");
  std::vector<double> flat(n_params);
  for (size_t i = 0; i < n_params; ++i) flat[i] = parse_double(trim(expect_line(is)));
  m.set_flat_params(flat);
  return m;
}

}  // namespace fbpinn
