#include "fbpinn/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fbpinn/textio.hpp"

namespace fbpinn {

bool Box::contains(std::span<const double> x) const {
  for (int i = 0; i < dim(); ++i) {
    if (x[static_cast<size_t>(i)] < lo[static_cast<size_t>(i)] ||
        x[static_cast<size_t>(i)] > hi[static_cast<size_t>(i)]) {
      return false;
    }
  }
  return true;
}

Box unit_box(int dim) {
  Box b;
  b.lo.assign(static_cast<size_t>(dim), 0.0);
  b.hi.assign(static_cast<size_t>(dim), 1.0);
  return b;
}

bool Subdomain::contains(std::span<const double> x) const {
  for (int i = 0; i < dim; ++i) {
    if (std::abs(x[static_cast<size_t>(i)] - center[static_cast<size_t>(i)]) >=
        halfwidth[static_cast<size_t>(i)]) {
      return false;
    }
  }
  return true;
}

size_t Decomposition::total_subdomains() const {
  size_t n = 0;
  for (const auto& lvl : levels) n += lvl.size();
  return n;
}

namespace {

void check_domain(const Box& domain) {
  const int d = domain.dim();
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("domain dimension out of range");
  if (static_cast<int>(domain.hi.size()) != d) throw std::invalid_argument("domain box malformed");
  for (int i = 0; i < d; ++i) {
    if (!(domain.extent(i) > 0.0)) throw std::invalid_argument("domain box has empty extent");
  }
}

std::vector<Subdomain> build_level(const Box& domain, int level_1based, int per_dim,
                                   double delta) {
  const int d = domain.dim();
  std::vector<Subdomain> subs;

  // per-dimension unit-interval centers and half-width
  std::vector<double> unit_centers(static_cast<size_t>(per_dim));
  double unit_halfwidth;
  if (per_dim == 1) {
    unit_centers[0] = 0.5;
    unit_halfwidth = delta / 2.0;
  } else {
    for (int t = 0; t < per_dim; ++t) {
      unit_centers[static_cast<size_t>(t)] =
          static_cast<double>(t) / static_cast<double>(per_dim - 1);
    }
    unit_halfwidth = (delta / 2.0) / static_cast<double>(per_dim - 1);
  }

  size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<size_t>(per_dim);
  subs.reserve(total);

  std::vector<int> idx(static_cast<size_t>(d), 0);
  for (size_t j = 0; j < total; ++j) {
    Subdomain s;
    s.level = level_1based;
    s.index = static_cast<int>(j) + 1;
    s.dim = d;
    s.sole = (total == 1);
    for (int i = 0; i < d; ++i) {
      const double e = domain.extent(i);
      s.center[static_cast<size_t>(i)] =
          domain.lo[static_cast<size_t>(i)] + unit_centers[static_cast<size_t>(idx[static_cast<size_t>(i)])] * e;
      s.halfwidth[static_cast<size_t>(i)] = unit_halfwidth * e;
    }
    subs.push_back(s);
    // advance mixed-radix index, last dimension fastest
    for (int i = d - 1; i >= 0; --i) {
      if (++idx[static_cast<size_t>(i)] < per_dim) break;
      idx[static_cast<size_t>(i)] = 0;
    }
  }
  return subs;
}

// fail fast if some part of the domain is uncovered at a level
void check_coverage(const Decomposition& dec) {
  const int d = dec.dim;
  const int n_per_dim = 33;
  std::vector<int> idx(static_cast<size_t>(d), 0);
  size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<size_t>(n_per_dim);

  std::vector<double> x(static_cast<size_t>(d));
  for (size_t p = 0; p < total; ++p) {
    for (int i = 0; i < d; ++i) {
      x[static_cast<size_t>(i)] =
          dec.domain.lo[static_cast<size_t>(i)] +
          dec.domain.extent(i) * static_cast<double>(idx[static_cast<size_t>(i)]) /
              static_cast<double>(n_per_dim - 1);
    }
    for (int l = 0; l < dec.num_levels(); ++l) {
      bool covered = false;
      for (const Subdomain& s : dec.levels[static_cast<size_t>(l)]) {
        if (s.sole || s.contains(x)) {
          covered = true;
          break;
        }
      }
      if (!covered) {
        throw std::invalid_argument("decomposition does not cover the domain at level " +
                                    std::to_string(l + 1) + "; overlap ratio too small");
      }
    }
    for (int i = d - 1; i >= 0; --i) {
      if (++idx[static_cast<size_t>(i)] < n_per_dim) break;
      idx[static_cast<size_t>(i)] = 0;
    }
  }
}

}  // namespace

Decomposition build_levels(const Box& domain, int num_levels, double overlap_ratio) {
  if (num_levels < 1) throw std::invalid_argument("need at least one level");
  std::vector<int> counts(static_cast<size_t>(num_levels));
  for (int l = 0; l < num_levels; ++l) counts[static_cast<size_t>(l)] = 1 << l;
  return build_levels(domain, counts, overlap_ratio);
}

Decomposition build_levels(const Box& domain, std::span<const int> per_dim_counts,
                           double overlap_ratio) {
  check_domain(domain);
  if (per_dim_counts.empty()) throw std::invalid_argument("need at least one level");
  if (!(overlap_ratio > 1.0)) {
    throw std::invalid_argument("non-overlapping decomposition: overlap ratio must exceed 1");
  }
  for (size_t l = 0; l < per_dim_counts.size(); ++l) {
    if (per_dim_counts[l] < 1) throw std::invalid_argument("per-dim subdomain count must be >= 1");
    if (l > 0 && per_dim_counts[l] <= per_dim_counts[l - 1]) {
      throw std::invalid_argument("subdomain counts must increase across levels");
    }
  }

  Decomposition dec;
  dec.domain = domain;
  dec.delta = overlap_ratio;
  dec.dim = domain.dim();
  dec.per_dim_counts.assign(per_dim_counts.begin(), per_dim_counts.end());
  for (size_t l = 0; l < per_dim_counts.size(); ++l) {
    dec.levels.push_back(
        build_level(domain, static_cast<int>(l) + 1, per_dim_counts[l], overlap_ratio));
  }
  check_coverage(dec);
  return dec;
}

Decomposition global_decomposition(const Box& domain) {
  check_domain(domain);
  Decomposition dec;
  dec.domain = domain;
  dec.delta = 0.0;
  dec.dim = domain.dim();
  dec.per_dim_counts = {1};

  Subdomain s;
  s.level = 1;
  s.index = 1;
  s.dim = dec.dim;
  s.sole = true;
  for (int i = 0; i < dec.dim; ++i) {
    s.center[static_cast<size_t>(i)] = domain.lo[static_cast<size_t>(i)] + 0.5 * domain.extent(i);
    s.halfwidth[static_cast<size_t>(i)] = 0.5 * domain.extent(i);
  }
  dec.levels.push_back({s});
  return dec;
}

double raw_window(const Subdomain& s, std::span<const double> x) {
  if (s.sole) return 1.0;
  if (!s.contains(x)) return 0.0;
  double acc = 1.0;
  for (int i = 0; i < s.dim; ++i) {
    const double t = (x[static_cast<size_t>(i)] - s.center[static_cast<size_t>(i)]) /
                     s.halfwidth[static_cast<size_t>(i)];
    const double b = 1.0 + std::cos(std::numbers::pi * t);
    acc = acc * (b * b);
  }
  return acc;
}

Jet local_coord_jet(const Subdomain& s, int axis, double x_axis) {
  const double mu = s.center[static_cast<size_t>(axis)];
  const double sigma = s.halfwidth[static_cast<size_t>(axis)];
  Jet t = Jet::constant(s.dim, (x_axis - mu) / sigma);
  t.c[static_cast<size_t>(1 + axis)] = 1.0 / sigma;
  return t;
}

Jet raw_window_jet(const Subdomain& s, std::span<const double> x) {
  const int d = s.dim;
  if (s.sole) return Jet::constant(d, 1.0);
  if (!s.contains(x)) return Jet::constant(d, 0.0);
  Jet acc = Jet::constant(d, 1.0);
  for (int i = 0; i < d; ++i) {
    Jet t = local_coord_jet(s, i, x[static_cast<size_t>(i)]);
    Jet arg(d);
    jk_scale_shift(arg.data(), t.data(), std::numbers::pi, 0.0, d);
    Jet b(d);
    jk_cos(b.data(), arg.data(), d);
    jk_scale_shift(b.data(), b.data(), 1.0, 1.0, d);
    Jet w(d);
    jk_mul(w.data(), b.data(), b.data(), d);
    Jet next(d);
    jk_mul(next.data(), acc.data(), w.data(), d);
    acc = next;
  }
  return acc;
}

namespace {

double level_raw_sum(const Decomposition& dec, int level, std::span<const double> x) {
  double sum = 0.0;
  for (const Subdomain& s : dec.levels[static_cast<size_t>(level)]) sum += raw_window(s, x);
  return sum;
}

}  // namespace

double pou_window(const Decomposition& dec, int level, size_t j, std::span<const double> x) {
  const double sum = level_raw_sum(dec, level, x);
  if (!(sum > 0.0)) {
    throw std::runtime_error("window normalization vanished: point not covered at level " +
                             std::to_string(level + 1));
  }
  const double inv = 1.0 / sum;
  return raw_window(dec.subdomain(level, j), x) * inv;
}

Jet pou_window_jet(const Decomposition& dec, int level, size_t j, std::span<const double> x) {
  const int d = dec.dim;
  Jet sum = Jet::constant(d, 0.0);
  for (const Subdomain& s : dec.levels[static_cast<size_t>(level)]) {
    Jet w = raw_window_jet(s, x);
    Jet next(d);
    jk_add(next.data(), sum.data(), w.data(), d);
    sum = next;
  }
  if (!(sum.value() > 0.0)) {
    throw std::runtime_error("window normalization vanished: point not covered at level " +
                             std::to_string(level + 1));
  }
  Jet w = raw_window_jet(dec.subdomain(level, j), x);
  Jet out(d);
  jk_div(out.data(), w.data(), sum.data(), d);
  return out;
}

void pou_window_jets(const Decomposition& dec, int level, std::span<const uint32_t> active,
                     std::span<const double> x, std::span<Jet> out) {
  const int d = dec.dim;
  // inactive subdomains contribute exact zeros, so summing the active raw
  // windows in index order reproduces the full level sum bit for bit
  Jet sum = Jet::constant(d, 0.0);
  for (size_t k = 0; k < active.size(); ++k) {
    out[k] = raw_window_jet(dec.subdomain(level, active[k]), x);
    Jet next(d);
    jk_add(next.data(), sum.data(), out[k].data(), d);
    sum = next;
  }
  if (!(sum.value() > 0.0)) {
    throw std::runtime_error("window normalization vanished: point not covered at level " +
                             std::to_string(level + 1));
  }
  for (size_t k = 0; k < active.size(); ++k) {
    Jet w(d);
    jk_div(w.data(), out[k].data(), sum.data(), d);
    out[k] = w;
  }
}

void normalize_input(const Subdomain& s, std::span<const double> x, std::span<double> out) {
  for (int i = 0; i < s.dim; ++i) {
    out[static_cast<size_t>(i)] = (x[static_cast<size_t>(i)] - s.center[static_cast<size_t>(i)]) /
                                  s.halfwidth[static_cast<size_t>(i)];
  }
}

ActiveMap build_active_map(const Decomposition& dec, std::span<const double> points,
                           size_t n_points) {
  const int d = dec.dim;
  ActiveMap map;
  map.offsets.reserve(n_points + 1);
  map.offsets.push_back(0);

  for (size_t p = 0; p < n_points; ++p) {
    std::span<const double> x = points.subspan(p * static_cast<size_t>(d), static_cast<size_t>(d));
    if (!dec.domain.contains(x)) {
      throw std::invalid_argument("active map: point " + std::to_string(p) +
                                  " lies outside the domain");
    }
    for (int l = 0; l < dec.num_levels(); ++l) {
      const auto& subs = dec.levels[static_cast<size_t>(l)];
      const size_t before = map.pairs.size();
      for (size_t j = 0; j < subs.size(); ++j) {
        if (subs[j].sole || subs[j].contains(x)) {
          map.pairs.push_back({static_cast<uint32_t>(l), static_cast<uint32_t>(j)});
        }
      }
      if (map.pairs.size() == before) {
        throw std::runtime_error("active map: point " + std::to_string(p) +
                                 " not covered at level " + std::to_string(l + 1));
      }
    }
    map.offsets.push_back(static_cast<uint32_t>(map.pairs.size()));
  }
  return map;
}

void write_decomposition_csv(std::ostream& os, const Decomposition& dec) {
  os << "level,j";
  for (int i = 0; i < dec.dim; ++i) os << ",mu_" << (i + 1);
  for (int i = 0; i < dec.dim; ++i) os << ",sigma_" << (i + 1);
  os << "\n";
  for (const auto& lvl : dec.levels) {
    for (const Subdomain& s : lvl) {
      os << s.level << "," << s.index;
      for (int i = 0; i < s.dim; ++i) os << "," << format_double(s.center[static_cast<size_t>(i)]);
      for (int i = 0; i < s.dim; ++i) {
        os << "," << format_double(s.halfwidth[static_cast<size_t>(i)]);
      }
      os << "\n";
    }
  }
}

}  // namespace fbpinn
