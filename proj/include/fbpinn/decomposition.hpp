#pragma once

// Multilevel uniform rectangular overlapping domain decompositions.
//
// Each level l carries J_per_dim^d subdomains. On the unit interval a level
// with J subdomains per dimension places centers at (j-1)/(J-1) with
// half-width (delta/2)/(J-1); a level with a single subdomain is centered at
// the domain midpoint with half-width delta/2 and its window is identically
// one. Arbitrary boxes are handled by mapping that construction affinely
// onto each dimension's extent. delta > 1 makes neighboring subdomains
// overlap; the raw cosine windows then form a partition of unity per level
// after normalization.

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "fbpinn/jet.hpp"

namespace fbpinn {

struct Box {
  std::vector<double> lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
  double extent(int i) const { return hi[static_cast<size_t>(i)] - lo[static_cast<size_t>(i)]; }
  bool contains(std::span<const double> x) const;
};

Box unit_box(int dim);

struct Subdomain {
  int level = 1;  // 1-based, as reported in exports
  int index = 1;  // 1-based within its level
  int dim = 0;
  bool sole = false;  // only subdomain on its level; window identically 1
  std::array<double, kMaxDim> center{};
  std::array<double, kMaxDim> halfwidth{};

  double lo(int i) const { return center[static_cast<size_t>(i)] - halfwidth[static_cast<size_t>(i)]; }
  double hi(int i) const { return center[static_cast<size_t>(i)] + halfwidth[static_cast<size_t>(i)]; }
  // strict interior of the support box
  bool contains(std::span<const double> x) const;
};

struct Decomposition {
  Box domain;
  double delta = 0.0;  // 0 marks the degenerate global (PINN) decomposition
  int dim = 0;
  std::vector<int> per_dim_counts;              // per level
  std::vector<std::vector<Subdomain>> levels;   // per level, index-ordered

  int num_levels() const { return static_cast<int>(levels.size()); }
  size_t num_subdomains(int level) const { return levels[static_cast<size_t>(level)].size(); }
  size_t total_subdomains() const;
  const Subdomain& subdomain(int level, size_t j) const {
    return levels[static_cast<size_t>(level)][j];
  }
};

// Default level rule: per-dim counts 2^(l-1) for l = 1..L.
Decomposition build_levels(const Box& domain, int num_levels, double overlap_ratio);

// Explicit per-level per-dimension counts, e.g. {1,8,64} or a one-level {16}.
Decomposition build_levels(const Box& domain, std::span<const int> per_dim_counts,
                           double overlap_ratio);

// Single subdomain equal to the domain box itself (window identically 1,
// inputs normalized over the global domain). Used by the PINN baseline.
Decomposition global_decomposition(const Box& domain);

// Unnormalized window: product over dimensions of (1+cos(pi*(x-mu)/sigma))^2,
// identically 1 for a sole subdomain; exactly 0 on and outside the box faces.
double raw_window(const Subdomain& s, std::span<const double> x);
Jet raw_window_jet(const Subdomain& s, std::span<const double> x);

// Partition-of-unity window: raw window normalized by the level sum.
// Throws if the level sum vanishes at x (x outside the covered region).
double pou_window(const Decomposition& dec, int level, size_t j, std::span<const double> x);
Jet pou_window_jet(const Decomposition& dec, int level, size_t j, std::span<const double> x);

// Normalized windows for a set of subdomains of one level, assumed to be
// exactly the ones active at x (all others contribute zero to the level sum).
// Produces the same bits as pou_window_jet for each member.
void pou_window_jets(const Decomposition& dec, int level, std::span<const uint32_t> active,
                     std::span<const double> x, std::span<Jet> out);

// per-dimension map onto the subdomain-local frame: (x_i - mu_i) / sigma_i
void normalize_input(const Subdomain& s, std::span<const double> x, std::span<double> out);

// jet of the local coordinate (x_axis - mu)/sigma seeded along `axis`;
// the canonical input seeding for subdomain networks and window factors
Jet local_coord_jet(const Subdomain& s, int axis, double x_axis);

struct ActivePair {
  uint32_t level;  // 0-based
  uint32_t j;      // 0-based within level
};

// Which subdomains strictly contain each point, in (level, j) order.
// CSR layout: pairs for point p live in [offsets[p], offsets[p+1]).
struct ActiveMap {
  std::vector<uint32_t> offsets;
  std::vector<ActivePair> pairs;

  size_t num_points() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::span<const ActivePair> at(size_t p) const {
    return {pairs.data() + offsets[p], pairs.data() + offsets[p + 1]};
  }
};

// points is row-major n x dim. Validates that every point lies in the domain
// and is covered by at least one subdomain on every level.
ActiveMap build_active_map(const Decomposition& dec, std::span<const double> points,
                           size_t n_points);

// one line per subdomain: level,j,mu_1..mu_d,sigma_1..sigma_d
void write_decomposition_csv(std::ostream& os, const Decomposition& dec);

}  // namespace fbpinn
