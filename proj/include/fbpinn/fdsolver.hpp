#pragma once

// Finite-difference reference for the 2D Helmholtz problem: 5-point Laplacian
// on a uniform n x n mesh over [0,1]^2, homogeneous Dirichlet boundary rows
// eliminated, interior unknowns solved with a sparse direct factorization.

#include <iosfwd>
#include <vector>

#include "fbpinn/problems.hpp"

namespace fbpinn {

struct GridField {
  int n = 0;        // nodes per dimension, boundary included
  double h = 0.0;   // 1/(n-1)
  HelmholtzSign sign = HelmholtzSign::Minus;
  double k = 0.0;
  double sigma = 0.0;
  std::vector<double> values;  // n*n, row-major (first dimension outer)

  double at(int i, int j) const { return values[static_cast<size_t>(i) * static_cast<size_t>(n) + static_cast<size_t>(j)]; }
};

// Solves (u_E + u_W + u_N + u_S - 4 u)/h^2 -+ k^2 u = f at interior nodes
// with u = 0 on the boundary; f is the problem's Gaussian source sampled at
// the nodes. Throws if the factorization fails or the discrete residual
// exceeds 1e-8 relative (near-singular system, e.g. +k^2 at a resonance).
GridField solve_helmholtz_fd(const ProblemSpec& p, int n);

// Same solve with a caller-supplied nodal right-hand side (row-major n*n,
// boundary entries ignored). Used by the manufactured-solution checks.
GridField solve_helmholtz_fd_rhs(const ProblemSpec& p, int n, const std::vector<double>& rhs);

// Node coordinates and values in row-major order; the point ordering is
// exactly collocation_grid([0,1]^2, {n,n}).
void sample_grid_nodes(const GridField& g, std::vector<double>& points,
                       std::vector<double>& values);

// text format: "n,h,sign_convention,k,sigma" header + values, one grid row
// per line
void write_grid(std::ostream& os, const GridField& g);
GridField read_grid(std::istream& is);

}  // namespace fbpinn
