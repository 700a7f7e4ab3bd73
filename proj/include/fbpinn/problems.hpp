#pragma once

// The boundary value problems solved by this library, all with homogeneous
// Dirichlet conditions on a box (enforced exactly by the constraint op):
//
//   laplace1d     -u'' = 8                 on [0,1],   u = 4x(1-x)
//   laplace2d     -Lap u = f               on [0,1]^2, u = 16 x1(1-x1) x2(1-x2)
//   multiscale2d  -Lap u = f               on [0,1]^2, u = (1/n) sum sin(w_i pi x1) sin(w_i pi x2)
//   helmholtz2d   Lap u - k^2 u = f        on [0,1]^2, Gaussian source, no closed form
//
// helmholtz2d optionally flips the k^2 term sign (Lap u + k^2 u = f); the
// finite-difference reference honors the same switch so model-vs-reference
// comparisons stay self-consistent.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fbpinn/ansatz.hpp"
#include "fbpinn/decomposition.hpp"
#include "fbpinn/jet.hpp"

namespace fbpinn {

enum class ProblemId : uint8_t { Laplace1d, Laplace2d, Multiscale2d, Helmholtz2d };
enum class HelmholtzSign : uint8_t { Minus, Plus };

std::string to_string(ProblemId id);
ProblemId problem_id_from_string(const std::string& s);

struct ProblemSpec {
  ProblemId id = ProblemId::Laplace1d;
  Box domain;
  std::vector<double> omegas;  // multiscale frequencies
  double k = 0.0;              // helmholtz wave number
  double sigma_g = 0.0;        // helmholtz source width
  HelmholtzSign sign = HelmholtzSign::Minus;
  double constraint_sharpness = 0.2;
  ConstraintOp constraint;

  int dim() const { return domain.dim(); }
  bool has_exact() const { return id != ProblemId::Helmholtz2d; }
};

ProblemSpec make_laplace1d();
ProblemSpec make_laplace2d();
// default frequencies omega_i = 2^i for i = 1..n
ProblemSpec make_multiscale2d(int n);
ProblemSpec make_multiscale2d(std::span<const double> omegas);
ProblemSpec make_helmholtz2d(double k, double sigma_g, HelmholtzSign sign = HelmholtzSign::Minus);

double source(const ProblemSpec& p, std::span<const double> x);

// closed-form solution value; empty for helmholtz2d (use the FD reference)
std::optional<double> exact(const ProblemSpec& p, std::span<const double> x);

// exact solution evaluated through the jet engine (closed-form problems only)
Jet exact_jet(const ProblemSpec& p, std::span<const double> x);

// PDE residual given the jet of the (constrained) solution at x:
//   laplace family: -Lap u - f;  helmholtz: Lap u -+ k^2 u - f
double residual(const ProblemSpec& p, const Jet& u, std::span<const double> x);

// d(residual)/d(jet channel) as a jet-shaped seed for the reverse pass
void residual_seed(const ProblemSpec& p, std::span<double> seed);

}  // namespace fbpinn
