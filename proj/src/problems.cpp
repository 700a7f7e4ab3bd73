#include "fbpinn/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fbpinn {

std::string to_string(ProblemId id) {
  switch (id) {
    case ProblemId::Laplace1d: return "laplace1d";
    case ProblemId::Laplace2d: return "laplace2d";
    case ProblemId::Multiscale2d: return "multiscale2d";
    case ProblemId::Helmholtz2d: return "helmholtz2d";
  }
  return "?";
}

ProblemId problem_id_from_string(const std::string& s) {
  if (s == "laplace1d") return ProblemId::Laplace1d;
  if (s == "laplace2d") return ProblemId::Laplace2d;
  if (s == "multiscale2d") return ProblemId::Multiscale2d;
  if (s == "helmholtz2d") return ProblemId::Helmholtz2d;
  throw std::invalid_argument("unknown problem: " + s);
}

ProblemSpec make_laplace1d() {
  ProblemSpec p;
  p.id = ProblemId::Laplace1d;
  p.domain = unit_box(1);
  p.constraint_sharpness = 0.2;
  p.constraint = dirichlet_box_constraint(p.domain, p.constraint_sharpness);
  return p;
}

ProblemSpec make_laplace2d() {
  ProblemSpec p;
  p.id = ProblemId::Laplace2d;
  p.domain = unit_box(2);
  p.constraint_sharpness = 0.2;
  p.constraint = dirichlet_box_constraint(p.domain, p.constraint_sharpness);
  return p;
}

ProblemSpec make_multiscale2d(int n) {
  if (n < 1) throw std::invalid_argument("multiscale2d: need n >= 1");
  std::vector<double> omegas(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) omegas[static_cast<size_t>(i)] = std::pow(2.0, i + 1);
  return make_multiscale2d(omegas);
}

ProblemSpec make_multiscale2d(std::span<const double> omegas) {
  if (omegas.empty()) throw std::invalid_argument("multiscale2d: need at least one frequency");
  for (double w : omegas) {
    if (!(w > 0.0)) throw std::invalid_argument("multiscale2d: frequencies must be positive");
  }
  ProblemSpec p;
  p.id = ProblemId::Multiscale2d;
  p.domain = unit_box(2);
  p.omegas.assign(omegas.begin(), omegas.end());
  p.constraint_sharpness = 1.0 / p.omegas.back();
  p.constraint = dirichlet_box_constraint(p.domain, p.constraint_sharpness);
  return p;
}

ProblemSpec make_helmholtz2d(double k, double sigma_g, HelmholtzSign sign) {
  if (!(k > 0.0) || !(sigma_g > 0.0)) {
    throw std::invalid_argument("helmholtz2d: k and sigma must be positive");
  }
  ProblemSpec p;
  p.id = ProblemId::Helmholtz2d;
  p.domain = unit_box(2);
  p.k = k;
  p.sigma_g = sigma_g;
  p.sign = sign;
  p.constraint_sharpness = 1.0 / k;
  p.constraint = dirichlet_box_constraint(p.domain, p.constraint_sharpness);
  return p;
}

double source(const ProblemSpec& p, std::span<const double> x) {
  const double pi = std::numbers::pi;
  switch (p.id) {
    case ProblemId::Laplace1d:
      return 8.0;
    case ProblemId::Laplace2d: {
      const double x1 = x[0], x2 = x[1];
      return 32.0 * (x1 * (1.0 - x1) + x2 * (1.0 - x2));
    }
    case ProblemId::Multiscale2d: {
      const double n = static_cast<double>(p.omegas.size());
      double sum = 0.0;
      for (double w : p.omegas) {
        const double wp = w * pi;
        sum += (wp * wp) * std::sin(wp * x[0]) * std::sin(wp * x[1]);
      }
      return (2.0 / n) * sum;
    }
    case ProblemId::Helmholtz2d: {
      double r2 = 0.0;
      for (size_t i = 0; i < 2; ++i) {
        const double t = (x[i] - 0.5) / p.sigma_g;
        r2 += t * t;
      }
      return std::exp(-0.5 * r2);
    }
  }
  throw std::logic_error("unreachable");
}

std::optional<double> exact(const ProblemSpec& p, std::span<const double> x) {
  const double pi = std::numbers::pi;
  switch (p.id) {
    case ProblemId::Laplace1d:
      return 4.0 * x[0] * (1.0 - x[0]);
    case ProblemId::Laplace2d:
      return 16.0 * x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]);
    case ProblemId::Multiscale2d: {
      const double n = static_cast<double>(p.omegas.size());
      double sum = 0.0;
      for (double w : p.omegas) {
        const double wp = w * pi;
        sum += std::sin(wp * x[0]) * std::sin(wp * x[1]);
      }
      return sum / n;
    }
    case ProblemId::Helmholtz2d:
      return std::nullopt;
  }
  throw std::logic_error("unreachable");
}

Jet exact_jet(const ProblemSpec& p, std::span<const double> x) {
  const double pi = std::numbers::pi;
  const int d = p.dim();
  switch (p.id) {
    case ProblemId::Laplace1d: {
      const Jet x1 = Jet::variable(d, 0, x[0]);
      return 4.0 * x1 * (1.0 - x1);
    }
    case ProblemId::Laplace2d: {
      const Jet x1 = Jet::variable(d, 0, x[0]);
      const Jet x2 = Jet::variable(d, 1, x[1]);
      return 16.0 * x1 * (1.0 - x1) * x2 * (1.0 - x2);
    }
    case ProblemId::Multiscale2d: {
      const Jet x1 = Jet::variable(d, 0, x[0]);
      const Jet x2 = Jet::variable(d, 1, x[1]);
      Jet sum = Jet::constant(d, 0.0);
      for (double w : p.omegas) {
        const double wp = w * pi;
        sum = sum + sin(wp * x1) * sin(wp * x2);
      }
      return (1.0 / static_cast<double>(p.omegas.size())) * sum;
    }
    case ProblemId::Helmholtz2d:
      throw std::invalid_argument("helmholtz2d has no closed-form solution");
  }
  throw std::logic_error("unreachable");
}

double residual(const ProblemSpec& p, const Jet& u, std::span<const double> x) {
  double lap = u.second(0);
  for (int i = 1; i < p.dim(); ++i) lap += u.second(i);
  const double f = source(p, x);
  switch (p.id) {
    case ProblemId::Laplace1d:
    case ProblemId::Laplace2d:
    case ProblemId::Multiscale2d:
      return -lap - f;
    case ProblemId::Helmholtz2d: {
      const double k2 = p.k * p.k;
      const double reaction = p.sign == HelmholtzSign::Minus ? -k2 * u.value() : k2 * u.value();
      return lap + reaction - f;
    }
  }
  throw std::logic_error("unreachable");
}

void residual_seed(const ProblemSpec& p, std::span<double> seed) {
  const int d = p.dim();
  for (int i = 0; i < jet_width(d); ++i) seed[static_cast<size_t>(i)] = 0.0;
  switch (p.id) {
    case ProblemId::Laplace1d:
    case ProblemId::Laplace2d:
    case ProblemId::Multiscale2d:
      for (int i = 0; i < d; ++i) seed[static_cast<size_t>(1 + d + i)] = -1.0;
      break;
    case ProblemId::Helmholtz2d: {
      const double k2 = p.k * p.k;
      seed[0] = p.sign == HelmholtzSign::Minus ? -k2 : k2;
      for (int i = 0; i < d; ++i) seed[static_cast<size_t>(1 + d + i)] = 1.0;
      break;
    }
  }
}

}  // namespace fbpinn
