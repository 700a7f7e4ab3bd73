#pragma once

// Second-order forward-mode values ("jets"): a scalar together with its first
// and diagonal second partial derivatives with respect to up to kMaxDim input
// coordinates. Mixed second partials are not tracked; every PDE in this
// library only needs the Laplacian.
//
// Storage layout is [value, g_0..g_{d-1}, h_0..h_{d-1}] packed contiguously
// for the active dimension d (width 1+2d). The jk_* kernels below operate on
// that raw layout and are shared verbatim by the Jet value type and the tape
// in tape.hpp, so both evaluation paths produce bit-identical doubles.

#include <array>
#include <cassert>
#include <cmath>
#include <cstring>
#include <span>
#include <vector>

namespace fbpinn {

inline constexpr int kMaxDim = 3;

inline constexpr int jet_width(int dim) { return 1 + 2 * dim; }

// --- raw kernels -----------------------------------------------------------

inline void jk_copy(double* o, const double* a, int d) {
  std::memcpy(o, a, sizeof(double) * static_cast<size_t>(jet_width(d)));
}

inline void jk_const(double* o, double c, int d) {
  o[0] = c;
  for (int i = 1; i < jet_width(d); ++i) o[i] = 0.0;
}

// coordinate x_axis seeded with unit first derivative
inline void jk_variable(double* o, double x, int axis, int d) {
  jk_const(o, x, d);
  o[1 + axis] = 1.0;
}

inline void jk_add(double* o, const double* a, const double* b, int d) {
  for (int i = 0; i < jet_width(d); ++i) o[i] = a[i] + b[i];
}

inline void jk_sub(double* o, const double* a, const double* b, int d) {
  for (int i = 0; i < jet_width(d); ++i) o[i] = a[i] - b[i];
}

inline void jk_neg(double* o, const double* a, int d) {
  for (int i = 0; i < jet_width(d); ++i) o[i] = -a[i];
}

// o = s*a + t (t shifts the value channel only)
inline void jk_scale_shift(double* o, const double* a, double s, double t, int d) {
  o[0] = s * a[0] + t;
  for (int i = 1; i < jet_width(d); ++i) o[i] = s * a[i];
}

// Product rule through second order. Operand order matters for bit
// reproducibility; callers must agree on it (this library puts the
// x-only factor first where one exists, e.g. window * network).
inline void jk_mul(double* o, const double* a, const double* b, int d) {
  const double av = a[0], bv = b[0];
  o[0] = av * bv;
  for (int i = 0; i < d; ++i) {
    o[1 + i] = a[1 + i] * bv + av * b[1 + i];
  }
  for (int i = 0; i < d; ++i) {
    o[1 + d + i] = a[1 + d + i] * bv + 2.0 * (a[1 + i] * b[1 + i]) + av * b[1 + d + i];
  }
}

// chain rule for y = f(a) given f, f', f'' at a's value
inline void jk_chain(double* o, const double* a, double f, double f1, double f2, int d) {
  o[0] = f;
  for (int i = 0; i < d; ++i) o[1 + i] = f1 * a[1 + i];
  for (int i = 0; i < d; ++i) {
    o[1 + d + i] = f2 * (a[1 + i] * a[1 + i]) + f1 * a[1 + d + i];
  }
}

inline void jk_tanh(double* o, const double* a, int d) {
  const double t = std::tanh(a[0]);
  const double s = 1.0 - t * t;
  jk_chain(o, a, t, s, -2.0 * t * s, d);
}

inline void jk_sin(double* o, const double* a, int d) {
  const double s = std::sin(a[0]), c = std::cos(a[0]);
  jk_chain(o, a, s, c, -s, d);
}

inline void jk_cos(double* o, const double* a, int d) {
  const double s = std::sin(a[0]), c = std::cos(a[0]);
  jk_chain(o, a, c, -s, -c, d);
}

inline void jk_exp(double* o, const double* a, int d) {
  const double e = std::exp(a[0]);
  jk_chain(o, a, e, e, e, d);
}

inline void jk_recip(double* o, const double* a, int d) {
  const double r = 1.0 / a[0];
  jk_chain(o, a, r, -r * r, 2.0 * r * r * r, d);
}

inline void jk_div(double* o, const double* a, const double* b, int d) {
  double tmp[1 + 2 * kMaxDim];
  jk_recip(tmp, b, d);
  jk_mul(o, a, tmp, d);
}

// --- value type ------------------------------------------------------------

struct Jet {
  int dim = 0;
  std::array<double, 1 + 2 * kMaxDim> c{};

  Jet() = default;
  explicit Jet(int d) : dim(d) { assert(d >= 1 && d <= kMaxDim); }

  static Jet constant(int d, double v) {
    Jet j(d);
    jk_const(j.c.data(), v, d);
    return j;
  }
  // coordinate jet: value x, unit first derivative along `axis`
  static Jet variable(int d, int axis, double x) {
    Jet j(d);
    jk_variable(j.c.data(), x, axis, d);
    return j;
  }

  double value() const { return c[0]; }
  double first(int i) const { return c[1 + i]; }
  double second(int i) const { return c[1 + dim + i]; }

  double* data() { return c.data(); }
  const double* data() const { return c.data(); }
};

inline Jet operator+(const Jet& a, const Jet& b) {
  assert(a.dim == b.dim);
  Jet o(a.dim);
  jk_add(o.data(), a.data(), b.data(), a.dim);
  return o;
}

inline Jet operator-(const Jet& a, const Jet& b) {
  assert(a.dim == b.dim);
  Jet o(a.dim);
  jk_sub(o.data(), a.data(), b.data(), a.dim);
  return o;
}

inline Jet operator-(const Jet& a) {
  Jet o(a.dim);
  jk_neg(o.data(), a.data(), a.dim);
  return o;
}

inline Jet operator*(const Jet& a, const Jet& b) {
  assert(a.dim == b.dim);
  Jet o(a.dim);
  jk_mul(o.data(), a.data(), b.data(), a.dim);
  return o;
}

inline Jet operator/(const Jet& a, const Jet& b) {
  assert(a.dim == b.dim);
  Jet o(a.dim);
  jk_div(o.data(), a.data(), b.data(), a.dim);
  return o;
}

inline Jet operator*(double s, const Jet& a) {
  Jet o(a.dim);
  jk_scale_shift(o.data(), a.data(), s, 0.0, a.dim);
  return o;
}
inline Jet operator*(const Jet& a, double s) { return s * a; }

inline Jet operator+(const Jet& a, double t) {
  Jet o(a.dim);
  jk_scale_shift(o.data(), a.data(), 1.0, t, a.dim);
  return o;
}
inline Jet operator+(double t, const Jet& a) { return a + t; }
inline Jet operator-(const Jet& a, double t) { return a + (-t); }
inline Jet operator-(double t, const Jet& a) { return (-a) + t; }

inline Jet tanh(const Jet& a) {
  Jet o(a.dim);
  jk_tanh(o.data(), a.data(), a.dim);
  return o;
}
inline Jet sin(const Jet& a) {
  Jet o(a.dim);
  jk_sin(o.data(), a.data(), a.dim);
  return o;
}
inline Jet cos(const Jet& a) {
  Jet o(a.dim);
  jk_cos(o.data(), a.data(), a.dim);
  return o;
}
inline Jet exp(const Jet& a) {
  Jet o(a.dim);
  jk_exp(o.data(), a.data(), a.dim);
  return o;
}

// Exact derivatives of a scalar field at one point: value, d first partials,
// d diagonal second partials.
struct DualValue {
  double value = 0.0;
  std::vector<double> input_partials;
  std::vector<double> input_second_partials;
};

inline DualValue to_dual(const Jet& j) {
  DualValue d;
  d.value = j.value();
  d.input_partials.resize(static_cast<size_t>(j.dim));
  d.input_second_partials.resize(static_cast<size_t>(j.dim));
  for (int i = 0; i < j.dim; ++i) {
    d.input_partials[static_cast<size_t>(i)] = j.first(i);
    d.input_second_partials[static_cast<size_t>(i)] = j.second(i);
  }
  return d;
}

}  // namespace fbpinn
