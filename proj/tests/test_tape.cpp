#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fbpinn/ansatz.hpp"
#include "fbpinn/network.hpp"
#include "fbpinn/problems.hpp"
#include "fbpinn/tape.hpp"
#include "fbpinn/training.hpp"
#include "test_util.hpp"

using namespace fbpinn;
using testutil::rel_err;

TEST_CASE("jet algebra differentiates polynomials") {
  // f(x) = x^2 at x = 3
  const Jet x = Jet::variable(1, 0, 3.0);
  const Jet f = x * x;
  CHECK(f.value() == 9.0);
  CHECK(f.first(0) == 6.0);
  CHECK(f.second(0) == 2.0);
}

TEST_CASE("jet tanh at the origin") {
  const Jet x = Jet::variable(1, 0, 0.0);
  const Jet f = tanh(x);
  CHECK(f.value() == 0.0);
  CHECK(f.first(0) == 1.0);
  CHECK(f.second(0) == 0.0);
}

TEST_CASE("jet transcendental identities") {
  const double x0 = 0.7;
  const Jet x = Jet::variable(1, 0, x0);
  const Jet s = sin(x);
  CHECK(s.value() == doctest::Approx(std::sin(x0)).epsilon(1e-15));
  CHECK(s.first(0) == doctest::Approx(std::cos(x0)).epsilon(1e-15));
  CHECK(s.second(0) == doctest::Approx(-std::sin(x0)).epsilon(1e-15));

  const Jet e = exp(x);
  CHECK(e.second(0) == doctest::Approx(std::exp(x0)).epsilon(1e-15));

  // quotient rule through second order: g = sin(x)/x
  const Jet g = sin(x) / x;
  const double g1 = std::cos(x0) / x0 - std::sin(x0) / (x0 * x0);
  const double g2 =
      -std::sin(x0) / x0 - 2.0 * std::cos(x0) / (x0 * x0) + 2.0 * std::sin(x0) / (x0 * x0 * x0);
  CHECK(g.first(0) == doctest::Approx(g1).epsilon(1e-13));
  CHECK(g.second(0) == doctest::Approx(g2).epsilon(1e-13));
}

TEST_CASE("derivatives are linear in the function") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    const double x0 = rng.uniform(-1, 1);
    const Jet x = Jet::variable(1, 0, x0);
    const Jet f = tanh(x) * sin(x);
    const Jet g = exp(x * x);
    const Jet combo = a * f + b * g;
    for (int ch = 0; ch < 3; ++ch) {
      CHECK(combo.c[static_cast<size_t>(ch)] ==
            doctest::Approx(a * f.c[static_cast<size_t>(ch)] + b * g.c[static_cast<size_t>(ch)])
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("network input derivatives match finite differences") {
  // 1-hidden-layer net, seed 0, 4 units, x = 0.3
  const std::vector<int> sizes = {1, 4, 1};
  const NetworkParams net = init_fcn(sizes, 0);
  const double x0 = 0.3;
  const DualValue dv = eval_with_input_derivatives(net, {&x0, 1});

  const double h = 1e-4;
  const double xp = x0 + h, xm = x0 - h;
  const double fp = fcn_forward(net, {&xp, 1});
  const double fm = fcn_forward(net, {&xm, 1});
  const double f0 = fcn_forward(net, {&x0, 1});

  CHECK(rel_err(dv.value, f0) < 1e-12);
  CHECK(rel_err(dv.input_partials[0], (fp - fm) / (2 * h)) < 1e-6);
  CHECK(rel_err(dv.input_second_partials[0], (fp - 2 * f0 + fm) / (h * h)) < 1e-6);
}

TEST_CASE("randomized networks agree with the finite-difference oracle") {
  const double h = 1e-4;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    const int dim = seed % 2 == 0 ? 2 : 1;
    std::vector<int> sizes = {dim, 5, 3, 1};
    const NetworkParams net = init_fcn(sizes, seed);
    Rng rng(seed * 91);
    std::vector<double> x(static_cast<size_t>(dim));
    for (double& xi : x) xi = rng.uniform(-0.8, 0.8);

    // compare all derivative components of the point at once; the FD noise
    // floor (~4 eps |f| / h^2) makes per-component relative error meaningless
    // for components that are tiny next to their siblings
    const DualValue dv = eval_with_input_derivatives(net, x);
    std::vector<double> got, ref;
    for (int i = 0; i < dim; ++i) {
      std::vector<double> xp = x, xm = x;
      xp[static_cast<size_t>(i)] += h;
      xm[static_cast<size_t>(i)] -= h;
      const double fp = fcn_forward(net, xp);
      const double fm = fcn_forward(net, xm);
      const double f0 = fcn_forward(net, x);
      got.push_back(dv.input_partials[static_cast<size_t>(i)]);
      ref.push_back((fp - fm) / (2 * h));
      got.push_back(dv.input_second_partials[static_cast<size_t>(i)]);
      ref.push_back((fp - 2 * f0 + fm) / (h * h));
    }
    CHECK(rel_err(got, ref) < 1e-6);
  }
}

TEST_CASE("tape reproduces a scalar objective and its gradient") {
  // loss(theta) = theta0^2 with theta0 = 2
  TapeProgram prog(1);
  const uint32_t t0 = prog.param(0);
  prog.mul(t0, t0);
  const std::vector<double> params = {2.0};
  std::vector<double> grad(1, 0.0);
  const double value = tape_value_and_grad(prog, params, grad);
  CHECK(value == 4.0);
  CHECK(grad[0] == 4.0);
}

TEST_CASE("tape forward equals the jet path bit for bit") {
  const std::vector<int> sizes = {2, 6, 1};
  const NetworkParams net = init_fcn(sizes, 9);
  const std::vector<double> params = [&] {
    std::vector<double> p(net.param_count());
    copy_params_flat(net, p);
    return p;
  }();

  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const double x[2] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    TapeProgram prog(2);
    std::vector<uint32_t> inputs = {prog.input(0, x[0]), prog.input(1, x[1])};
    emit_fcn(prog, net, inputs, 0);
    const DualValue via_tape = tape_eval(prog, params);
    const DualValue via_jet = eval_with_input_derivatives(net, {x, 2});
    CHECK(via_tape.value == via_jet.value);
    for (int i = 0; i < 2; ++i) {
      CHECK(via_tape.input_partials[static_cast<size_t>(i)] ==
            via_jet.input_partials[static_cast<size_t>(i)]);
      CHECK(via_tape.input_second_partials[static_cast<size_t>(i)] ==
            via_jet.input_second_partials[static_cast<size_t>(i)]);
    }
  }
}

TEST_CASE("zero-initialized network: only final-layer bias gradients are nonzero") {
  const ProblemSpec p = make_laplace1d();
  const Decomposition dec = build_levels(p.domain, 2, 1.9);
  ModelSpec m = make_model(ModelKind::MultilevelFbpinn, dec, std::vector<int>{4}, p.constraint, 0);
  std::vector<double> zeros(m.total_params, 0.0);
  m.set_flat_params(zeros);

  std::vector<int> counts = {10};
  const std::vector<double> pts = collocation_grid(p.domain, counts);
  const ActiveMap map = build_active_map(m.dec, pts, 10);
  std::vector<double> grad(m.total_params);
  loss_gradient(m, p, pts, map, grad);

  // per net ([1,4,1]): 4 hidden weights, 4 hidden biases, 4 output weights,
  // 1 output bias; with all parameters zero only the output bias can move
  // the residual
  double bias_norm = 0.0, rest_norm = 0.0;
  for (size_t n = 0; n < m.nets.size(); ++n) {
    const size_t off = m.net_offsets[n];
    const size_t count = m.nets[n].param_count();
    for (size_t i = 0; i < count; ++i) {
      if (i == count - 1) {
        bias_norm += std::abs(grad[off + i]);
      } else {
        rest_norm += std::abs(grad[off + i]);
      }
    }
  }
  CHECK(bias_norm > 1e-3);
  CHECK(rest_norm == 0.0);
}

TEST_CASE("full loss gradient matches finite differences on a small model") {
  // 1D, two levels, 4 hidden units, 10 collocation points
  const ProblemSpec p = make_laplace1d();
  const Decomposition dec = build_levels(p.domain, 2, 1.9);
  const ModelSpec m =
      make_model(ModelKind::MultilevelFbpinn, dec, std::vector<int>{4}, p.constraint, 1);

  std::vector<int> counts = {10};
  const std::vector<double> pts = collocation_grid(p.domain, counts);
  const ActiveMap map = build_active_map(m.dec, pts, 10);

  std::vector<double> grad(m.total_params);
  loss_gradient(m, p, pts, map, grad);

  ModelSpec probe = m;
  std::vector<double> flat = m.flat_params();
  const double h = 1e-5;
  std::vector<double> fd(m.total_params);
  for (size_t i = 0; i < flat.size(); ++i) {
    const double keep = flat[i];
    flat[i] = keep + h;
    probe.set_flat_params(flat);
    const double lp = loss(probe, p, pts, map);
    flat[i] = keep - h;
    probe.set_flat_params(flat);
    const double lm = loss(probe, p, pts, map);
    flat[i] = keep;
    fd[i] = (lp - lm) / (2 * h);
  }
  probe.set_flat_params(flat);
  CHECK(rel_err(grad, fd) < 1e-5);
}

TEST_CASE("tape evaluation is deterministic") {
  const std::vector<int> sizes = {2, 8, 1};
  const NetworkParams net = init_fcn(sizes, 17);
  std::vector<double> params(net.param_count());
  copy_params_flat(net, params);

  const double x[2] = {0.3, -0.4};
  TapeProgram prog(2);
  std::vector<uint32_t> inputs = {prog.input(0, x[0]), prog.input(1, x[1])};
  emit_fcn(prog, net, inputs, 0);

  const DualValue a = tape_eval(prog, params);
  const DualValue b = tape_eval(prog, params);
  CHECK(a.value == b.value);
  CHECK(a.input_partials == b.input_partials);
  CHECK(a.input_second_partials == b.input_second_partials);
}

TEST_CASE("tape rejects malformed programs") {
  TapeProgram prog(1);
  CHECK_THROWS(prog.add(0, 0));  // no nodes yet
  const uint32_t c = prog.constant(1.0);
  CHECK_THROWS(prog.mul(c, 5));
}
