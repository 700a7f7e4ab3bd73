#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fbpinn/network.hpp"

using namespace fbpinn;

TEST_CASE("parameter counts") {
  const std::vector<int> a = {1, 16, 1};
  CHECK(init_fcn(a, 0).param_count() == 49);
  const std::vector<int> b = {2, 16, 1};  // the 2D subdomain network
  CHECK(init_fcn(b, 0).param_count() == 65);
}

TEST_CASE("initialization is deterministic and Glorot-bounded") {
  const std::vector<int> sizes = {2, 16, 1};
  const NetworkParams n1 = init_fcn(sizes, 123);
  const NetworkParams n2 = init_fcn(sizes, 123);
  CHECK(n1.weights == n2.weights);
  CHECK(n1.biases == n2.biases);

  const NetworkParams n3 = init_fcn(sizes, 124);
  CHECK(n1.weights != n3.weights);

  for (int l = 0; l < n1.num_layers(); ++l) {
    const double bound = std::sqrt(
        6.0 / (n1.sizes[static_cast<size_t>(l)] + n1.sizes[static_cast<size_t>(l) + 1]));
    for (double w : n1.weights[static_cast<size_t>(l)]) {
      CHECK(std::abs(w) <= bound);
    }
    for (double b : n1.biases[static_cast<size_t>(l)]) CHECK(b == 0.0);
  }
}

TEST_CASE("invalid layer specs are rejected") {
  const std::vector<int> one = {4};
  CHECK_THROWS(init_fcn(one, 0));
  const std::vector<int> zero = {1, 0, 1};
  CHECK_THROWS(init_fcn(zero, 0));
}

TEST_CASE("forward pass closed forms") {
  // all-zero parameters give zero output
  const std::vector<int> sizes = {1, 3, 1};
  NetworkParams net = init_fcn(sizes, 5);
  std::vector<double> zeros(net.param_count(), 0.0);
  load_params_flat(net, zeros);
  const double x0 = 0.37;
  CHECK(fcn_forward(net, {&x0, 1}) == 0.0);

  // single identity layer: W=2, b=1, x=3 -> 7
  NetworkParams lin;
  lin.sizes = {1, 1};
  lin.weights = {{2.0}};
  lin.biases = {{1.0}};
  lin.activations = {Activation::Identity};
  const double x1 = 3.0;
  CHECK(fcn_forward(lin, {&x1, 1}) == 7.0);

  // odd symmetry: tanh(0.5) + tanh(-0.5) = 0
  NetworkParams odd;
  odd.sizes = {1, 2, 1};
  odd.weights = {{1.0, -1.0}, {1.0, 1.0}};
  odd.biases = {{0.0, 0.0}, {0.0}};
  odd.activations = {Activation::Tanh, Activation::Identity};
  const double xh = 0.5;
  CHECK(fcn_forward(odd, {&xh, 1}) == 0.0);
}

TEST_CASE("dimension mismatches are rejected") {
  const std::vector<int> sizes = {2, 4, 1};
  const NetworkParams net = init_fcn(sizes, 0);
  const double x0 = 1.0;
  CHECK_THROWS(fcn_forward(net, {&x0, 1}));
}

TEST_CASE("forward value agrees with the derivative engine exactly") {
  for (uint64_t seed = 0; seed < 6; ++seed) {
    const std::vector<int> sizes = {2, 7, 5, 1};
    const NetworkParams net = init_fcn(sizes, seed);
    Rng rng(seed + 50);
    for (int trial = 0; trial < 5; ++trial) {
      const double x[2] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const DualValue dv = eval_with_input_derivatives(net, {x, 2});
      CHECK(dv.value == fcn_forward(net, {x, 2}));
    }
  }
}

TEST_CASE("outputs stay finite for finite inputs") {
  Rng rng(7);
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const std::vector<int> sizes = {1, 32, 32, 1};
    const NetworkParams net = init_fcn(sizes, seed);
    for (int trial = 0; trial < 10; ++trial) {
      const double x0 = rng.uniform(-100.0, 100.0);
      CHECK(std::isfinite(fcn_forward(net, {&x0, 1})));
    }
  }
}

TEST_CASE("flat parameter round trip") {
  const std::vector<int> sizes = {2, 5, 1};
  NetworkParams net = init_fcn(sizes, 11);
  std::vector<double> flat(net.param_count());
  copy_params_flat(net, flat);
  NetworkParams other = init_fcn(sizes, 99);
  load_params_flat(other, flat);
  CHECK(net.weights == other.weights);
  CHECK(net.biases == other.biases);
}
