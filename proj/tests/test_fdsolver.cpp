#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "fbpinn/fdsolver.hpp"
#include "fbpinn/training.hpp"

using namespace fbpinn;

namespace {

// nodal samples of u* = sin(pi x1) sin(pi x2)
std::vector<double> star_field(int n) {
  std::vector<double> u(static_cast<size_t>(n) * static_cast<size_t>(n));
  const double h = 1.0 / (n - 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      u[static_cast<size_t>(i) * static_cast<size_t>(n) + static_cast<size_t>(j)] =
          std::sin(std::numbers::pi * i * h) * std::sin(std::numbers::pi * j * h);
    }
  }
  return u;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

TEST_CASE("zero source gives the zero field") {
  const ProblemSpec p = make_helmholtz2d(7.0, 0.1);
  const std::vector<double> rhs(31 * 31, 0.0);
  const GridField g = solve_helmholtz_fd_rhs(p, 31, rhs);
  for (double v : g.values) CHECK(v == 0.0);
}

TEST_CASE("grid geometry and boundary values") {
  const ProblemSpec p = make_helmholtz2d(5.0, 0.2);
  const GridField g = solve_helmholtz_fd(p, 41);
  CHECK(g.n == 41);
  CHECK(g.h == doctest::Approx(1.0 / 40).epsilon(1e-15));
  for (int i = 0; i < g.n; ++i) {
    CHECK(g.at(i, 0) == 0.0);
    CHECK(g.at(i, g.n - 1) == 0.0);
    CHECK(g.at(0, i) == 0.0);
    CHECK(g.at(g.n - 1, i) == 0.0);
  }
  CHECK_THROWS(solve_helmholtz_fd(p, 2));
}

TEST_CASE("discrete manufactured solution is recovered to solver tolerance") {
  const double k = 4.0;
  const ProblemSpec p = make_helmholtz2d(k, 0.1);
  const int n = 41;
  const double h = 1.0 / (n - 1);
  const std::vector<double> u_star = star_field(n);

  // rhs from the discrete operator itself
  std::vector<double> rhs(u_star.size(), 0.0);
  auto at = [&](int i, int j) {
    return u_star[static_cast<size_t>(i) * static_cast<size_t>(n) + static_cast<size_t>(j)];
  };
  for (int i = 1; i < n - 1; ++i) {
    for (int j = 1; j < n - 1; ++j) {
      const double lap =
          (at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4.0 * at(i, j)) / (h * h);
      rhs[static_cast<size_t>(i) * static_cast<size_t>(n) + static_cast<size_t>(j)] =
          lap - k * k * at(i, j);
    }
  }

  const GridField g = solve_helmholtz_fd_rhs(p, n, rhs);
  CHECK(max_abs_diff(g.values, u_star) < 1e-10);
}

TEST_CASE("second-order convergence on a continuous manufactured solution") {
  const double k = 4.0;
  const ProblemSpec p = make_helmholtz2d(k, 0.1);
  const double pi = std::numbers::pi;

  auto solve_error = [&](int n) {
    std::vector<int> counts = {n, n};
    const std::vector<double> nodes = collocation_grid(p.domain, counts);
    std::vector<double> rhs(static_cast<size_t>(n) * static_cast<size_t>(n));
    for (size_t q = 0; q < rhs.size(); ++q) {
      const double x = nodes[2 * q], y = nodes[2 * q + 1];
      // f = lap u* - k^2 u* for u* = sin(pi x) sin(pi y)
      rhs[q] = (-2.0 * pi * pi - k * k) * std::sin(pi * x) * std::sin(pi * y);
    }
    const GridField g = solve_helmholtz_fd_rhs(p, n, rhs);
    return max_abs_diff(g.values, star_field(n));
  };

  const double e41 = solve_error(41);
  const double e81 = solve_error(81);
  const double ratio = e41 / e81;
  CHECK(ratio > 3.2);
  CHECK(ratio < 4.8);
}

TEST_CASE("centered gaussian source gives a symmetric solution") {
  const ProblemSpec p = make_helmholtz2d(6.0, 0.15);
  const GridField g = solve_helmholtz_fd(p, 61);
  double worst = 0.0;
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      worst = std::max(worst, std::abs(g.at(i, j) - g.at(j, i)));                  // x1 <-> x2
      worst = std::max(worst, std::abs(g.at(i, j) - g.at(g.n - 1 - i, j)));        // reflection
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("discrete residual of the returned field is tiny") {
  const ProblemSpec p = make_helmholtz2d(12.0, 0.08);
  const int n = 81;
  const GridField g = solve_helmholtz_fd(p, n);
  const double h = g.h;

  std::vector<int> counts = {n, n};
  const std::vector<double> nodes = collocation_grid(p.domain, counts);
  double res = 0.0, fnorm = 0.0;
  for (int i = 1; i < n - 1; ++i) {
    for (int j = 1; j < n - 1; ++j) {
      const size_t q = static_cast<size_t>(i) * static_cast<size_t>(n) + static_cast<size_t>(j);
      const double f = source(p, std::span<const double>(nodes).subspan(q * 2, 2));
      const double lap = (g.at(i + 1, j) + g.at(i - 1, j) + g.at(i, j + 1) + g.at(i, j - 1) -
                          4.0 * g.at(i, j)) /
                         (h * h);
      const double r = lap - p.k * p.k * g.at(i, j) - f;
      res += r * r;
      fnorm += f * f;
    }
  }
  CHECK(std::sqrt(res) / std::sqrt(fnorm) < 1e-8);
}

TEST_CASE("resonant wave number with the plus convention is rejected") {
  // with +k^2 the system is singular when k^2 matches a discrete eigenvalue
  const int n = 21;
  const double h = 1.0 / (n - 1);
  const double lambda =
      (4.0 - 2.0 * std::cos(std::numbers::pi * h) - 2.0 * std::cos(std::numbers::pi * h)) /
      (h * h);
  const ProblemSpec p = make_helmholtz2d(std::sqrt(lambda), 0.1, HelmholtzSign::Plus);
  CHECK_THROWS(solve_helmholtz_fd(p, n));
}

TEST_CASE("grid nodes follow the collocation ordering") {
  const ProblemSpec p = make_helmholtz2d(5.0, 0.2);
  const std::vector<double> rhs(3 * 3, 0.0);
  const GridField g = solve_helmholtz_fd_rhs(p, 3, rhs);

  std::vector<double> points, values;
  sample_grid_nodes(g, points, values);
  REQUIRE(points.size() == 9 * 2);
  CHECK(points[0] == 0.0);
  CHECK(points[1] == 0.0);
  CHECK(points[16] == 1.0);
  CHECK(points[17] == 1.0);

  std::vector<int> counts = {3, 3};
  CHECK(points == collocation_grid(unit_box(2), counts));
  for (double v : values) CHECK(v == 0.0);
}

TEST_CASE("grid file round trip is exact") {
  const ProblemSpec p = make_helmholtz2d(9.0, 0.12);
  const GridField g = solve_helmholtz_fd(p, 21);

  std::stringstream ss;
  write_grid(ss, g);
  const GridField back = read_grid(ss);
  CHECK(back.n == g.n);
  CHECK(back.h == g.h);
  CHECK(back.k == g.k);
  CHECK(back.sigma == g.sigma);
  CHECK(back.values == g.values);
}
