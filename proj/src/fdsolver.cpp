#include "fbpinn/fdsolver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fbpinn/textio.hpp"
#include "fbpinn/training.hpp"

namespace fbpinn {

GridField solve_helmholtz_fd_rhs(const ProblemSpec& p, int n, const std::vector<double>& rhs) {
  if (p.id != ProblemId::Helmholtz2d) {
    throw std::invalid_argument("fd solver: helmholtz2d problem expected");
  }
  if (n < 3) throw std::invalid_argument("fd solver: need n >= 3");
  if (rhs.size() != static_cast<size_t>(n) * static_cast<size_t>(n)) {
    throw std::invalid_argument("fd solver: rhs size mismatch");
  }

  const int m = n - 1;
  const double h = 1.0 / static_cast<double>(m);
  const double inv_h2 = 1.0 / (h * h);
  const int ni = n - 2;  // interior nodes per dimension
  const double react = p.sign == HelmholtzSign::Minus ? -p.k * p.k : p.k * p.k;

  using Trip = Eigen::Triplet<double>;
  std::vector<Trip> trips;
  trips.reserve(static_cast<size_t>(ni) * static_cast<size_t>(ni) * 5);
  Eigen::VectorXd b(ni * ni);

  auto row_of = [ni](int i, int j) { return (i - 1) * ni + (j - 1); };
  for (int i = 1; i <= ni; ++i) {
    for (int j = 1; j <= ni; ++j) {
      const int r = row_of(i, j);
      trips.emplace_back(r, r, -4.0 * inv_h2 + react);
      if (i > 1) trips.emplace_back(r, row_of(i - 1, j), inv_h2);
      if (i < ni) trips.emplace_back(r, row_of(i + 1, j), inv_h2);
      if (j > 1) trips.emplace_back(r, row_of(i, j - 1), inv_h2);
      if (j < ni) trips.emplace_back(r, row_of(i, j + 1), inv_h2);
      b(r) = rhs[static_cast<size_t>(i) * static_cast<size_t>(n) + static_cast<size_t>(j)];
    }
  }

  Eigen::SparseMatrix<double> A(ni * ni, ni * ni);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
  solver.compute(A);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("fd solver: factorization failed (system near-singular)");
  }
  Eigen::VectorXd u = solver.solve(b);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("fd solver: solve failed (system near-singular)");
  }

  const double b_norm = b.norm();
  const double res = (A * u - b).norm();
  if (b_norm > 0.0 && !(res / b_norm < 1e-8)) {
    throw std::runtime_error("fd solver: discrete residual " + format_double(res / b_norm) +
                             " exceeds tolerance (system near-singular)");
  }

  GridField g;
  g.n = n;
  g.h = h;
  g.sign = p.sign;
  g.k = p.k;
  g.sigma = p.sigma_g;
  g.values.assign(static_cast<size_t>(n) * static_cast<size_t>(n), 0.0);
  for (int i = 1; i <= ni; ++i) {
    for (int j = 1; j <= ni; ++j) {
      g.values[static_cast<size_t>(i) * static_cast<size_t>(n) + static_cast<size_t>(j)] =
          u(row_of(i, j));
    }
  }
  return g;
}

GridField solve_helmholtz_fd(const ProblemSpec& p, int n) {
  std::vector<int> counts = {n, n};
  const std::vector<double> nodes = collocation_grid(p.domain, counts);
  std::vector<double> rhs(static_cast<size_t>(n) * static_cast<size_t>(n));
  for (size_t q = 0; q < rhs.size(); ++q) {
    rhs[q] = source(p, std::span<const double>(nodes).subspan(q * 2, 2));
  }
  return solve_helmholtz_fd_rhs(p, n, rhs);
}

void sample_grid_nodes(const GridField& g, std::vector<double>& points,
                       std::vector<double>& values) {
  std::vector<int> counts = {g.n, g.n};
  points = collocation_grid(unit_box(2), counts);
  values = g.values;
}

void write_grid(std::ostream& os, const GridField& g) {
  os << "n,h,sign_convention,k,sigma\n";
  os << g.n << "," << format_double(g.h) << ","
     << (g.sign == HelmholtzSign::Minus ? "minus" : "plus") << "," << format_double(g.k) << ","
     << format_double(g.sigma) << "\n";
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      if (j) os << " ";
      os << format_double(g.at(i, j));
    }
    os << "\n";
  }
}

GridField read_grid(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != "n,h,sign_convention,k,sigma") {
    throw std::runtime_error("grid file: bad header");
  }
  if (!std::getline(is, line)) throw std::runtime_error("grid file: truncated");
  std::vector<std::string> tok;
  {
    std::istringstream iss(line);
    std::string t;
    while (std::getline(iss, t, ',')) tok.push_back(std::string(trim(t)));
  }
  if (tok.size() != 5) throw std::runtime_error("grid file: bad header values");

  GridField g;
  g.n = static_cast<int>(parse_long(tok[0]));
  g.h = parse_double(tok[1]);
  if (tok[2] == "minus") {
    g.sign = HelmholtzSign::Minus;
  } else if (tok[2] == "plus") {
    g.sign = HelmholtzSign::Plus;
  } else {
    throw std::runtime_error("grid file: bad sign convention '" + tok[2] + "'");
  }
  g.k = parse_double(tok[3]);
  g.sigma = parse_double(tok[4]);

  g.values.reserve(static_cast<size_t>(g.n) * static_cast<size_t>(g.n));
  while (std::getline(is, line)) {
    std::istringstream iss(line);
    std::string t;
    while (iss >> t) g.values.push_back(parse_double(t));
  }
  if (g.values.size() != static_cast<size_t>(g.n) * static_cast<size_t>(g.n)) {
    throw std::runtime_error("grid file: value count mismatch");
  }
  return g;
}

}  // namespace fbpinn
