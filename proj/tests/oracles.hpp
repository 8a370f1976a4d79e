#pragma once

// Test-only reference computations. Nothing here calls the code paths it is
// used to check.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// Weighted least squares through the normal equations (1/M) Psi^T W Psi c =
/// (1/M) Psi^T W y, solved with a Cholesky factorization.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& psi, const Eigen::VectorXd& y,
                                        const Eigen::VectorXd& w) {
  const double m = static_cast<double>(psi.rows());
  const Eigen::MatrixXd g = psi.transpose() * w.asDiagonal() * psi / m;
  const Eigen::VectorXd rhs = psi.transpose() * w.cwiseProduct(y) / m;
  return g.llt().solve(rhs);
}

/// Classical Gram-Schmidt of the raw monomials 1, x, ..., x^p under the
/// empirical inner product, carried out on coefficient vectors with explicit
/// sums. Returns rows of monomial coefficients in the original x.
inline Eigen::MatrixXd gram_schmidt_monomials(std::span<const double> xs, int p) {
  auto eval = [](const Eigen::VectorXd& c, double x) {
    double acc = 0.0;
    for (Eigen::Index r = c.size() - 1; r >= 0; --r) acc = acc * x + c(r);
    return acc;
  };
  auto inner = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double s = 0.0;
    for (double x : xs) s += eval(a, x) * eval(b, x);
    return s / static_cast<double>(xs.size());
  };
  std::vector<Eigen::VectorXd> rows;
  for (int k = 0; k <= p; ++k) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(p + 1, k);
    for (const auto& q : rows) v -= inner(v, q) * q;
    v /= std::sqrt(inner(v, v));
    rows.push_back(v);
  }
  Eigen::MatrixXd out(p + 1, p + 1);
  for (int k = 0; k <= p; ++k) out.row(k) = rows[static_cast<std::size_t>(k)].transpose();
  return out;
}

/// Orthonormal probabilists' Hermite polynomials He_k / sqrt(k!) from the
/// recurrence He_{k+1} = x He_k - k He_{k-1}; rows are monomial coefficients.
inline Eigen::MatrixXd hermite_orthonormal(int p) {
  Eigen::MatrixXd he = Eigen::MatrixXd::Zero(p + 1, p + 1);
  he(0, 0) = 1.0;
  if (p >= 1) he(1, 1) = 1.0;
  for (int k = 1; k < p; ++k) {
    for (int r = 1; r <= k + 1; ++r) he(k + 1, r) += he(k, r - 1);
    he.row(k + 1) -= k * he.row(k - 1);
  }
  double fact = 1.0;
  for (int k = 0; k <= p; ++k) {
    if (k > 0) fact *= k;
    he.row(k) /= std::sqrt(fact);
  }
  return he;
}

/// Minimum of sum_k penalty_k * shed_k over every vertex of the per-hour LP:
/// each vertex serves the levels in some fill order, so enumerate all orders.
inline double lp_min_shed_cost(std::vector<double> demand, std::vector<double> penalty, double supply) {
  std::vector<std::size_t> order(demand.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  double best = INFINITY;
  do {
    double remaining = std::max(supply, 0.0);
    double cost = 0.0;
    for (std::size_t k : order) {
      const double served = std::min(demand[k], remaining);
      remaining -= served;
      cost += penalty[k] * (demand[k] - served);
    }
    best = std::min(best, cost);
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

/// Random design with a ones column and Gaussian remaining columns.
inline Eigen::MatrixXd random_design(std::mt19937_64& rng, Eigen::Index m, Eigen::Index n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd psi(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    psi(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < n; ++j) psi(i, j) = g(rng);
  }
  return psi;
}

}  // namespace oracle
