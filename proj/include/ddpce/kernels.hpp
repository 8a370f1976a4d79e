#pragma once

// Row-parallel kernels. Each `parallel::` kernel has a `serial::` twin that
// runs the same per-row arithmetic in a plain loop; results are bitwise
// identical for any thread count.

#include <cstddef>
#include <functional>
#include <span>

#include <Eigen/Dense>

#include "ddpce/basis.hpp"

namespace ddpce::kernels {

using RowFunction = std::function<double(std::span<const double>)>;

struct Predictions {
  Eigen::VectorXd values;
  std::size_t extrapolated = 0;  // points outside the per-dimension training range
};

namespace serial {

Eigen::MatrixXd assemble_design(const basis::MultivariateBasis& basis, const Eigen::MatrixXd& x);
/// K_i = || L^{-1} psi_i ||^2 for every row psi_i of `design`, L lower triangular.
Eigen::VectorXd leverage(const Eigen::MatrixXd& design, const Eigen::MatrixXd& chol_lower);
Predictions predict(const basis::MultivariateBasis& basis, const Eigen::VectorXd& coeffs,
                    const Eigen::MatrixXd& x);
Eigen::VectorXd evaluate_rows(const RowFunction& f, const Eigen::MatrixXd& x);

}  // namespace serial

namespace parallel {

Eigen::MatrixXd assemble_design(const basis::MultivariateBasis& basis, const Eigen::MatrixXd& x);
Eigen::VectorXd leverage(const Eigen::MatrixXd& design, const Eigen::MatrixXd& chol_lower);
Predictions predict(const basis::MultivariateBasis& basis, const Eigen::VectorXd& coeffs,
                    const Eigen::MatrixXd& x);
/// `f` must be safe to call concurrently.
Eigen::VectorXd evaluate_rows(const RowFunction& f, const Eigen::MatrixXd& x);

}  // namespace parallel

int max_threads();

}  // namespace ddpce::kernels
