#include "ddpce/kernels.hpp"

#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ddpce::kernels {
namespace {

using Index = Eigen::Index;

struct RowScratch {
  std::vector<double> point;
  std::vector<double> values;
  std::vector<double> tables;

  RowScratch(const basis::MultivariateBasis& b)
      : point(b.dim()), values(b.size()), tables(b.scratch_size()) {}
};

void design_row(const basis::MultivariateBasis& basis, const Eigen::MatrixXd& x, Index i,
                RowScratch& s, Eigen::MatrixXd& out) {
  for (Index j = 0; j < x.cols(); ++j) s.point[static_cast<std::size_t>(j)] = x(i, j);
  basis.evaluate(s.point, s.values, s.tables);
  for (Index t = 0; t < out.cols(); ++t) out(i, t) = s.values[static_cast<std::size_t>(t)];
}

double leverage_row(const Eigen::MatrixXd& design, const Eigen::MatrixXd& lower, Index i,
                    Eigen::VectorXd& v) {
  v = design.row(i).transpose();
  lower.triangularView<Eigen::Lower>().solveInPlace(v);
  return v.squaredNorm();
}

double predict_row(const basis::MultivariateBasis& basis, const Eigen::VectorXd& coeffs,
                   const Eigen::MatrixXd& x, Index i, RowScratch& s, bool& outside) {
  for (Index j = 0; j < x.cols(); ++j) s.point[static_cast<std::size_t>(j)] = x(i, j);
  basis.evaluate(s.point, s.values, s.tables);
  outside = !basis.in_training_box(s.point);
  double acc = 0.0;
  for (std::size_t t = 0; t < s.values.size(); ++t) acc += coeffs(static_cast<Index>(t)) * s.values[t];
  return acc;
}

double function_row(const RowFunction& f, const Eigen::MatrixXd& x, Index i, std::vector<double>& point) {
  for (Index j = 0; j < x.cols(); ++j) point[static_cast<std::size_t>(j)] = x(i, j);
  return f(point);
}

}  // namespace

namespace serial {

Eigen::MatrixXd assemble_design(const basis::MultivariateBasis& basis, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), static_cast<Index>(basis.size()));
  RowScratch s(basis);
  for (Index i = 0; i < x.rows(); ++i) design_row(basis, x, i, s, out);
  return out;
}

Eigen::VectorXd leverage(const Eigen::MatrixXd& design, const Eigen::MatrixXd& chol_lower) {
  Eigen::VectorXd k(design.rows());
  Eigen::VectorXd v;
  for (Index i = 0; i < design.rows(); ++i) k(i) = leverage_row(design, chol_lower, i, v);
  return k;
}

Predictions predict(const basis::MultivariateBasis& basis, const Eigen::VectorXd& coeffs,
                    const Eigen::MatrixXd& x) {
  Predictions p{Eigen::VectorXd(x.rows()), 0};
  RowScratch s(basis);
  for (Index i = 0; i < x.rows(); ++i) {
    bool outside = false;
    p.values(i) = predict_row(basis, coeffs, x, i, s, outside);
    p.extrapolated += outside ? 1 : 0;
  }
  return p;
}

Eigen::VectorXd evaluate_rows(const RowFunction& f, const Eigen::MatrixXd& x) {
  Eigen::VectorXd y(x.rows());
  std::vector<double> point(static_cast<std::size_t>(x.cols()));
  for (Index i = 0; i < x.rows(); ++i) y(i) = function_row(f, x, i, point);
  return y;
}

}  // namespace serial

namespace parallel {

Eigen::MatrixXd assemble_design(const basis::MultivariateBasis& basis, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), static_cast<Index>(basis.size()));
#pragma omp parallel
  {
    RowScratch s(basis);
#pragma omp for schedule(static)
    for (Index i = 0; i < x.rows(); ++i) design_row(basis, x, i, s, out);
  }
  return out;
}

Eigen::VectorXd leverage(const Eigen::MatrixXd& design, const Eigen::MatrixXd& chol_lower) {
  Eigen::VectorXd k(design.rows());
#pragma omp parallel
  {
    Eigen::VectorXd v;
#pragma omp for schedule(static)
    for (Index i = 0; i < design.rows(); ++i) k(i) = leverage_row(design, chol_lower, i, v);
  }
  return k;
}

Predictions predict(const basis::MultivariateBasis& basis, const Eigen::VectorXd& coeffs,
                    const Eigen::MatrixXd& x) {
  Predictions p{Eigen::VectorXd(x.rows()), 0};
  std::size_t extrapolated = 0;
#pragma omp parallel reduction(+ : extrapolated)
  {
    RowScratch s(basis);
#pragma omp for schedule(static)
    for (Index i = 0; i < x.rows(); ++i) {
      bool outside = false;
      p.values(i) = predict_row(basis, coeffs, x, i, s, outside);
      extrapolated += outside ? 1 : 0;
    }
  }
  p.extrapolated = extrapolated;
  return p;
}

Eigen::VectorXd evaluate_rows(const RowFunction& f, const Eigen::MatrixXd& x) {
  Eigen::VectorXd y(x.rows());
#pragma omp parallel
  {
    std::vector<double> point(static_cast<std::size_t>(x.cols()));
#pragma omp for schedule(static)
    for (Index i = 0; i < x.rows(); ++i) y(i) = function_row(f, x, i, point);
  }
  return y;
}

}  // namespace parallel

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace ddpce::kernels
