#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ddpce/basis.hpp"
#include "ddpce/sampling.hpp"

namespace ddpce::regression {

/// Psi with Psi(i, j) = psi_j(x_i).
struct DesignMatrix {
  Eigen::MatrixXd psi;

  std::size_t rows() const { return static_cast<std::size_t>(psi.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(psi.cols()); }
};

/// Sample weighting. OLS and CLS are the exponents 0 and -1 of the tempered
/// family w_i ∝ K_i^alpha and run through the same code path.
class Scheme {
 public:
  enum class Kind { Ols, Cls, Tempered };

  static Scheme ols() { return Scheme(Kind::Ols, 0.0); }
  static Scheme cls() { return Scheme(Kind::Cls, -1.0); }
  static Scheme tempered(double alpha) { return Scheme(Kind::Tempered, alpha); }
  /// "ols", "cls", or "tempered:<alpha>".
  static Scheme parse(const std::string& text);

  Kind kind() const { return kind_; }
  double exponent() const { return exponent_; }
  std::string label() const;

 private:
  Scheme(Kind kind, double exponent) : kind_(kind), exponent_(exponent) {}
  Kind kind_;
  double exponent_;
};

struct ChristoffelDiagnostics {
  Eigen::VectorXd leverage;  // K_i
  double kappa = 0.0;        // max K_i
  double gram_condition = 0.0;
  double score_lr = 0.0;     // M / (kappa ln M)
  double min_pivot = 0.0;    // smallest Cholesky pivot of G
};

/// Same quantities on the weighted Gram G_w: K~_i = psi_i^T G_w^{-1} psi_i,
/// score M / (max K~ ln M).
struct WeightedDiagnostics {
  double gram_condition = 0.0;
  double kappa = 0.0;
  double score_lr = 0.0;
};

struct WeightVector {
  Eigen::VectorXd w;
  Scheme scheme = Scheme::ols();
};

struct FitResult {
  Eigen::VectorXd coefficients;
  ChristoffelDiagnostics diagnostics;
  WeightedDiagnostics weighted;
  WeightVector weights;
  double residual_rms = 0.0;  // sqrt((1/M) sum w_i r_i^2)
  std::vector<std::size_t> active_set;
};

struct SparseTarget {
  std::optional<std::size_t> max_terms;
  std::optional<double> rel_residual;  // stop once ||r_w|| <= eps ||y_w||
};

/// Design matrix assembly over rows uses the OpenMP kernel.
DesignMatrix assemble_design(const basis::MultivariateBasis& basis, const sampling::SampleSet& samples);

/// (1/M) Psi^T W Psi, symmetrized. An empty weight vector means W = I.
Eigen::MatrixXd gram(const DesignMatrix& design, const Eigen::VectorXd& weights = {});

/// Symmetric-matrix condition number from the extreme eigenvalues
/// (infinity when the smallest is not positive).
double condition_number(const Eigen::MatrixXd& sym);

/// Natural log is used for the score; M = 1 gives +inf.
double stability_score(std::size_t m, double kappa);

ChristoffelDiagnostics christoffel(const DesignMatrix& design);
WeightedDiagnostics weighted_diagnostics(const DesignMatrix& design, const Eigen::VectorXd& weights);

WeightVector weights(const ChristoffelDiagnostics& diag, const Scheme& scheme);

FitResult fit(const DesignMatrix& design, const Eigen::VectorXd& y, const Scheme& scheme);

/// Greedy forward selection (orthogonal matching pursuit) on the weighted
/// residual. Equal correlations resolve to the lowest basis index.
FitResult sparse_fit(const DesignMatrix& design, const Eigen::VectorXd& y, const Scheme& scheme,
                     const SparseTarget& target);

/// Text form of a fit; the per-sample vectors (K, w) are not persisted.
void write_fit(const FitResult& fit, std::ostream& os);
FitResult read_fit(std::istream& is);

}  // namespace ddpce::regression
