#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ddpce/sampling.hpp"

namespace ddpce::basis {

/// Raw empirical moments mu_r = (1/M) sum x_i^r for r = 0..max_order.
/// mu_0 is exactly 1.
Eigen::VectorXd empirical_moments(std::span<const double> samples, int max_order);

/// Affine map to zero mean / unit (population) variance. A constant sample
/// keeps scale 1.
struct Standardization {
  double shift = 0.0;
  double scale = 1.0;

  static Standardization fit(std::span<const double> samples);
  double operator()(double x) const { return (x - shift) / scale; }
};

/// Polynomials phi_0..phi_p orthonormal under the empirical measure of the
/// samples they were built from. Stored as monomial coefficients in the
/// standardized variable z; `monomial_coefficients()` composes them back to
/// the original coordinate.
class UnivariateBasis {
 public:
  UnivariateBasis(Standardization map, Eigen::MatrixXd standardized_coeffs,
                  Eigen::VectorXd source_moments, double lo, double hi);

  int degree() const { return static_cast<int>(coeffs_.rows()) - 1; }
  const Standardization& standardization() const { return map_; }
  /// Row k: coefficients of phi_k in powers of z (lower triangular).
  const Eigen::MatrixXd& standardized_coefficients() const { return coeffs_; }
  /// Row k: coefficients of phi_k in powers of the original x.
  Eigen::MatrixXd monomial_coefficients() const;
  const Eigen::VectorXd& source_moments() const { return moments_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  double value(int k, double x) const;
  /// Writes phi_0(x)..phi_{out.size()-1}(x); out.size() <= degree()+1.
  void evaluate(double x, std::span<double> out) const;

 private:
  Standardization map_;
  Eigen::MatrixXd coeffs_;
  Eigen::VectorXd moments_;
  double lo_;
  double hi_;
};

/// Reference construction: two-pass modified Gram-Schmidt over the Krylov
/// vectors z*phi_{k-1} evaluated on the samples. Throws RankDeficient when
/// the samples have fewer than p+1 distinct values.
UnivariateBasis build_univariate(std::span<const double> samples, int p);

/// Cross-check route: monic Stieltjes recurrence driven only by the
/// empirical moments of the standardized samples, then normalized.
/// Returns coefficients in powers of z, comparable with
/// `UnivariateBasis::standardized_coefficients()`.
Eigen::MatrixXd stieltjes_coefficients(std::span<const double> samples, int p);

struct MultiIndexSet {
  std::size_t dim = 0;
  int total_degree = 0;
  std::vector<std::vector<int>> indices;

  std::size_t size() const { return indices.size(); }
};

inline constexpr std::size_t kDefaultMaxTerms = 200000;

/// Total-degree set, ordered by total degree then descending lexicographic
/// order, so (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...
MultiIndexSet build_multi_index(std::size_t d, int p, std::size_t max_terms = kDefaultMaxTerms);

/// Number of total-degree terms C(d+p, p); saturates at SIZE_MAX.
std::size_t total_degree_count(std::size_t d, int p);

class MultivariateBasis {
 public:
  MultivariateBasis(std::vector<UnivariateBasis> dims, MultiIndexSet index);

  std::size_t dim() const { return dims_.size(); }
  std::size_t size() const { return index_.size(); }
  const std::vector<UnivariateBasis>& dims() const { return dims_; }
  const MultiIndexSet& index() const { return index_; }

  /// psi_nu(x) = prod_j phi_{nu_j}(x_j) for every nu in the index set.
  /// `scratch` must hold sum_j (degree_j + 1) doubles.
  void evaluate(std::span<const double> x, std::span<double> out, std::span<double> scratch) const;
  Eigen::VectorXd evaluate(std::span<const double> x) const;
  std::size_t scratch_size() const;

  bool in_training_box(std::span<const double> x) const;

 private:
  std::vector<UnivariateBasis> dims_;
  MultiIndexSet index_;
  std::vector<std::size_t> offsets_;
};

/// Univariate bases of degree p on each input column, total-degree index set.
MultivariateBasis build_multivariate(const sampling::SampleSet& samples, int p,
                                     std::size_t max_terms = kDefaultMaxTerms);

void write_basis(const MultivariateBasis& basis, std::ostream& os);
MultivariateBasis read_basis(std::istream& is);
void save_basis(const MultivariateBasis& basis, const std::filesystem::path& path);
MultivariateBasis load_basis(const std::filesystem::path& path);

}  // namespace ddpce::basis
