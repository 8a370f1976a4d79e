#pragma once

#include <cstdint>
#include <filesystem>
#include <span>

#include <Eigen/Dense>

#include "ddpce/basis.hpp"
#include "ddpce/kernels.hpp"
#include "ddpce/regression.hpp"
#include "ddpce/sampling.hpp"

namespace ddpce::surrogate {

using kernels::Predictions;

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Fitted expansion sum_j c_j psi_j(x) bound to its basis.
class SurrogateModel {
 public:
  SurrogateModel(basis::MultivariateBasis basis, regression::FitResult fit);

  const basis::MultivariateBasis& basis() const { return basis_; }
  const regression::FitResult& fit() const { return fit_; }
  const Eigen::VectorXd& coefficients() const { return fit_.coefficients; }

  double predict(std::span<const double> x) const;
  /// One prediction per row; also counts rows outside the training box.
  Predictions predict(const Eigen::MatrixXd& x) const;

 private:
  basis::MultivariateBasis basis_;
  regression::FitResult fit_;
};

/// Mean and variance under the empirical training measure:
/// mean = c_0, variance = sum_{nu != 0} c_nu^2.
Moments analytic_moments(const SurrogateModel& model);

Predictions sample_output_distribution(const SurrogateModel& model, const sampling::InputSpec& spec,
                                       std::size_t m, std::uint64_t seed);

/// Fit block followed by the basis block, in one file.
void save_surrogate(const SurrogateModel& model, const std::filesystem::path& path);
SurrogateModel load_surrogate(const std::filesystem::path& path);

}  // namespace ddpce::surrogate
