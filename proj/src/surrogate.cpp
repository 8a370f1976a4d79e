#include "ddpce/surrogate.hpp"

#include <fstream>

#include "ddpce/error.hpp"

namespace ddpce::surrogate {

SurrogateModel::SurrogateModel(basis::MultivariateBasis basis, regression::FitResult fit)
    : basis_(std::move(basis)), fit_(std::move(fit)) {
  if (static_cast<std::size_t>(fit_.coefficients.size()) != basis_.size())
    throw Error(ErrorKind::Config, "coefficient count " + std::to_string(fit_.coefficients.size()) +
                                       " does not match basis size " + std::to_string(basis_.size()));
  if (!fit_.coefficients.allFinite()) throw Error(ErrorKind::Config, "surrogate coefficients are not finite");
}

double SurrogateModel::predict(std::span<const double> x) const {
  return basis_.evaluate(x).dot(fit_.coefficients);
}

Predictions SurrogateModel::predict(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.cols()) != basis_.dim())
    throw Error(ErrorKind::Config, "points have " + std::to_string(x.cols()) + " coordinates, surrogate expects " +
                                       std::to_string(basis_.dim()));
  if (!x.allFinite()) throw Error(ErrorKind::Config, "prediction points must be finite");
  return kernels::parallel::predict(basis_, fit_.coefficients, x);
}

Moments analytic_moments(const SurrogateModel& model) {
  const auto& c = model.coefficients();
  // index 0 is the zero multi-index in canonical order
  return {c(0), c.tail(c.size() - 1).squaredNorm()};
}

Predictions sample_output_distribution(const SurrogateModel& model, const sampling::InputSpec& spec,
                                       std::size_t m, std::uint64_t seed) {
  return model.predict(sampling::draw_samples(spec, m, seed).x());
}

void save_surrogate(const SurrogateModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write surrogate file " + path.string());
  regression::write_fit(model.fit(), out);
  basis::write_basis(model.basis(), out);
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

SurrogateModel load_surrogate(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open surrogate file " + path.string());
  auto fit = regression::read_fit(in);
  auto b = basis::read_basis(in);
  return SurrogateModel(std::move(b), std::move(fit));
}

}  // namespace ddpce::surrogate
