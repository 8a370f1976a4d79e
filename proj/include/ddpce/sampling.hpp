#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace ddpce::sampling {

struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};

struct Normal {
  double mean = 0.0;
  double std = 1.0;
};

struct DiscreteUniform {
  std::vector<double> values;
};

// Resamples (with replacement) the values of one column of a sample CSV.
struct Empirical {
  std::filesystem::path path;
  std::size_t column = 0;
  std::vector<double> values;
};

using Distribution = std::variant<Uniform, Normal, DiscreteUniform, Empirical>;

struct InputSpec {
  std::vector<Distribution> dims;

  std::size_t dim() const { return dims.size(); }
  void validate() const;
};

/// Parses one descriptor: `uniform LO HI`, `normal MEAN STD`,
/// `discrete V1 V2 ...`, `discrete_range A B` (integers A..B) or
/// `empirical PATH [COLUMN]` (COLUMN is 1-based, default 1).
Distribution parse_distribution(std::string_view text);
std::string describe(const Distribution& dist);

/// M realizations in d dimensions (one row per realization) and an optional
/// paired response. Immutable once constructed.
class SampleSet {
 public:
  SampleSet(Eigen::MatrixXd x, std::optional<Eigen::VectorXd> y = std::nullopt,
            std::optional<std::uint64_t> seed = std::nullopt);

  std::size_t size() const { return static_cast<std::size_t>(x_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(x_.cols()); }
  const Eigen::MatrixXd& x() const { return x_; }
  const std::optional<Eigen::VectorXd>& y() const { return y_; }
  const std::optional<std::uint64_t>& seed() const { return seed_; }

  SampleSet with_response(Eigen::VectorXd y) const;

 private:
  Eigen::MatrixXd x_;
  std::optional<Eigen::VectorXd> y_;
  std::optional<std::uint64_t> seed_;
};

/// Seed of the substream used for dimension `dim`. Depends only on
/// (seed, dim), so appending a dimension leaves earlier columns unchanged.
std::uint64_t substream_seed(std::uint64_t seed, std::size_t dim);

SampleSet draw_samples(const InputSpec& spec, std::size_t m, std::uint64_t seed);

SampleSet load_samples(const std::filesystem::path& path);
void save_samples(const SampleSet& samples, const std::filesystem::path& path);

}  // namespace ddpce::sampling
