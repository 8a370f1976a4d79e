#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ddpce/kernels.hpp"
#include "ddpce/metrics.hpp"
#include "ddpce/models.hpp"
#include "ddpce/regression.hpp"
#include "ddpce/sampling.hpp"

namespace ddpce::harness {

inline constexpr const char* kVersion = "0.1.0";

struct SparseSettings {
  bool enabled = false;
  std::optional<std::size_t> max_terms;
  std::optional<double> rel_residual;
};

struct ExperimentConfig {
  sampling::InputSpec inputs;
  std::string model = "dispatch";
  models::DispatchConfig dispatch = models::DispatchConfig::illustrative();
  std::size_t m_train = 100;
  std::size_t m_ref = 100000;
  int degree = 3;
  std::vector<regression::Scheme> cases;
  SparseSettings sparse;
  std::uint64_t seed_train = 1;
  std::uint64_t seed_reference = 2;
  std::filesystem::path out_dir = "results";
  std::optional<double> stability_threshold;
  std::vector<double> quantile_levels = {0.05, 0.95};
  std::size_t max_terms = basis::kDefaultMaxTerms;

  void validate() const;
  /// train = seed, reference = seed + 1.
  void override_seed(std::uint64_t seed);
};

/// key = value lines; `#` starts a comment. Relative empirical-input paths
/// resolve against `base_dir`.
ExperimentConfig parse_config(std::istream& is, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Ground truth for the configured model; safe to call concurrently.
kernels::RowFunction ground_truth(const ExperimentConfig& config);

struct DeviationRow {
  std::string label;
  regression::Scheme scheme = regression::Scheme::ols();
  double p5_dev = 0.0;
  double p95_dev = 0.0;
  double mean_dev = 0.0;
  double std_dev = 0.0;
  double score_lr = 0.0;           // unweighted design, same for every row
  double score_lr_weighted = 0.0;  // from the Christoffel values of G_w
  double cond_gram_weighted = 0.0;
  std::size_t active_terms = 0;
  std::size_t extrapolated = 0;
  metrics::DistributionSummary surrogate;
  std::optional<std::string> error;
};

struct ExperimentReport {
  ExperimentConfig config;
  metrics::DistributionSummary reference;
  std::vector<DeviationRow> rows;
  std::size_t n_terms = 0;
  bool sparse_planned = false;
  double score_lr = 0.0;  // unweighted, NaN if G is singular
  double kappa = 0.0;
  double gram_condition = 0.0;
  std::vector<std::string> warnings;
};

ExperimentReport run_experiment(const ExperimentConfig& config);

/// Writes table.csv, curves.csv and meta.txt into `dir` (created if needed).
void emit_report(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace ddpce::harness
