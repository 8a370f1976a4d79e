// ddpce: data-driven polynomial chaos experiments from the command line.
//
//   ddpce run    --config exp.cfg [--out DIR] [--seed-override S]
//   ddpce sample --config exp.cfg --m M --out samples.csv [--seed S] [--evaluate]
//   ddpce basis  --samples train.csv --degree P --out basis.txt
//   ddpce fit    --samples train.csv --degree P --out model.txt [--scheme S]
//                [--basis basis.txt] [--sparse-terms K] [--sparse-eps E]
//                [--predict points.csv --predictions out.csv]
//
// Failures print one line `error kind=<kind> message=<text>` on stderr and
// exit with status 1.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ddpce/basis.hpp"
#include "ddpce/error.hpp"
#include "ddpce/harness.hpp"
#include "ddpce/regression.hpp"
#include "ddpce/sampling.hpp"
#include "ddpce/surrogate.hpp"
#include "ddpce/text.hpp"

namespace {

using namespace ddpce;

int run_cmd(const std::string& config_path, const std::string& out, std::optional<std::uint64_t> seed) {
  auto config = harness::load_config(config_path);
  if (seed) config.override_seed(*seed);
  if (!out.empty()) config.out_dir = out;
  const auto report = harness::run_experiment(config);
  harness::emit_report(report, config.out_dir);

  std::cout << "unweighted score_lr " << text::format_short(report.score_lr) << " (N = " << report.n_terms
            << ", M = " << config.m_train << ")\n";
  for (const auto& r : report.rows) {
    if (r.error) {
      std::cout << r.label << "  failed: " << *r.error << '\n';
      continue;
    }
    std::cout << r.label << "  p5 " << text::format_short(r.p5_dev) << "%  p95 " << text::format_short(r.p95_dev)
              << "%  mean " << text::format_short(r.mean_dev) << "%  std " << text::format_short(r.std_dev)
              << "%  score_w " << text::format_short(r.score_lr_weighted) << '\n';
  }
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "wrote " << (config.out_dir / "table.csv").string() << '\n';
  return 0;
}

int sample_cmd(const std::string& config_path, std::size_t m, std::optional<std::uint64_t> seed, bool evaluate,
               const std::string& out) {
  const auto config = harness::load_config(config_path);
  auto samples = sampling::draw_samples(config.inputs, m, seed.value_or(config.seed_train));
  if (evaluate) {
    samples = samples.with_response(kernels::parallel::evaluate_rows(harness::ground_truth(config), samples.x()));
  }
  sampling::save_samples(samples, out);
  return 0;
}

int basis_cmd(const std::string& samples_path, int degree, const std::string& out) {
  const auto samples = sampling::load_samples(samples_path);
  basis::save_basis(basis::build_multivariate(samples, degree), out);
  return 0;
}

int fit_cmd(const std::string& samples_path, int degree, const std::string& scheme_text,
            const std::string& basis_path, std::optional<std::size_t> sparse_terms,
            std::optional<double> sparse_eps, const std::string& out, const std::string& predict_path,
            const std::string& predictions_out) {
  const auto train = sampling::load_samples(samples_path);
  if (!train.y()) throw Error(ErrorKind::Config, samples_path + " has no y column to fit");
  const auto scheme = regression::Scheme::parse(scheme_text);
  auto b = basis_path.empty() ? basis::build_multivariate(train, degree) : basis::load_basis(basis_path);
  const auto design = regression::assemble_design(b, train);
  const bool sparse = sparse_terms || sparse_eps || design.rows() < design.cols();
  auto fr = sparse ? regression::sparse_fit(design, *train.y(), scheme, {sparse_terms, sparse_eps})
                   : regression::fit(design, *train.y(), scheme);
  const surrogate::SurrogateModel model(std::move(b), std::move(fr));
  surrogate::save_surrogate(model, out);

  const auto moments = surrogate::analytic_moments(model);
  std::cout << "scheme " << scheme.label() << "  N " << model.basis().size() << "  active "
            << model.fit().active_set.size() << "  score_lr " << text::format_short(model.fit().diagnostics.score_lr)
            << "  score_lr_weighted " << text::format_short(model.fit().weighted.score_lr) << "  mean "
            << text::format_short(moments.mean) << "  variance " << text::format_short(moments.variance) << '\n';

  if (!predict_path.empty()) {
    const auto points = sampling::load_samples(predict_path);
    const auto pred = model.predict(points.x());
    sampling::save_samples(points.with_response(pred.values), predictions_out.empty() ? "predictions.csv" : predictions_out);
    if (pred.extrapolated > 0)
      std::cerr << "warning: " << pred.extrapolated << " prediction points lie outside the training range\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven polynomial chaos with tempered Christoffel-weighted regression"};
  app.require_subcommand(1);

  std::string config_path, out;
  std::optional<std::uint64_t> seed_override;

  auto* run = app.add_subcommand("run", "Full experiment: MC reference, surrogate sweep, reports");
  run->add_option("--config", config_path, "Experiment config (key = value)")->required();
  run->add_option("--out", out, "Output directory (overrides the config)");
  run->add_option("--seed-override", seed_override, "Training seed; the reference uses seed + 1");

  std::size_t m = 0;
  bool evaluate = false;
  std::string sample_out;
  auto* sample = app.add_subcommand("sample", "Draw input samples from a config's input spec");
  sample->add_option("--config", config_path, "Experiment config")->required();
  sample->add_option("--m", m, "Number of samples")->required()->check(CLI::PositiveNumber);
  sample->add_option("--seed,--seed-override", seed_override, "Seed (default: seed.train)");
  sample->add_flag("--evaluate", evaluate, "Append the model response as column y");
  sample->add_option("--out", sample_out, "Output CSV")->required();

  std::string samples_path, basis_out;
  int degree = 3;
  auto* basis_sub = app.add_subcommand("basis", "Build and export a data-driven basis");
  basis_sub->add_option("--samples", samples_path, "Sample CSV")->required();
  basis_sub->add_option("--degree", degree, "Total degree")->check(CLI::NonNegativeNumber);
  basis_sub->add_option("--out", basis_out, "Basis file")->required();

  std::string scheme = "ols", basis_in, fit_out, predict_path, predictions_out;
  std::optional<std::size_t> sparse_terms;
  std::optional<double> sparse_eps;
  auto* fit = app.add_subcommand("fit", "Fit one surrogate from a CSV with a y column");
  fit->add_option("--samples", samples_path, "Training CSV")->required();
  fit->add_option("--degree", degree, "Total degree")->check(CLI::NonNegativeNumber);
  fit->add_option("--scheme", scheme, "ols | cls | tempered:<alpha>");
  fit->add_option("--basis", basis_in, "Use an exported basis instead of building one");
  fit->add_option("--sparse-terms", sparse_terms, "Forward selection: maximum active terms");
  fit->add_option("--sparse-eps", sparse_eps, "Forward selection: relative residual target");
  fit->add_option("--out", fit_out, "Surrogate file")->required();
  fit->add_option("--predict", predict_path, "CSV of points to evaluate");
  fit->add_option("--predictions", predictions_out, "Where to write predictions (default predictions.csv)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_cmd(config_path, out, seed_override);
    if (sample->parsed()) return sample_cmd(config_path, m, seed_override, evaluate, sample_out);
    if (basis_sub->parsed()) return basis_cmd(samples_path, degree, basis_out);
    if (fit->parsed())
      return fit_cmd(samples_path, degree, scheme, basis_in, sparse_terms, sparse_eps, fit_out, predict_path,
                     predictions_out);
  } catch (const ddpce::Error& e) {
    std::cerr << "error kind=" << ddpce::to_string(e.kind()) << " message=" << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error kind=internal message=" << e.what() << '\n';
    return 1;
  }
  return 1;
}
