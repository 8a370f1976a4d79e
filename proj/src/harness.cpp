#include "ddpce/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <sstream>

#include "ddpce/basis.hpp"
#include "ddpce/error.hpp"
#include "ddpce/surrogate.hpp"
#include "ddpce/text.hpp"

namespace ddpce::harness {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

std::vector<double> number_list(std::string_view key, std::string_view value) {
  std::vector<double> out;
  for (auto tok : text::split(value, ',')) {
    const auto v = text::parse_finite(tok);
    if (!v) config_error(std::string(key) + ": invalid number '" + std::string(text::trim(tok)) + "'");
    out.push_back(*v);
  }
  return out;
}

std::size_t count_value(std::string_view key, std::string_view value) {
  const auto v = text::parse_int(value);
  if (!v || *v < 0) config_error(std::string(key) + " must be a non-negative integer");
  return static_cast<std::size_t>(*v);
}

std::uint64_t seed_value(std::string_view key, std::string_view value) {
  const auto v = text::parse_int(value);
  if (!v || *v < 0) config_error(std::string(key) + " must be a non-negative integer");
  return static_cast<std::uint64_t>(*v);
}

std::string csv_cell(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return out;
}

std::string num(double v) { return text::format_double(v); }

}  // namespace

void ExperimentConfig::validate() const {
  inputs.validate();
  if (model == "dispatch") {
    if (inputs.dim() != 3) config_error("dispatch model needs exactly 3 inputs (load_scale, start_hour, duration)");
    dispatch.validate();
  } else {
    const auto f = models::parse_test_function(model);
    if (inputs.dim() != models::arity(f))
      config_error("model '" + model + "' needs " + std::to_string(models::arity(f)) + " inputs");
  }
  if (m_train < 1) config_error("m_train must be positive");
  if (m_ref < 1) config_error("m_ref must be positive");
  if (degree < 0) config_error("degree must be non-negative");
  if (cases.empty()) config_error("no regression cases requested (set cases and/or alphas)");
  for (double q : quantile_levels)
    if (!(q > 0.0 && q < 1.0)) config_error("quantile levels must lie in (0, 1)");
}

void ExperimentConfig::override_seed(std::uint64_t seed) {
  seed_train = seed;
  seed_reference = seed + 1;
}

ExperimentConfig parse_config(std::istream& is, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  std::map<std::size_t, sampling::Distribution> inputs;
  std::vector<regression::Scheme> named_cases;
  std::vector<regression::Scheme> alpha_cases;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string_view body = text::trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) config_error("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key(text::trim(body.substr(0, eq)));
    const std::string_view value = text::trim(body.substr(eq + 1));
    try {
      if (key.rfind("input.", 0) == 0) {
        const auto j = text::parse_int(std::string_view(key).substr(6));
        if (!j || *j < 1) config_error("input keys are input.1, input.2, ...");
        std::string desc(value);
        auto tok = text::split_ws(desc);
        if (!tok.empty() && tok[0] == "empirical" && tok.size() >= 2) {
          std::filesystem::path p{std::string(tok[1])};
          if (p.is_relative()) p = base_dir / p;
          desc = "empirical " + p.string() + (tok.size() >= 3 ? " " + std::string(tok[2]) : "");
        }
        inputs[static_cast<std::size_t>(*j)] = sampling::parse_distribution(desc);
      } else if (key == "model") {
        c.model = std::string(value);
      } else if (key == "m_train") {
        c.m_train = count_value(key, value);
      } else if (key == "m_ref") {
        c.m_ref = count_value(key, value);
      } else if (key == "degree") {
        c.degree = static_cast<int>(count_value(key, value));
      } else if (key == "max_terms") {
        c.max_terms = count_value(key, value);
      } else if (key == "cases") {
        named_cases.clear();
        for (auto tok : text::split(value, ','))
          named_cases.push_back(regression::Scheme::parse(std::string(text::trim(tok))));
      } else if (key == "alphas") {
        alpha_cases.clear();
        for (double a : number_list(key, value)) alpha_cases.push_back(regression::Scheme::tempered(a));
      } else if (key == "sparse") {
        if (value == "on") c.sparse.enabled = true;
        else if (value == "off") c.sparse.enabled = false;
        else config_error("sparse must be on or off");
      } else if (key == "sparse.max_terms") {
        c.sparse.max_terms = count_value(key, value);
      } else if (key == "sparse.rel_residual") {
        c.sparse.rel_residual = number_list(key, value).at(0);
      } else if (key == "seed.train") {
        c.seed_train = seed_value(key, value);
      } else if (key == "seed.reference") {
        c.seed_reference = seed_value(key, value);
      } else if (key == "out") {
        c.out_dir = std::filesystem::path(std::string(value));
      } else if (key == "stability_threshold") {
        c.stability_threshold = number_list(key, value).at(0);
      } else if (key == "quantiles") {
        c.quantile_levels = number_list(key, value);
      } else if (key == "dispatch.horizon") {
        c.dispatch.horizon = static_cast<int>(count_value(key, value));
      } else if (key == "dispatch.levels") {
        c.dispatch.levels.clear();
        for (auto tok : text::split(value, ',')) {
          const auto parts = text::split(text::trim(tok), ':');
          const auto f = parts.size() == 2 ? text::parse_finite(parts[0]) : std::nullopt;
          const auto l = parts.size() == 2 ? text::parse_finite(parts[1]) : std::nullopt;
          if (!f || !l) config_error("dispatch.levels entries are fraction:penalty");
          c.dispatch.levels.push_back({*f, *l});
        }
      } else if (key == "dispatch.generation") {
        c.dispatch.generation = number_list(key, value);
      } else if (key == "dispatch.base_load") {
        c.dispatch.base_load = number_list(key, value);
      } else if (key == "dispatch.storage") {
        std::vector<double> s;
        for (auto tok : text::split_ws(value)) {
          const auto v = text::parse_finite(tok);
          if (!v) config_error("dispatch.storage: invalid number");
          s.push_back(*v);
        }
        if (s.size() != 4) config_error("dispatch.storage = capacity power_limit initial_level efficiency");
        c.dispatch.storage = {s[0], s[1], s[2], s[3]};
      } else {
        config_error("unknown key '" + key + "'");
      }
    } catch (const Error& e) {
      throw Error(e.kind(), "config line " + std::to_string(lineno) + ": " + e.what());
    }
  }

  std::size_t expect = 1;
  for (auto& [j, dist] : inputs) {
    if (j != expect) config_error("input." + std::to_string(expect) + " is missing");
    c.inputs.dims.push_back(std::move(dist));
    ++expect;
  }
  c.cases = std::move(named_cases);
  c.cases.insert(c.cases.end(), alpha_cases.begin(), alpha_cases.end());
  for (double q : {0.05, 0.95}) {
    if (std::find(c.quantile_levels.begin(), c.quantile_levels.end(), q) == c.quantile_levels.end())
      c.quantile_levels.push_back(q);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config file " + path.string());
  return parse_config(in, path.parent_path());
}

kernels::RowFunction ground_truth(const ExperimentConfig& config) {
  if (config.model == "dispatch") {
    auto dispatch = config.dispatch;
    return [dispatch](std::span<const double> x) { return models::eval_dispatch(dispatch, x).total_cost; };
  }
  const auto f = models::parse_test_function(config.model);
  return [f](std::span<const double> x) { return models::eval_test_function(f, x); };
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report;
  report.config = config;
  const auto truth = ground_truth(config);

  if (config.m_ref < 10 * config.m_train)
    report.warnings.push_back("m_ref < 10 * m_train; reference quantiles may be noisy relative to the fit");

  const auto ref_inputs = sampling::draw_samples(config.inputs, config.m_ref, config.seed_reference);
  const Eigen::VectorXd ref_y = kernels::parallel::evaluate_rows(truth, ref_inputs.x());
  report.reference = metrics::summarize(std::span<const double>(ref_y.data(), static_cast<std::size_t>(ref_y.size())),
                                        config.quantile_levels);

  const auto train_x = sampling::draw_samples(config.inputs, config.m_train, config.seed_train);
  const auto train = train_x.with_response(kernels::parallel::evaluate_rows(truth, train_x.x()));
  const auto basis = basis::build_multivariate(train, config.degree, config.max_terms);
  const auto design = regression::assemble_design(basis, train);
  report.n_terms = basis.size();
  report.sparse_planned = config.sparse.enabled || config.m_train < basis.size();
  if (!config.sparse.enabled && report.sparse_planned)
    report.warnings.push_back("m_train < N; switched to sparse selection");

  report.score_lr = kNaN;
  report.kappa = kNaN;
  report.gram_condition = kNaN;
  try {
    const auto diag = regression::christoffel(design);
    report.score_lr = diag.score_lr;
    report.kappa = diag.kappa;
    report.gram_condition = diag.gram_condition;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::IllConditioned) throw;
    report.warnings.push_back(std::string("unweighted Gram: ") + e.what());
  }
  if (config.stability_threshold && report.score_lr < *config.stability_threshold)
    report.warnings.push_back("unweighted score_lr below stability threshold " +
                              text::format_short(*config.stability_threshold));

  const regression::SparseTarget target{config.sparse.max_terms, config.sparse.rel_residual};
  for (const auto& scheme : config.cases) {
    DeviationRow row;
    row.label = scheme.label();
    row.scheme = scheme;
    row.score_lr = report.score_lr;
    try {
      auto fr = report.sparse_planned ? regression::sparse_fit(design, *train.y(), scheme, target)
                                      : regression::fit(design, *train.y(), scheme);
      row.score_lr_weighted = fr.weighted.score_lr;
      row.cond_gram_weighted = fr.weighted.gram_condition;
      row.active_terms = fr.active_set.size();
      const surrogate::SurrogateModel model(basis, std::move(fr));
      const auto pred = model.predict(ref_inputs.x());
      row.extrapolated = pred.extrapolated;
      row.surrogate = metrics::summarize(
          std::span<const double>(pred.values.data(), static_cast<std::size_t>(pred.values.size())),
          config.quantile_levels);
      row.p5_dev = metrics::percent_deviation(row.surrogate.q(0.05), report.reference.q(0.05));
      row.p95_dev = metrics::percent_deviation(row.surrogate.q(0.95), report.reference.q(0.95));
      row.mean_dev = metrics::percent_deviation(row.surrogate.mean, report.reference.mean);
      row.std_dev = metrics::percent_deviation(row.surrogate.std, report.reference.std);
    } catch (const Error& e) {
      row.error = row.label + ": " + to_string(e.kind()) + ": " + e.what();
      row.p5_dev = row.p95_dev = row.mean_dev = row.std_dev = kNaN;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

void emit_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create output directory " + dir.string() + ": " + ec.message());

  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + (dir / name).string());
    out << content;
    if (!out) throw Error(ErrorKind::Io, "write failed for " + (dir / name).string());
  };

  std::ostringstream table;
  table << "case,p5_dev,p95_dev,mean_dev,std_dev,score_lr,score_lr_weighted,cond_gram_weighted,status\n";
  for (const auto& r : report.rows) {
    table << r.label << ',' << num(r.p5_dev) << ',' << num(r.p95_dev) << ',' << num(r.mean_dev) << ','
          << num(r.std_dev) << ',' << num(r.score_lr) << ',' << num(r.score_lr_weighted) << ','
          << num(r.cond_gram_weighted) << ',' << (r.error ? csv_cell(*r.error) : "ok") << '\n';
  }
  write("table.csv", table.str());

  std::ostringstream curves;
  curves << "alpha,p5_dev,p95_dev,mean_dev,std_dev,score_lr,score_lr_weighted,cond_gram_weighted\n";
  for (const auto& r : report.rows) {
    if (r.scheme.kind() != regression::Scheme::Kind::Tempered) continue;
    curves << num(r.scheme.exponent()) << ',' << num(r.p5_dev) << ',' << num(r.p95_dev) << ','
           << num(r.mean_dev) << ',' << num(r.std_dev) << ',' << num(r.score_lr) << ','
           << num(r.score_lr_weighted) << ',' << num(r.cond_gram_weighted) << '\n';
  }
  write("curves.csv", curves.str());

  const auto& c = report.config;
  std::ostringstream meta;
  meta << "version = " << kVersion << '\n';
  meta << "model = " << c.model << '\n';
  for (std::size_t j = 0; j < c.inputs.dim(); ++j)
    meta << "input." << (j + 1) << " = " << sampling::describe(c.inputs.dims[j]) << '\n';
  meta << "seed.train = " << c.seed_train << '\n';
  meta << "seed.reference = " << c.seed_reference << '\n';
  meta << "rng = mt19937_64 per dimension, substream seed splitmix64(seed ^ splitmix64(dim + 1))\n";
  meta << "m_train = " << c.m_train << '\n';
  meta << "m_ref = " << c.m_ref << '\n';
  meta << "degree = " << c.degree << '\n';
  meta << "n_terms = " << report.n_terms << '\n';
  meta << "truncation = total degree\n";
  meta << "fit = " << (report.sparse_planned ? "sparse forward selection" : "full least squares (QR)") << '\n';
  meta << "score_lr = M / (kappa * ln M) on the unweighted Gram, natural log\n";
  meta << "score_lr_weighted = M / (max_i psi_i^T G_w^-1 psi_i * ln M)\n";
  meta << "quantile = linear interpolation of order statistics, h = (n - 1) * level\n";
  meta << "std = population (divide by n)\n";
  meta << "deviation = 100 * (surrogate - reference) / |reference|\n";
  meta << "unweighted.score_lr = " << num(report.score_lr) << '\n';
  meta << "unweighted.kappa = " << num(report.kappa) << '\n';
  meta << "unweighted.gram_condition = " << num(report.gram_condition) << '\n';
  if (c.stability_threshold) meta << "stability_threshold = " << num(*c.stability_threshold) << '\n';
  meta << "reference.mean = " << num(report.reference.mean) << '\n';
  meta << "reference.std = " << num(report.reference.std) << '\n';
  for (const auto& [level, value] : report.reference.quantiles)
    meta << "reference.q" << text::format_short(level) << " = " << num(value) << '\n';
  for (const auto& w : report.warnings) meta << "warning = " << w << '\n';
  write("meta.txt", meta.str());
}

}  // namespace ddpce::harness
