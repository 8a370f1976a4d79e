#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ddpce/error.hpp"
#include "ddpce/harness.hpp"

using namespace ddpce;
using namespace ddpce::harness;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

const std::string kPolyConfig = R"(# exactly representable model
model = poly_d3
input.1 = uniform 0 1
input.2 = uniform 1 2
input.3 = normal 0 0.5
m_train = 60
m_ref = 2000
degree = 2
cases = ols, cls
alphas = 0, 0.5, 1, -1
seed.train = 3
seed.reference = 4
)";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::filesystem::path temp_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / "ddpce_test_harness" / name;
  std::filesystem::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse(kPolyConfig);
  CHECK(c.model == "poly_d3");
  CHECK(c.inputs.dim() == 3);
  CHECK(c.m_train == 60);
  CHECK(c.degree == 2);
  REQUIRE(c.cases.size() == 6);
  CHECK(c.cases[0].label() == "OLS");
  CHECK(c.cases[1].label() == "CLS");
  CHECK(c.cases[3].label() == "alpha=0.5");
  CHECK(c.cases[5].exponent() == -1.0);
  CHECK(c.seed_reference == 4);

  const auto d = parse(R"(
input.1 = uniform 0.8 1.2
input.2 = discrete_range 0 23
input.3 = discrete_range 2 8
alphas = 0, 1
dispatch.levels = 0.6:20, 0.4:2
dispatch.storage = 3 1 1 0.95
stability_threshold = 1
sparse = on
sparse.max_terms = 7
)");
  CHECK(d.model == "dispatch");
  CHECK(d.dispatch.levels.size() == 2);
  CHECK(d.dispatch.storage.efficiency == 0.95);
  CHECK(d.stability_threshold == 1.0);
  CHECK(d.sparse.enabled);
  CHECK(d.sparse.max_terms == std::size_t{7});

  CHECK_THROWS_AS(parse("colour = blue\n"), Error);
  CHECK_THROWS_AS(parse("input.2 = uniform 0 1\nalphas = 0\nmodel = poly_d3\n"), Error);
  CHECK_THROWS_AS(parse(kPolyConfig + "m_train = -3\n"), Error);
  CHECK_THROWS_AS(parse(kPolyConfig + "input.1 = uniform 1 0\n"), Error);
  CHECK_THROWS_AS(parse("input.1 = uniform 0 1\nmodel = ishigami\nalphas = 0\n"), Error);
  CHECK_THROWS_WITH_AS(parse(kPolyConfig + "no equals sign\n"), doctest::Contains("config line 13"), Error);
}

TEST_CASE("exactly representable model gives near-zero deviations for every scheme") {
  const auto report = run_experiment(parse(kPolyConfig));
  REQUIRE(report.rows.size() == 6);
  CHECK(report.n_terms == 10);
  for (const auto& r : report.rows) {
    CAPTURE(r.label);
    REQUIRE_FALSE(r.error);
    CHECK(std::abs(r.p5_dev) <= 0.1);
    CHECK(std::abs(r.p95_dev) <= 0.1);
    CHECK(std::abs(r.mean_dev) <= 0.1);
    CHECK(std::abs(r.std_dev) <= 0.1);
    CHECK(r.score_lr == report.score_lr);
  }
}

TEST_CASE("alpha 0 and -1 rows reproduce the ols and cls rows") {
  const auto report = run_experiment(parse(kPolyConfig + "model = ishigami\ninput.3 = uniform -3 3\ndegree = 3\n"));
  const auto& ols = report.rows[0];
  const auto& cls = report.rows[1];
  const auto& a0 = report.rows[2];
  const auto& am1 = report.rows[5];
  CHECK(a0.p5_dev == ols.p5_dev);
  CHECK(a0.p95_dev == ols.p95_dev);
  CHECK(a0.mean_dev == ols.mean_dev);
  CHECK(a0.std_dev == ols.std_dev);
  CHECK(a0.score_lr_weighted == ols.score_lr_weighted);
  CHECK(am1.p5_dev == cls.p5_dev);
  CHECK(am1.p95_dev == cls.p95_dev);
  CHECK(am1.std_dev == cls.std_dev);
  CHECK(am1.cond_gram_weighted == cls.cond_gram_weighted);
}

TEST_CASE("reference summary does not depend on the training size") {
  const auto a = run_experiment(parse(kPolyConfig));
  const auto b = run_experiment(parse(kPolyConfig + "m_train = 90\n"));
  CHECK(a.reference.mean == b.reference.mean);
  CHECK(a.reference.quantiles == b.reference.quantiles);
}

TEST_CASE("a failing alpha is reported without aborting the sweep") {
  const auto report = run_experiment(parse(kPolyConfig + "alphas = 0, 4000, 1\n"));
  REQUIRE(report.rows.size() == 5);
  CHECK_FALSE(report.rows[2].error);
  REQUIRE(report.rows[3].error);
  CHECK(report.rows[3].error->find("alpha=4000") != std::string::npos);
  CHECK(std::isnan(report.rows[3].p95_dev));
  CHECK_FALSE(report.rows[4].error);
}

TEST_CASE("too few training samples switches to sparse selection") {
  const auto report = run_experiment(parse(kPolyConfig + "m_train = 8\ncases = ols\nalphas = 0\n"));
  CHECK(report.sparse_planned);
  CHECK(std::isnan(report.score_lr));
  REQUIRE(report.rows.size() == 2);
  CHECK_FALSE(report.rows[0].error);
  CHECK(report.rows[0].active_terms <= 8);
}

TEST_CASE("reports are written and byte-identical across runs") {
  const auto cfg = parse(kPolyConfig);
  const auto d1 = temp_dir("a");
  const auto d2 = temp_dir("b");
  emit_report(run_experiment(cfg), d1);
  emit_report(run_experiment(cfg), d2);
  for (const char* f : {"table.csv", "curves.csv", "meta.txt"}) {
    CAPTURE(f);
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  }

  std::istringstream table(slurp(d1 / "table.csv"));
  std::string line;
  std::getline(table, line);
  CHECK(line.rfind("case,p5_dev,p95_dev,mean_dev,std_dev,score_lr,", 0) == 0);
  int rows = 0;
  while (std::getline(table, line)) ++rows;
  CHECK(rows == 6);

  std::istringstream curves(slurp(d1 / "curves.csv"));
  std::getline(curves, line);
  std::vector<std::string> alphas;
  while (std::getline(curves, line)) alphas.push_back(line.substr(0, line.find(',')));
  CHECK(alphas == std::vector<std::string>{"0", "0.5", "1", "-1"});

  const auto meta = slurp(d1 / "meta.txt");
  CHECK(meta.find("natural log") != std::string::npos);
  CHECK(meta.find("std = population") != std::string::npos);
}

TEST_CASE("two-row report") {
  const auto d = temp_dir("two");
  emit_report(run_experiment(parse(kPolyConfig + "cases = ols\nalphas = 1\n")), d);
  std::istringstream table(slurp(d / "table.csv"));
  std::string line;
  int lines = 0;
  while (std::getline(table, line)) ++lines;
  CHECK(lines == 3);
}

TEST_CASE("seed override") {
  auto c = parse(kPolyConfig);
  c.override_seed(10);
  CHECK(c.seed_train == 10);
  CHECK(c.seed_reference == 11);
}
