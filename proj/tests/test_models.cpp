#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ddpce/error.hpp"
#include "ddpce/models.hpp"
#include "oracles.hpp"

using namespace ddpce;
using namespace ddpce::models;
using doctest::Approx;

namespace {

DispatchConfig flat_config(double generation, Storage storage) {
  DispatchConfig c;
  c.horizon = 24;
  c.levels = {{0.5, 100.0}, {0.3, 10.0}, {0.2, 1.0}};
  c.generation.assign(24, generation);
  c.base_load.assign(24, 10.0);
  c.storage = storage;
  return c;
}

}  // namespace

TEST_CASE("test functions") {
  const std::vector<double> zeros{0, 0, 0};
  CHECK(eval_test_function("ishigami", zeros) == 0.0);
  const std::vector<double> half_pi{std::numbers::pi / 2, 0, 0};
  CHECK(eval_test_function("ishigami", half_pi) == Approx(1.0).epsilon(1e-15));
  CHECK(eval_test_function("poly_d3", zeros) == 1.0);
  const std::vector<double> mid{0.5, 0.5, 0.5};
  CHECK(eval_test_function("product_peak", mid) == 1.0);
  CHECK_THROWS_AS(eval_test_function("rosenbrock", zeros), Error);
  const std::vector<double> short_x{0, 0};
  CHECK_THROWS_AS(eval_test_function("ishigami", short_x), Error);
}

TEST_CASE("hand-simulated single hour") {
  // demand 10, generation 4, storage delivers 2
  auto c = flat_config(4.0, {10.0, 2.0, 10.0, 1.0});
  const std::vector<double> x{1.0, 5.0, 1.0};
  const auto out = eval_dispatch(c, x);
  REQUIRE(out.hours.size() == 1);
  const auto& h = out.hours[0].dispatch;
  CHECK(h.served[0] == 5.0);
  CHECK(h.served[1] == Approx(1.0));
  CHECK(h.shed[1] == Approx(2.0));
  CHECK(h.shed[2] == Approx(2.0));
  CHECK(out.total_cost == Approx(22.0));
  CHECK(out.hours[0].storage_delivered == Approx(2.0));
}

TEST_CASE("sufficient supply and empty windows cost nothing") {
  const auto rich = flat_config(50.0, {0, 0, 0, 1});
  const std::vector<double> x{1.2, 3.0, 8.0};
  const auto r = eval_dispatch(rich, x);
  CHECK(r.total_cost == 0.0);
  for (double s : r.shed_energy_by_level) CHECK(s == 0.0);

  const auto poor = flat_config(1.0, {0, 0, 0, 1});
  const std::vector<double> none{1.0, 3.0, 0.0};
  const auto e = eval_dispatch(poor, none);
  CHECK(e.total_cost == 0.0);
  CHECK(e.hours.empty());
}

TEST_CASE("window rounding and clipping") {
  const auto c = flat_config(1.0, {0, 0, 0, 1});
  const std::vector<double> late{1.0, 22.4, 5.0};
  const auto r = eval_dispatch(c, late);
  CHECK(r.start_hour == 22);
  CHECK(r.duration == 2);
  const std::vector<double> frac{1.0, 3.6, 2.5};
  CHECK(eval_dispatch(c, frac).start_hour == 4);
  CHECK(eval_dispatch(c, frac).duration == 3);
  const std::vector<double> bad_start{1.0, 24.0, 2.0};
  CHECK_THROWS_AS(eval_dispatch(c, bad_start), Error);
  const std::vector<double> bad_dur{1.0, 2.0, -1.0};
  CHECK_THROWS_AS(eval_dispatch(c, bad_dur), Error);
}

TEST_CASE("config validation") {
  auto c = DispatchConfig::illustrative();
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.levels[1].penalty = 200.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = c;
  bad.levels[0].demand_fraction = 0.6;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = c;
  bad.storage.efficiency = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = c;
  bad.storage.initial_level = bad.storage.energy_capacity + 1;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = c;
  bad.generation.pop_back();
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("greedy stack equals the per-hour LP minimum") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int t = 0; t < 500; ++t) {
    const std::size_t nlev = 1 + static_cast<std::size_t>(t % 4);
    std::vector<double> demand(nlev), penalty(nlev);
    double p = 1000.0;
    for (std::size_t k = 0; k < nlev; ++k) {
      demand[k] = u(rng);
      p *= 0.1 + 0.8 * u(rng) / 10.0;
      penalty[k] = p;
    }
    const double supply = 1.5 * u(rng);
    const auto g = serve_priority_stack(demand, penalty, supply);
    CHECK(g.cost == Approx(oracle::lp_min_shed_cost(demand, penalty, supply)).epsilon(1e-12));
  }
}

TEST_CASE("dispatch invariants over random scenarios") {
  const auto c = DispatchConfig::illustrative();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> scale(0.5, 1.5), start(0.0, 23.49), dur(0.0, 10.0);
  for (int t = 0; t < 300; ++t) {
    const std::vector<double> x{scale(rng), start(rng), dur(rng)};
    const auto out = eval_dispatch(c, x);
    CHECK(out.total_cost >= 0.0);
    for (std::size_t k = 0; k < c.levels.size(); ++k)
      CHECK(out.shed_energy_by_level[k] <= out.demand_by_level[k] + 1e-12);
    for (const auto& h : out.hours) {
      CHECK(h.state_of_charge >= 0.0);
      CHECK(h.state_of_charge <= c.storage.energy_capacity + 1e-12);
      CHECK(h.storage_delivered <= c.storage.power_limit + 1e-12);
      CHECK(h.storage_charged <= c.storage.power_limit + 1e-12);
      for (std::size_t k = 0; k < c.levels.size(); ++k) {
        const double demand = h.demand * c.levels[k].demand_fraction;
        CHECK(std::abs(h.dispatch.served[k] + h.dispatch.shed[k] - demand) < 1e-10);
      }
    }

    // monotone in load scale and in duration
    const std::vector<double> more_load{x[0] * 1.1, x[1], x[2]};
    const std::vector<double> longer{x[0], x[1], x[2] + 1.0};
    CHECK(eval_dispatch(c, more_load).total_cost >= out.total_cost - 1e-9);
    CHECK(eval_dispatch(c, longer).total_cost >= out.total_cost - 1e-9);
  }
}
