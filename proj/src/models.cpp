#include "ddpce/models.hpp"

#include <algorithm>
#include <cmath>

#include "ddpce/error.hpp"

namespace ddpce::models {

TestFunction parse_test_function(std::string_view name) {
  if (name == "ishigami") return TestFunction::Ishigami;
  if (name == "product_peak") return TestFunction::ProductPeak;
  if (name == "poly_d3") return TestFunction::PolyD3;
  throw Error(ErrorKind::Config, "unknown test function '" + std::string(name) + "'");
}

std::size_t arity(TestFunction) { return 3; }

double eval_test_function(TestFunction f, std::span<const double> x) {
  if (x.size() != arity(f))
    throw Error(ErrorKind::Config, "test function expects " + std::to_string(arity(f)) + " inputs, got " +
                                       std::to_string(x.size()));
  switch (f) {
    case TestFunction::Ishigami: {
      const double s2 = std::sin(x[1]);
      return std::sin(x[0]) + 7.0 * s2 * s2 + 0.1 * std::pow(x[2], 4) * std::sin(x[0]);
    }
    case TestFunction::ProductPeak: {
      double v = 1.0;
      for (double xi : x) v *= 1.0 / (1.0 + (xi - 0.5) * (xi - 0.5));
      return v;
    }
    case TestFunction::PolyD3:
      return 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[2] + 0.75 * x[0] * x[1] + 0.25 * x[0] * x[2] -
             0.3 * x[2] * x[2];
  }
  return 0.0;
}

double eval_test_function(std::string_view name, std::span<const double> x) {
  return eval_test_function(parse_test_function(name), x);
}

void DispatchConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Config, "dispatch config: " + msg); };
  if (horizon < 1) fail("horizon must be positive");
  if (levels.empty()) fail("at least one priority level is required");
  double total = 0.0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (!(levels[k].demand_fraction >= 0.0)) fail("demand fractions must be non-negative");
    if (!(levels[k].penalty >= 0.0) || !std::isfinite(levels[k].penalty)) fail("penalties must be finite and >= 0");
    if (k > 0 && !(levels[k].penalty < levels[k - 1].penalty))
      fail("penalties must strictly decrease from the most critical level");
    total += levels[k].demand_fraction;
  }
  if (std::abs(total - 1.0) > 1e-9) fail("demand fractions must sum to 1");
  if (generation.size() != static_cast<std::size_t>(horizon)) fail("generation needs one value per hour");
  if (base_load.size() != static_cast<std::size_t>(horizon)) fail("base load needs one value per hour");
  for (double g : generation)
    if (!(g >= 0.0) || !std::isfinite(g)) fail("generation capacity must be finite and >= 0");
  for (double l : base_load)
    if (!(l >= 0.0) || !std::isfinite(l)) fail("base load must be finite and >= 0");
  const auto& s = storage;
  if (!(s.energy_capacity >= 0.0) || !(s.power_limit >= 0.0) || !std::isfinite(s.energy_capacity) ||
      !std::isfinite(s.power_limit))
    fail("storage capacity and power limit must be finite and >= 0");
  if (!(s.initial_level >= 0.0 && s.initial_level <= s.energy_capacity))
    fail("initial storage level must lie in [0, capacity]");
  if (!(s.efficiency > 0.0 && s.efficiency <= 1.0)) fail("storage efficiency must lie in (0, 1]");
}

DispatchConfig DispatchConfig::illustrative() {
  DispatchConfig c;
  c.horizon = 24;
  c.levels = {{0.5, 100.0}, {0.3, 10.0}, {0.2, 1.0}};
  // MW; evening peak around 18:00.
  c.base_load = {3.0, 2.8, 2.7, 2.6, 2.7, 3.0, 3.5, 4.0, 4.3, 4.5, 4.6, 4.7,
                 4.7, 4.6, 4.6, 4.8, 5.2, 5.8, 6.2, 6.0, 5.5, 4.8, 4.0, 3.4};
  // 1.5 MW dispatchable plus a PV bell peaking at 1.5 MW at noon.
  c.generation.resize(24);
  for (int h = 0; h < 24; ++h) {
    const double pv = (h >= 6 && h <= 18) ? 1.5 * std::sin(3.14159265358979323846 * (h - 6) / 12.0) : 0.0;
    c.generation[static_cast<std::size_t>(h)] = 1.5 + pv;
  }
  c.storage = {2.0, 0.5, 1.5, 0.9};
  return c;
}

HourDispatch serve_priority_stack(std::span<const double> level_demand, std::span<const double> penalties,
                                  double supply) {
  HourDispatch out;
  out.served.resize(level_demand.size());
  out.shed.resize(level_demand.size());
  double remaining = std::max(supply, 0.0);
  for (std::size_t k = 0; k < level_demand.size(); ++k) {
    const double served = std::min(level_demand[k], remaining);
    remaining -= served;
    out.served[k] = served;
    out.shed[k] = level_demand[k] - served;
    out.cost += penalties[k] * out.shed[k];
  }
  return out;
}

ResilienceOutcome eval_dispatch(const DispatchConfig& config, std::span<const double> x) {
  if (x.size() != 3)
    throw Error(ErrorKind::Config, "dispatch model expects [load_scale, start_hour, duration]");
  const double scale = x[0];
  if (!std::isfinite(scale) || scale < 0.0) throw Error(ErrorKind::Config, "load scale must be finite and >= 0");
  if (!std::isfinite(x[1]) || x[1] < 0.0 || x[1] >= config.horizon)
    throw Error(ErrorKind::Config, "start hour must lie in [0, horizon)");
  if (!std::isfinite(x[2]) || x[2] < 0.0) throw Error(ErrorKind::Config, "duration must be finite and >= 0");

  const int start = static_cast<int>(std::lround(x[1]));
  const int end = std::min(config.horizon, start + static_cast<int>(std::lround(x[2])));

  const std::size_t nlev = config.levels.size();
  std::vector<double> fractions(nlev), penalties(nlev), level_demand(nlev);
  for (std::size_t k = 0; k < nlev; ++k) {
    fractions[k] = config.levels[k].demand_fraction;
    penalties[k] = config.levels[k].penalty;
  }

  ResilienceOutcome out;
  out.start_hour = std::min(start, config.horizon);
  out.duration = std::max(0, end - start);
  out.shed_energy_by_level.assign(nlev, 0.0);
  out.demand_by_level.assign(nlev, 0.0);

  const Storage& st = config.storage;
  double soc = st.initial_level;
  for (int h = start; h < end; ++h) {
    const auto hu = static_cast<std::size_t>(h);
    HourRecord rec;
    rec.hour = h;
    rec.demand = scale * config.base_load[hu];
    for (std::size_t k = 0; k < nlev; ++k) level_demand[k] = rec.demand * fractions[k];

    const double gen = config.generation[hu];
    const double deliverable = std::min(st.power_limit, soc * st.efficiency);
    rec.dispatch = serve_priority_stack(level_demand, penalties, gen + deliverable);

    double served = 0.0;
    for (double s : rec.dispatch.served) served += s;
    rec.generation_used = std::min(served, gen);
    rec.storage_delivered = std::max(0.0, served - gen);
    soc = std::max(0.0, soc - rec.storage_delivered / st.efficiency);
    const double surplus = gen - rec.generation_used;
    rec.storage_charged = std::min({surplus, st.power_limit, st.energy_capacity - soc});
    soc += rec.storage_charged;
    rec.state_of_charge = soc;

    for (std::size_t k = 0; k < nlev; ++k) {
      out.shed_energy_by_level[k] += rec.dispatch.shed[k];
      out.demand_by_level[k] += level_demand[k];
    }
    out.total_cost += rec.dispatch.cost;
    out.hours.push_back(std::move(rec));
  }
  return out;
}

}  // namespace ddpce::models
