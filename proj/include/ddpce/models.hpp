#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ddpce::models {

enum class TestFunction { Ishigami, ProductPeak, PolyD3 };

TestFunction parse_test_function(std::string_view name);
std::size_t arity(TestFunction f);

/// ishigami: sin x1 + 7 sin^2 x2 + 0.1 x3^4 sin x1.
/// product_peak: prod_j 1 / (1 + (x_j - 0.5)^2), three inputs.
/// poly_d3: 1 + 2 x1 - x2 + 0.5 x3 + 0.75 x1 x2 + 0.25 x1 x3 - 0.3 x3^2.
double eval_test_function(TestFunction f, std::span<const double> x);
double eval_test_function(std::string_view name, std::span<const double> x);

struct PriorityLevel {
  double demand_fraction = 0.0;
  double penalty = 0.0;  // cost per unit of unserved energy
};

struct Storage {
  double energy_capacity = 0.0;
  double power_limit = 0.0;  // delivered power per hour
  double initial_level = 0.0;
  double efficiency = 1.0;   // applied on discharge
};

/// Islanded-emergency dispatch at hourly resolution. Levels are ordered from
/// most to least critical.
struct DispatchConfig {
  int horizon = 24;
  std::vector<PriorityLevel> levels;
  std::vector<double> generation;  // available local supply per hour
  Storage storage;
  std::vector<double> base_load;   // demand per hour at load scale 1

  void validate() const;
  /// Illustrative three-level feeder used by the shipped experiment config.
  static DispatchConfig illustrative();
};

struct HourDispatch {
  std::vector<double> served;
  std::vector<double> shed;
  double cost = 0.0;
};

/// Serves levels in order from `supply`; unserved energy of level k costs
/// penalties[k] per unit.
HourDispatch serve_priority_stack(std::span<const double> level_demand, std::span<const double> penalties,
                                  double supply);

struct HourRecord {
  int hour = 0;
  double demand = 0.0;
  double generation_used = 0.0;
  double storage_delivered = 0.0;
  double storage_charged = 0.0;
  double state_of_charge = 0.0;  // after the hour
  HourDispatch dispatch;
};

struct ResilienceOutcome {
  double total_cost = 0.0;
  std::vector<double> shed_energy_by_level;
  std::vector<double> demand_by_level;
  int start_hour = 0;
  int duration = 0;  // after clipping to the horizon
  std::vector<HourRecord> hours;
};

/// x = [load_scale, start_hour, duration]; start and duration are rounded to
/// whole hours and the window is clipped to the horizon.
ResilienceOutcome eval_dispatch(const DispatchConfig& config, std::span<const double> x);

}  // namespace ddpce::models
