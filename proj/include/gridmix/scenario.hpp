#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "gridmix/datamodel.hpp"
#include "gridmix/optimizer.hpp"
#include "gridmix/rooftop_pv.hpp"

namespace gridmix {

enum class Mode { kGreenfield, kBrownfield };

std::string_view to_string(Mode mode);

struct ScenarioConfig {
  Mode mode = Mode::kGreenfield;
  bool include_ev = true;
  double hydro_manageability = 0.85;
  std::string hydro_technology = "hydro";
  std::string portfolio = "portfolio.csv";  // relative to the bundle
  std::string year_label = "2018";

  StorageSpec storage;
  CostModel cost;
  opt::SweepSettings sweep;
  pv::PvParams pv;

  // Fixed PV for `balance` and the coverage curve. Defaults to the full
  // rooftop potential in greenfield and to none in brownfield.
  std::optional<double> pv_gwp;
  std::vector<double> storage_grid_gwh;
  std::vector<double> hydro_fractions;

  double aggregation_threshold = 1000.0;
  double per_car_annual_mwh = 2.0375;

  void validate() const;
};

// Flat INI text:
//
//   [scenario]  mode, include_ev, hydro_manageability, hydro_technology,
//               portfolio, year_label
//   [storage]   capacity_gwh, round_trip_efficiency
//   [cost]      pv_unit_cost_eur_per_wp, pv_lifetime_years,
//               storage_unit_cost_eur_per_kwh, storage_lifetime_years,
//               wholesale_eur_per_mwh
//   [sweep]     pv_step_gwp, storage_tol, stop_threshold_gwh_per_gwp,
//               capacity_factor, pv_start_gwp, max_points,
//               storage_grid_gwh (comma list), hydro_fractions (comma list)
//   [pv]        capacity_gwp, panel_density_m2_per_kwp, shadow_loss,
//               utilization_factor, exclude_north
//   [demand]    aggregation_threshold, per_car_annual_mwh
//
// Unknown sections or keys are errors.
ScenarioConfig parse_scenario(std::string_view text, const std::string& source = "<scenario>");
ScenarioConfig load_scenario(const std::filesystem::path& path);

std::vector<double> parse_number_list(std::string_view text);

nlohmann::json to_json(const ScenarioConfig& scenario);

}  // namespace gridmix
