#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridmix/datamodel.hpp"
#include "gridmix/demand.hpp"
#include "gridmix/optimizer.hpp"
#include "gridmix/rooftop_pv.hpp"
#include "gridmix/scenario.hpp"

namespace gridmix::pipeline {

// File names inside a data directory or a prepared bundle.
namespace files {
inline constexpr const char* kMunicipalities = "municipalities.csv";
inline constexpr const char* kLoadProfile = "load_profile.csv";
inline constexpr const char* kEvProfile = "ev_profile.csv";
inline constexpr const char* kCanonicalYields = "canonical_yields.csv";
inline constexpr const char* kRooftopSplit = "rooftop_split.csv";
inline constexpr const char* kRegionalTotals = "regional_totals.csv";  // optional
inline constexpr const char* kPortfolio = "portfolio.csv";             // optional
}  // namespace files

struct Bundle {
  MunicipalitySet municipalities;
  demand::LoadProfile load_profile;
  demand::LoadProfile ev_profile;
  pv::RegionalYields yields;
  pv::RooftopSplitTable rooftop_split = pv::RooftopSplitTable::spanish_survey();
  std::map<std::string, double> regional_totals;  // empty: no scaling
  std::optional<Portfolio> portfolio;
  std::vector<std::filesystem::path> sources;    // every file read
  std::vector<std::string> warnings;
};

// Reads every required file; a missing one is an InputError naming it.
// `portfolio` is looked up relative to `dir` when non-empty.
Bundle load_bundle(const std::filesystem::path& dir,
                   const std::string& portfolio = files::kPortfolio);

// Writes the normalized bundle (portfolio series are copied next to it).
std::vector<std::filesystem::path> write_bundle(const Bundle& bundle,
                                                const std::filesystem::path& dir);

struct MunicipalSummary {
  const Municipality* municipality = nullptr;
  double base_demand_mwh = 0.0;
  double ev_demand_mwh = 0.0;
  double equivalent_cars = 0.0;
  double production_mwh = 0.0;       // full rooftop potential, after shadow losses
  double capacity_mwp = 0.0;         // producing rooftop capacity
  double north_capacity_mwp = 0.0;   // excluded from production when configured
  bool extrapolated = false;         // regression prediction clamped at zero

  double demand_mwh() const { return base_demand_mwh + ev_demand_mwh; }
  double balance_mwh() const { return production_mwh - demand_mwh(); }
};

struct GroupSeries {
  HourlySeries demand;
  HourlySeries production;
  double capacity_mwp = 0.0;
};

struct NationalModel {
  std::vector<MunicipalSummary> municipalities;
  std::map<std::string, GroupSeries> provinces;
  std::map<std::string, GroupSeries> regions;
  HourlySeries base_demand;
  HourlySeries ev_demand;
  HourlySeries demand;            // base plus EV when included
  HourlySeries pv_production;     // full rooftop potential
  double pv_capacity_mwp = 0.0;
  std::optional<demand::RegressionModel> regression;
  std::size_t extrapolated_count = 0;

  // Hourly yield of one MWp of the national rooftop mix.
  Trace<double> pv_profile() const;
};

NationalModel build_national_model(const Bundle& bundle, const ScenarioConfig& scenario);

// Search problem for the scenario: national demand, rooftop PV shape and,
// in brownfield, the portfolio with the scenario's hydro manageability.
opt::ResidualSystem residual_system(const NationalModel& model, const Bundle& bundle,
                                    const ScenarioConfig& scenario);

// Portfolio with the scenario's hydro manageability applied.
Portfolio scenario_portfolio(const Bundle& bundle, const ScenarioConfig& scenario);

}  // namespace gridmix::pipeline
