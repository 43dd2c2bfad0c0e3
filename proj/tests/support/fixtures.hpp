#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "gridmix/datamodel.hpp"
#include "gridmix/demand.hpp"
#include "gridmix/optimizer.hpp"
#include "gridmix/rooftop_pv.hpp"

namespace fixtures {

using gridmix::Trace;

// Coefficients used to generate noiseless municipal demand, in regressor
// order (intercept, population, income, cadastral, altitude, zones II-V).
Eigen::VectorXd reference_coefficients();

// Random municipalities with noiseless demand from reference_coefficients().
// Every zone appears; ids are M0000, M0001, ...
std::vector<gridmix::Municipality> synthetic_municipalities(std::uint64_t seed, int count,
                                                            int regions = 3);

// Per-kWp canonical days for flat, south, east, west and north roofs from a
// clear-sky geometry scaled to monthly horizontal irradiation.
struct SolarSite {
  double latitude_deg = 40.4;
  // Mean daily global horizontal irradiation per month, kWh/m2/day.
  std::array<double, 12> monthly_ghi{2.2, 3.1, 4.5, 5.6, 6.6, 7.5, 7.7, 6.8, 5.3, 3.6, 2.4, 1.9};
  double performance_ratio = 0.84;
  double diffuse_fraction = 0.3;
};
gridmix::pv::CanonicalYieldTable solar_canonical_days(const SolarSite& site = {});

// Weekday/seasonal load shape and an evening-and-night EV charging shape.
gridmix::demand::LoadProfile load_profile_fixture();
gridmix::demand::LoadProfile ev_profile_fixture();

// Portfolio with wind (non-manageable), hydro (partly manageable) and
// biomass (manageable). Energies are scaled to `annual_demand_mwh`.
gridmix::Portfolio portfolio_fixture(double annual_demand_mwh, double hydro_manageability,
                                     std::uint64_t seed = 7);

struct FixtureOptions {
  std::uint64_t seed = 2024;
  int municipalities = 40;
  int small_municipalities = 6;  // population below 1,000
  double unknown_demand_share = 0.25;
  bool regional_totals = false;
  bool portfolio = true;
};

// Writes a complete data directory; returns its total base demand in MWh.
double write_fixture_dir(const std::filesystem::path& dir, const FixtureOptions& options = {});

// A fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

// Random short dispatch problems for property and oracle suites.
struct RandomSystemOptions {
  int min_hours = 48;
  int max_hours = 336;
  bool with_esp = true;
};
gridmix::opt::ResidualSystem random_residual_system(std::mt19937_64& rng,
                                                    const RandomSystemOptions& options = {});

// Smallest storage on a uniform grid of `step` MWh for which the system is
// fully covered, found by scanning the grid upward from zero.
double linear_scan_min_storage(const gridmix::opt::ResidualSystem& system, double pv_mw,
                               double step, int max_steps);

}  // namespace fixtures
