#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridmix/balance.hpp"
#include "gridmix/datamodel.hpp"

namespace gridmix::opt {

// Everything the PV-storage search needs: demand, the shape of one MWp of
// rooftop PV, the fixed (non-manageable) ESP output and the manageable block.
struct ResidualSystem {
  Trace<double> demand;             // MWh per hour
  Trace<double> pv_profile;         // MWh per MWp per hour, shadow losses applied
  Trace<double> esp_nonmanageable;  // MWh per hour; zeros in greenfield
  double manageable_budget = 0.0;   // MWh per horizon
  double manageable_power_cap = 0.0;  // MW
  double round_trip_efficiency = 0.95;
  std::optional<double> pv_limit;   // MWp, rooftop bound

  void validate() const;
  balance::DispatchInputs<double> dispatch_inputs(double pv_mw, double storage_mwh) const;
  balance::BalanceResult<double> simulate(double pv_mw, double storage_mwh) const;
  double total_demand() const { return demand.sum(); }
};

// Unserved energy allowed by the feasibility predicate, relative to demand.
inline constexpr double kUnservedTolerance = 1e-6;

bool fully_covered(const ResidualSystem& system, double pv_mw, double storage_mwh);

// (gap + loss allowance) / (8760 h x capacity factor), in GWp.
double initial_pv_guess(double annual_gap_mwh, double loss_allowance_mwh,
                        double capacity_factor);

// Smallest storage (MWh) that serves every hour at the given PV capacity,
// within `tol` relative. Throws InfeasibleError with the residual energy gap
// when no storage size suffices.
double min_storage_for_full_coverage(const ResidualSystem& system, double pv_mw,
                                     double tol = 1e-3);

struct CostBreakdown {
  double pv_investment = 0.0;            // MEUR
  double storage_investment = 0.0;       // MEUR
  double pv_depreciation = 0.0;          // MEUR per year
  double storage_depreciation = 0.0;     // MEUR per year
  double total_depreciation() const { return pv_depreciation + storage_depreciation; }
};

CostBreakdown cost_breakdown(double pv_gwp, double storage_gwh, const CostModel& cost);

// Straight-line annual depreciation over annual useful energy, EUR/MWh.
double lcoe(double pv_gwp, double storage_gwh, double annual_useful_twh,
            const CostModel& cost);

// Energy-weighted mix of new-system cost and ESP energy priced at wholesale.
double blended_cost(double new_energy_twh, double new_lcoe, double esp_energy_twh,
                    double wholesale);

double storage_hours(double storage_gwh, double rated_power_gw);

struct SweepSettings {
  double pv_step_gwp = 1.0;
  double storage_tol = 1e-3;
  double stop_threshold = 0.1;  // GWh of storage saved per GWp added
  double capacity_factor = 0.17;
  std::optional<double> pv_start_gwp;  // overrides the initial guess
  int max_points = 10'000;
  int jobs = 1;

  void validate() const;
};

struct OperatingPoint {
  double pv_gwp = 0.0;
  double storage_gwh = 0.0;
  double lcoe = 0.0;          // EUR/MWh
  double blended_cost = 0.0;  // EUR/MWh
  double curtailed_twh = 0.0;
  double served_fraction = 0.0;
  double useful_new_twh = 0.0;
  double storage_losses_twh = 0.0;
  double manageable_used_twh = 0.0;
  double rated_power_gw = 0.0;  // peak battery charge or discharge
};

// Dispatches the system at (pv, storage) and prices the new assets. The
// useful new-system energy is PV delivered straight to load after the
// existing non-manageable output has been served, plus everything the
// battery discharges.
OperatingPoint evaluate_point(const ResidualSystem& system, double pv_gwp,
                              double storage_gwh, const CostModel& cost);

struct IsoquantPoint : OperatingPoint {
  bool flagged = false;  // storage replaced by the running minimum
};

struct SweepResult {
  std::vector<IsoquantPoint> points;
  std::size_t least_cost_index = 0;
  double min_pv_asymptote_gwp = 0.0;   // smallest PV feasible with unbounded storage
  double min_storage_asymptote_gwh = 0.0;
  std::size_t skipped_infeasible = 0;  // leading PV steps with no feasible storage
  std::size_t flagged_count() const;
  const IsoquantPoint& least_cost() const { return points.at(least_cost_index); }
};

SweepResult pv_storage_isoquant(const ResidualSystem& system, const SweepSettings& settings,
                                const CostModel& cost);

struct CoveragePoint : OperatingPoint {};

// Coverage and cost at fixed PV for each storage size (GWh, ascending).
std::vector<CoveragePoint> coverage_vs_storage_curve(const ResidualSystem& system,
                                                     double pv_gwp,
                                                     const std::vector<double>& storage_grid_gwh,
                                                     const CostModel& cost, int jobs = 1);

std::size_t least_cost_index(const std::vector<CoveragePoint>& curve);

// Re-splits one technology's annual energy so that `fraction` of it is
// manageable; the non-manageable rest follows the technology's hourly shape
// and the manageable power cap scales with the fraction.
Portfolio with_manageability(const Portfolio& portfolio, const std::string& technology,
                             double fraction);

struct SensitivityRow {
  double hydro_fraction = 0.0;
  IsoquantPoint least_cost;
  std::size_t points = 0;
  std::size_t flagged = 0;
};

// `base` supplies demand, PV shape, efficiency and limits; the portfolio
// supplies the ESP blocks for each hydro fraction. Rows ascend by fraction.
std::vector<SensitivityRow> hydro_manageability_sweep(const ResidualSystem& base,
                                                      const Portfolio& portfolio,
                                                      const std::vector<double>& fractions,
                                                      const SweepSettings& settings,
                                                      const CostModel& cost,
                                                      const std::string& hydro_name = "hydro");

// Residual system with the portfolio's ESP blocks plugged in.
ResidualSystem with_portfolio(ResidualSystem base, const Portfolio& portfolio);

}  // namespace gridmix::opt
