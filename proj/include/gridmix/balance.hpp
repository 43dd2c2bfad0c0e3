#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "gridmix/datamodel.hpp"
#include "gridmix/series.hpp"

namespace gridmix::balance {

// Hourly demand minus production; negative entries are surplus.
template <typename DemandDerived, typename ProductionDerived>
auto net_demand(const Eigen::ArrayBase<DemandDerived>& demand,
                const Eigen::ArrayBase<ProductionDerived>& production) {
  return demand - production;
}

inline HourlySeries net_demand(const HourlySeries& demand,
                               const HourlySeries& production) {
  return HourlySeries(net_demand(demand.values(), production.values()),
                      demand.year_label(), SignConstraint::kSigned);
}

template <typename Scalar>
struct DispatchInputs {
  Trace<Scalar> demand;                   // MWh per hour, >= 0
  Trace<Scalar> nonmanageable_production; // MWh per hour, >= 0
  Scalar manageable_budget = 0;           // MWh over the horizon
  Scalar manageable_power_cap = 0;        // MW
  StorageSpec storage;
};

template <typename Scalar>
struct BalanceResult {
  Scalar total_demand = 0;
  Scalar total_production = 0;
  Scalar served = 0;
  Scalar unserved = 0;
  Scalar curtailed = 0;
  Scalar storage_losses = 0;
  Scalar manageable_used = 0;
  Scalar direct_supplied = 0;
  Scalar battery_discharged = 0;
  Scalar battery_charge_input = 0;
  Scalar soc_start = 0;
  Scalar soc_end = 0;
  Scalar peak_charge_power = 0;     // MW drawn into the battery
  Scalar peak_discharge_power = 0;  // MW delivered by the battery
  Trace<Scalar> soc_trace;          // end-of-hour state of charge, MWh
  bool cyclic = false;
};

namespace detail {

template <typename Scalar>
BalanceResult<Scalar> run_horizon(const DispatchInputs<Scalar>& in, Scalar soc,
                                  bool record_trace) {
  const Eigen::Index hours = in.demand.size();
  const Scalar capacity = static_cast<Scalar>(in.storage.capacity);
  const Scalar eta = static_cast<Scalar>(in.storage.round_trip_efficiency);

  BalanceResult<Scalar> r;
  r.soc_start = soc;
  if (record_trace) r.soc_trace.resize(hours);
  Scalar budget = in.manageable_budget;

  for (Eigen::Index h = 0; h < hours; ++h) {
    const Scalar demand = in.demand(h);
    const Scalar production = in.nonmanageable_production(h);
    r.total_demand += demand;
    r.total_production += production;
    if (production >= demand) {
      r.direct_supplied += demand;
      const Scalar surplus = production - demand;
      // The whole round-trip loss is taken on the way in.
      const Scalar input = std::min(surplus, (capacity - soc) / eta);
      soc = std::min(capacity, soc + input * eta);
      r.battery_charge_input += input;
      r.curtailed += surplus - input;
      r.peak_charge_power = std::max(r.peak_charge_power, input);
    } else {
      r.direct_supplied += production;
      const Scalar deficit = demand - production;
      const Scalar discharge = std::min(soc, deficit);
      soc -= discharge;
      r.battery_discharged += discharge;
      r.peak_discharge_power = std::max(r.peak_discharge_power, discharge);
      const Scalar residual = deficit - discharge;
      const Scalar manageable =
          std::min({residual, in.manageable_power_cap, budget});
      budget -= manageable;
      r.manageable_used += manageable;
      r.unserved += residual - manageable;
    }
    if (record_trace) r.soc_trace(h) = soc;
  }
  r.soc_end = soc;
  r.storage_losses = r.battery_charge_input * (Scalar(1) - eta);
  r.served = r.direct_supplied + r.battery_discharged + r.manageable_used;
  return r;
}

}  // namespace detail

// Greedy chronological dispatch: surplus charges the battery (excess is
// curtailed); deficits draw on the battery first, then on manageable
// generation up to the hourly cap and the remaining budget. The horizon is
// run twice back to back from an empty battery and the second pass, which
// starts from the first pass's final state of charge, is reported.
template <typename Scalar>
BalanceResult<Scalar> simulate_balance(const DispatchInputs<Scalar>& in) {
  if (in.demand.size() != in.nonmanageable_production.size()) {
    throw InputError("demand and production traces differ in length");
  }
  validate(in.storage);
  if (!(in.manageable_budget >= 0) || !(in.manageable_power_cap >= 0)) {
    throw InputError("manageable budget and power cap must be non-negative");
  }
  const auto warm = detail::run_horizon(in, Scalar(0), false);
  auto r = detail::run_horizon(in, warm.soc_end, true);
  const Scalar capacity = static_cast<Scalar>(in.storage.capacity);
  r.cyclic = std::abs(r.soc_start - r.soc_end) <= Scalar(1e-6) * capacity;
  return r;
}

// Convenience for full-year series.
BalanceResult<double> simulate_balance(const HourlySeries& demand,
                                       const HourlySeries& nonmanageable_production,
                                       double manageable_budget,
                                       double manageable_power_cap,
                                       const StorageSpec& storage);

// Largest relative residual over the ledger identities: demand, production,
// battery state and loss accounting.
template <typename Scalar>
Scalar ledger_residual(const BalanceResult<Scalar>& r, Scalar efficiency) {
  auto rel = [](Scalar lhs, Scalar rhs) {
    const Scalar scale = std::max({std::abs(lhs), std::abs(rhs), Scalar(1)});
    return std::abs(lhs - rhs) / scale;
  };
  return std::max(
      {rel(r.total_demand, r.direct_supplied + r.battery_discharged +
                               r.manageable_used + r.unserved),
       rel(r.total_production,
           r.direct_supplied + r.battery_charge_input + r.curtailed),
       rel(r.battery_charge_input * efficiency - r.battery_discharged,
           r.soc_end - r.soc_start),
       rel(r.storage_losses, r.battery_charge_input * (Scalar(1) - efficiency)),
       rel(r.served, r.total_demand - r.unserved)});
}

template <typename Scalar>
Scalar coverage(const BalanceResult<Scalar>& r, Scalar total_demand) {
  if (!(total_demand > 0)) throw InputError("coverage needs positive total demand");
  return std::clamp((total_demand - r.unserved) / total_demand, Scalar(0), Scalar(1));
}

enum class Period { kMonth, kQuarter, kYear };

std::string_view to_string(Period period);

struct PeriodBalance {
  std::string label;
  double production = 0.0;
  double demand = 0.0;
  double balance = 0.0;  // production - demand
  bool surplus() const { return balance > 0.0; }
  bool deficit() const { return balance < 0.0; }
};

std::vector<PeriodBalance> periodic_balance(const HourlySeries& demand,
                                            const HourlySeries& production,
                                            Period period);

struct LorenzPoint {
  double count_share = 0.0;
  double demand_share = 0.0;
};

// Municipalities sorted by decreasing demand; starts at (0,0), ends at (1,1).
std::vector<LorenzPoint> lorenz_curve(const std::map<std::string, double>& annual_demand);

// Smallest share of municipalities (largest first) whose demand reaches
// `demand_share` of the total.
double count_share_for_demand_share(const std::vector<LorenzPoint>& curve,
                                    double demand_share);

}  // namespace gridmix::balance
