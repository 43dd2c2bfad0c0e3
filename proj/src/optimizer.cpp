#include "gridmix/optimizer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace gridmix::opt {

namespace {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first failing
// index (lowest i) determines the rethrown exception.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double unserved_limit(const ResidualSystem& system) {
  return kUnservedTolerance * system.total_demand();
}

// Storage large enough that the battery never curtails in either pass of
// the warm-started dispatch, i.e. equivalent to unbounded storage.
double unbounded_storage(const ResidualSystem& system, double pv_mw) {
  const Trace<double> surplus =
      (system.esp_nonmanageable + pv_mw * system.pv_profile - system.demand).max(0.0);
  return 2.0 * surplus.sum() + 1.0;
}

}  // namespace

void ResidualSystem::validate() const {
  const auto n = demand.size();
  if (n == 0) throw InputError("residual system has an empty horizon");
  if (pv_profile.size() != n || esp_nonmanageable.size() != n) {
    throw InputError("residual system traces differ in length");
  }
  if ((demand < 0.0).any() || (pv_profile < 0.0).any() || (esp_nonmanageable < 0.0).any()) {
    throw InputError("residual system traces must be non-negative");
  }
  if (!(manageable_budget >= 0.0) || !(manageable_power_cap >= 0.0)) {
    throw InputError("manageable budget and power cap must be non-negative");
  }
  if (!(round_trip_efficiency > 0.0 && round_trip_efficiency <= 1.0)) {
    throw InputError("round-trip efficiency must lie in (0, 1]");
  }
  if (pv_limit && !(*pv_limit >= 0.0)) throw InputError("PV limit must be non-negative");
}

balance::DispatchInputs<double> ResidualSystem::dispatch_inputs(double pv_mw,
                                                                double storage_mwh) const {
  StorageSpec storage;
  storage.capacity = storage_mwh;
  storage.round_trip_efficiency = round_trip_efficiency;
  return {demand, esp_nonmanageable + pv_mw * pv_profile, manageable_budget,
          manageable_power_cap, storage};
}

balance::BalanceResult<double> ResidualSystem::simulate(double pv_mw,
                                                        double storage_mwh) const {
  return balance::simulate_balance(dispatch_inputs(pv_mw, storage_mwh));
}

bool fully_covered(const ResidualSystem& system, double pv_mw, double storage_mwh) {
  return system.simulate(pv_mw, storage_mwh).unserved <= unserved_limit(system);
}

double initial_pv_guess(double annual_gap_mwh, double loss_allowance_mwh,
                        double capacity_factor) {
  if (!(annual_gap_mwh >= 0.0) || !(loss_allowance_mwh >= 0.0)) {
    throw InputError("energy gap and loss allowance must be non-negative");
  }
  if (!(capacity_factor > 0.0 && capacity_factor < 1.0)) {
    throw InputError("capacity factor must lie in (0, 1)");
  }
  const double mw = (annual_gap_mwh + loss_allowance_mwh) /
                    (units::kHoursPerYear * capacity_factor);
  return units::mw_to_gw(mw);
}

double min_storage_for_full_coverage(const ResidualSystem& system, double pv_mw,
                                     double tol) {
  system.validate();
  if (!(tol > 0.0)) throw InputError("storage tolerance must be positive");
  if (!(pv_mw >= 0.0)) throw InputError("PV capacity must be non-negative");

  const double demand = system.total_demand();
  const double supply = (system.esp_nonmanageable + pv_mw * system.pv_profile).sum() +
                        system.manageable_budget;
  if (supply < demand - unserved_limit(system)) {
    const double gap = demand - supply;
    throw InfeasibleError(
        fmt::format("annual supply falls {:.6g} MWh short of demand at {:.6g} MW of PV",
                    gap, pv_mw),
        gap);
  }
  if (fully_covered(system, pv_mw, 0.0)) return 0.0;

  const double ceiling = unbounded_storage(system, pv_mw);
  const auto at_ceiling = system.simulate(pv_mw, ceiling);
  if (at_ceiling.unserved > unserved_limit(system)) {
    throw InfeasibleError(
        fmt::format("{:.6g} MWh stay unserved even with unbounded storage at {:.6g} MW of PV",
                    at_ceiling.unserved, pv_mw),
        at_ceiling.unserved);
  }

  // Bracket from the largest single-hour deficit upward by doubling.
  const Trace<double> deficit =
      (system.demand - system.esp_nonmanageable - pv_mw * system.pv_profile).max(0.0);
  double lo = 0.0;
  double hi = std::max(deficit.maxCoeff(), std::numeric_limits<double>::min());
  while (hi < ceiling && !fully_covered(system, pv_mw, hi)) {
    lo = hi;
    hi = std::min(2.0 * hi, ceiling);
  }
  while (hi - lo > tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (fully_covered(system, pv_mw, mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

CostBreakdown cost_breakdown(double pv_gwp, double storage_gwh, const CostModel& cost) {
  validate(cost);
  if (!(pv_gwp >= 0.0) || !(storage_gwh >= 0.0)) {
    throw InputError("capacities must be non-negative");
  }
  CostBreakdown c;
  // 1 GWp at 1 EUR/Wp is 1,000 MEUR; 1 GWh at 1 EUR/kWh is 1 MEUR.
  c.pv_investment = pv_gwp * 1e3 * cost.pv_unit_cost;
  c.storage_investment = storage_gwh * cost.storage_unit_cost;
  c.pv_depreciation = c.pv_investment / cost.pv_lifetime;
  c.storage_depreciation = c.storage_investment / cost.storage_lifetime;
  return c;
}

double lcoe(double pv_gwp, double storage_gwh, double annual_useful_twh,
            const CostModel& cost) {
  if (!(annual_useful_twh > 0.0)) {
    throw InputError("LCOE needs positive useful energy");
  }
  // MEUR per TWh is EUR per MWh.
  return cost_breakdown(pv_gwp, storage_gwh, cost).total_depreciation() / annual_useful_twh;
}

double blended_cost(double new_energy_twh, double new_lcoe, double esp_energy_twh,
                    double wholesale) {
  const double total = new_energy_twh + esp_energy_twh;
  if (!(total > 0.0)) throw InputError("blended cost needs positive total energy");
  return (new_energy_twh * new_lcoe + esp_energy_twh * wholesale) / total;
}

double storage_hours(double storage_gwh, double rated_power_gw) {
  if (!(rated_power_gw > 0.0)) throw InputError("rated power must be positive");
  return storage_gwh / rated_power_gw;
}

void SweepSettings::validate() const {
  if (!(pv_step_gwp > 0.0)) throw InputError("pv_step must be positive");
  if (!(storage_tol > 0.0)) throw InputError("storage tolerance must be positive");
  if (!(stop_threshold >= 0.0)) throw InputError("stop threshold must be non-negative");
  if (!(capacity_factor > 0.0 && capacity_factor < 1.0)) {
    throw InputError("capacity factor must lie in (0, 1)");
  }
  if (pv_start_gwp && !(*pv_start_gwp >= 0.0)) {
    throw InputError("PV start must be non-negative");
  }
  if (max_points < 1) throw InputError("max_points must be at least 1");
  if (jobs < 1) throw InputError("jobs must be at least 1");
}

OperatingPoint evaluate_point(const ResidualSystem& system, double pv_gwp,
                              double storage_gwh, const CostModel& cost) {
  const double pv_mw = units::gw_to_mw(pv_gwp);
  const auto r = system.simulate(pv_mw, units::gwh_to_mwh(storage_gwh));

  // Existing generation serves load first; PV only takes what it leaves over.
  const double esp_direct = system.esp_nonmanageable.min(system.demand).sum();
  const double pv_direct = std::max(r.direct_supplied - esp_direct, 0.0);
  const double useful_new = pv_direct + r.battery_discharged;
  const double demand = r.total_demand;

  OperatingPoint p;
  p.pv_gwp = pv_gwp;
  p.storage_gwh = storage_gwh;
  p.curtailed_twh = units::mwh_to_twh(r.curtailed);
  p.served_fraction = demand > 0.0 ? balance::coverage(r, demand) : 1.0;
  p.useful_new_twh = units::mwh_to_twh(useful_new);
  p.storage_losses_twh = units::mwh_to_twh(r.storage_losses);
  p.manageable_used_twh = units::mwh_to_twh(r.manageable_used);
  p.rated_power_gw = units::mw_to_gw(std::max(r.peak_charge_power, r.peak_discharge_power));
  if (useful_new > 0.0) {
    p.lcoe = lcoe(pv_gwp, storage_gwh, p.useful_new_twh, cost);
  } else {
    const double dep = cost_breakdown(pv_gwp, storage_gwh, cost).total_depreciation();
    p.lcoe = dep > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  const double other_twh = units::mwh_to_twh(demand - useful_new);
  p.blended_cost = demand > 0.0 ? blended_cost(p.useful_new_twh,
                                               useful_new > 0.0 ? p.lcoe : 0.0,
                                               std::max(other_twh, 0.0),
                                               cost.wholesale_price)
                                : 0.0;
  return p;
}

std::size_t SweepResult::flagged_count() const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [](const auto& p) { return p.flagged; }));
}

SweepResult pv_storage_isoquant(const ResidualSystem& system, const SweepSettings& settings,
                                const CostModel& cost) {
  system.validate();
  settings.validate();
  validate(cost);

  const double demand = system.total_demand();
  const double gap = std::max(
      0.0, demand - system.esp_nonmanageable.sum() - system.manageable_budget);
  const double loss_allowance = (1.0 - system.round_trip_efficiency) * gap;
  const double start = settings.pv_start_gwp.value_or(std::max(
      initial_pv_guess(gap, loss_allowance, settings.capacity_factor), settings.pv_step_gwp));
  const double limit = system.pv_limit ? units::mw_to_gw(*system.pv_limit)
                                       : std::numeric_limits<double>::infinity();

  SweepResult result;
  std::vector<double> raw_storage;
  double running_min = std::numeric_limits<double>::infinity();
  bool done = false;
  std::size_t step = 0;
  const auto jobs = static_cast<std::size_t>(settings.jobs);

  while (!done && result.points.size() < static_cast<std::size_t>(settings.max_points) &&
         step < static_cast<std::size_t>(settings.max_points) * 4) {
    std::vector<double> batch;
    for (std::size_t i = 0; i < jobs; ++i) {
      const double pv = start + static_cast<double>(step + i) * settings.pv_step_gwp;
      if (pv > limit * (1.0 + 1e-12)) break;
      batch.push_back(pv);
    }
    if (batch.empty()) break;
    step += batch.size();

    std::vector<std::optional<double>> storage(batch.size());
    parallel_for(batch.size(), settings.jobs, [&](std::size_t i) {
      try {
        storage[i] = units::mwh_to_gwh(min_storage_for_full_coverage(
            system, units::gw_to_mw(batch[i]), settings.storage_tol));
      } catch (const InfeasibleError&) {
        storage[i] = std::nullopt;
      }
    });

    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (!storage[i]) {
        if (!result.points.empty()) {
          throw Error(fmt::format("PV {} GWp is infeasible after a feasible smaller PV",
                                  batch[i]));
        }
        ++result.skipped_infeasible;
        continue;
      }
      IsoquantPoint p;
      p.pv_gwp = batch[i];
      p.storage_gwh = *storage[i];
      if (p.storage_gwh > running_min) {
        p.storage_gwh = running_min;
        p.flagged = true;
      }
      const bool first = result.points.empty();
      const double previous = first ? 0.0 : result.points.back().storage_gwh;
      running_min = std::min(running_min, p.storage_gwh);
      result.points.push_back(p);
      if (!first &&
          (previous - p.storage_gwh) / settings.pv_step_gwp < settings.stop_threshold) {
        done = true;
        break;
      }
      if (result.points.size() >= static_cast<std::size_t>(settings.max_points)) {
        done = true;
        break;
      }
    }
  }

  if (result.points.empty()) {
    const double pv_mw = std::isfinite(limit) ? units::gw_to_mw(limit) : 0.0;
    const auto r = system.simulate(pv_mw, unbounded_storage(system, pv_mw));
    throw InfeasibleError(
        fmt::format("no PV capacity between {:.6g} and {:.6g} GWp serves the demand",
                    start, limit),
        r.unserved);
  }

  parallel_for(result.points.size(), settings.jobs, [&](std::size_t i) {
    auto& p = result.points[i];
    const bool flagged = p.flagged;
    static_cast<OperatingPoint&>(p) = evaluate_point(system, p.pv_gwp, p.storage_gwh, cost);
    p.flagged = flagged;
  });

  for (std::size_t i = 1; i < result.points.size(); ++i) {
    if (result.points[i].lcoe < result.points[result.least_cost_index].lcoe) {
      result.least_cost_index = i;
    }
  }

  // Minimum PV for which unbounded storage closes the balance.
  const double first_pv = result.points.front().pv_gwp;
  auto unbounded_ok = [&](double gwp) {
    const double mw = units::gw_to_mw(gwp);
    return system.simulate(mw, unbounded_storage(system, mw)).unserved <=
           unserved_limit(system);
  };
  double lo = 0.0, hi = first_pv;
  if (unbounded_ok(0.0)) {
    hi = 0.0;
  } else {
    while (hi - lo > settings.storage_tol * hi) {
      const double mid = 0.5 * (lo + hi);
      (unbounded_ok(mid) ? hi : lo) = mid;
    }
  }
  result.min_pv_asymptote_gwp = hi;
  result.min_storage_asymptote_gwh = result.points.back().storage_gwh;
  return result;
}

std::vector<CoveragePoint> coverage_vs_storage_curve(const ResidualSystem& system,
                                                     double pv_gwp,
                                                     const std::vector<double>& storage_grid_gwh,
                                                     const CostModel& cost, int jobs) {
  system.validate();
  if (!std::is_sorted(storage_grid_gwh.begin(), storage_grid_gwh.end())) {
    throw InputError("storage grid must be sorted ascending");
  }
  std::vector<CoveragePoint> curve(storage_grid_gwh.size());
  parallel_for(curve.size(), jobs, [&](std::size_t i) {
    static_cast<OperatingPoint&>(curve[i]) =
        evaluate_point(system, pv_gwp, storage_grid_gwh[i], cost);
  });
  return curve;
}

std::size_t least_cost_index(const std::vector<CoveragePoint>& curve) {
  if (curve.empty()) throw InputError("empty coverage curve");
  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].lcoe < curve[best].lcoe) best = i;
  }
  return best;
}

Portfolio with_manageability(const Portfolio& portfolio, const std::string& technology,
                             double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw InputError("manageability fraction must lie in [0, 1]");
  }
  const Technology* source = portfolio.find(technology);
  if (source == nullptr) {
    throw InputError("portfolio has no technology named '" + technology + "'");
  }
  Portfolio out = portfolio;
  Technology* tech = &out.technologies[static_cast<std::size_t>(
      source - portfolio.technologies.data())];

  const double series_energy = tech->nonmanageable_series.sum();
  const double total = tech->manageable_energy + series_energy;
  const double reference = total > 0.0 ? tech->manageable_energy / total : 0.0;
  const double fixed = (1.0 - fraction) * total;

  Trace<double> shape;
  if (series_energy > 0.0) {
    shape = tech->nonmanageable_series.values() / series_energy;
  } else {
    shape = Trace<double>::Constant(units::kHoursPerYear, 1.0 / units::kHoursPerYear);
  }
  tech->nonmanageable_series = HourlySeries(fixed * shape, tech->nonmanageable_series.year_label(),
                                            SignConstraint::kNonNegative);
  tech->manageable_energy = fraction * total;
  if (reference > 0.0) {
    tech->manageable_power_cap *= fraction / reference;
    if (tech->installed_power > 0.0) {
      tech->manageable_power_cap = std::min(tech->manageable_power_cap, tech->installed_power);
    }
  } else {
    tech->manageable_power_cap = fraction * tech->installed_power;
  }
  return out;
}

ResidualSystem with_portfolio(ResidualSystem base, const Portfolio& portfolio) {
  if (base.demand.size() != units::kHoursPerYear) {
    throw InputError("portfolio blocks need a full-year residual system");
  }
  base.esp_nonmanageable = portfolio.nonmanageable_series().values();
  base.manageable_budget = portfolio.manageable_energy();
  base.manageable_power_cap = portfolio.manageable_power_cap();
  return base;
}

std::vector<SensitivityRow> hydro_manageability_sweep(const ResidualSystem& base,
                                                      const Portfolio& portfolio,
                                                      const std::vector<double>& fractions,
                                                      const SweepSettings& settings,
                                                      const CostModel& cost,
                                                      const std::string& hydro_name) {
  std::vector<double> sorted = fractions;
  std::sort(sorted.begin(), sorted.end());
  for (double f : sorted) {
    if (!(f >= 0.0 && f <= 1.0)) throw InputError("hydro fractions must lie in [0, 1]");
  }
  SweepSettings inner = settings;
  inner.jobs = 1;

  std::vector<SensitivityRow> rows(sorted.size());
  parallel_for(sorted.size(), settings.jobs, [&](std::size_t i) {
    const auto system = with_portfolio(base, with_manageability(portfolio, hydro_name, sorted[i]));
    const auto sweep = pv_storage_isoquant(system, inner, cost);
    rows[i].hydro_fraction = sorted[i];
    rows[i].least_cost = sweep.least_cost();
    rows[i].points = sweep.points.size();
    rows[i].flagged = sweep.flagged_count();
  });
  return rows;
}

}  // namespace gridmix::opt
