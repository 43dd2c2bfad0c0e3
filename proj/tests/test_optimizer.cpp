#include <doctest.h>

#include "fixtures.hpp"
#include "gridmix/optimizer.hpp"

using namespace gridmix;
using namespace gridmix::opt;

namespace {

// One year of demand with the fixture load shape and a south-roof PV shape.
ResidualSystem full_year_system(double annual_demand_mwh) {
  ResidualSystem s;
  s.demand = annual_demand_mwh * fixtures::load_profile_fixture().weights();
  const auto days = fixtures::solar_canonical_days().days.at(pv::Orientation::kSouth);
  // kWh per kWp equals MWh per MWp; 10% shadow loss.
  s.pv_profile = 0.9 * pv::interpolate_canonical_days(days);
  s.esp_nonmanageable = Trace<double>::Zero(units::kHoursPerYear);
  return s;
}

}  // namespace

TEST_CASE("cost breakdown and LCOE") {
  const CostModel cost;
  const auto c = cost_breakdown(75.0, 298.0, cost);
  CHECK(c.pv_investment == doctest::Approx(75000.0));
  CHECK(c.storage_investment == doctest::Approx(29800.0));
  CHECK(c.pv_depreciation == doctest::Approx(3000.0));
  CHECK(c.storage_depreciation == doctest::Approx(29800.0 / 13.7));
  CHECK(lcoe(75.0, 298.0, 93.0, cost) == doctest::Approx((3000.0 + 29800.0 / 13.7) / 93.0));
  CHECK_THROWS_AS(lcoe(75.0, 298.0, 0.0, cost), InputError);
  CHECK_THROWS_AS(cost_breakdown(-1.0, 0.0, cost), InputError);
}

TEST_CASE("blended cost and storage hours") {
  CHECK(blended_cost(91.0, 55.2, 9.0, 56.4) == doctest::Approx(0.91 * 55.2 + 0.09 * 56.4));
  CHECK_THROWS_AS(blended_cost(0.0, 1.0, 0.0, 1.0), InputError);
  CHECK(storage_hours(435.0, 94.0) == doctest::Approx(4.6277).epsilon(1e-4));
  CHECK_THROWS_AS(storage_hours(1.0, 0.0), InputError);
}

TEST_CASE("initial PV guess") {
  // 100 TWh over 8,760 h at a 17% capacity factor.
  CHECK(initial_pv_guess(1e8, 0.0, 0.17) == doctest::Approx(67.15).epsilon(1e-3));
  CHECK(initial_pv_guess(1e8, 5e6, 0.17) == doctest::Approx(1.05e8 / (8760 * 0.17) / 1e3));
  CHECK_THROWS_AS(initial_pv_guess(1.0, 0.0, 0.0), InputError);
  CHECK_THROWS_AS(initial_pv_guess(-1.0, 0.0, 0.2), InputError);
}

TEST_CASE("minimum storage edge cases") {
  ResidualSystem s;
  s.demand = Trace<double>::Constant(4, 5.0);
  s.pv_profile = Trace<double>(4);
  s.pv_profile << 1.0, 1.0, 0.0, 0.0;
  s.esp_nonmanageable = Trace<double>::Zero(4);
  s.round_trip_efficiency = 1.0;

  SUBCASE("no storage needed") {
    s.pv_profile.setOnes();
    CHECK(min_storage_for_full_coverage(s, 5.0) == 0.0);
  }
  SUBCASE("annual energy short") {
    try {
      min_storage_for_full_coverage(s, 4.0);
      FAIL("expected infeasibility");
    } catch (const InfeasibleError& e) {
      CHECK(e.gap_mwh() == doctest::Approx(12.0));
    }
  }
  SUBCASE("exact energy with lossless storage") {
    CHECK(min_storage_for_full_coverage(s, 10.0, 1e-6) == doctest::Approx(10.0).epsilon(1e-5));
  }
  SUBCASE("losses make exact energy insufficient") {
    s.round_trip_efficiency = 0.9;
    CHECK_THROWS_AS(min_storage_for_full_coverage(s, 10.0), InfeasibleError);
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(min_storage_for_full_coverage(s, -1.0), InputError);
    CHECK_THROWS_AS(min_storage_for_full_coverage(s, 10.0, 0.0), InputError);
  }
}

TEST_CASE("residual system validation") {
  ResidualSystem s;
  CHECK_THROWS_AS(s.validate(), InputError);
  s.demand = Trace<double>::Ones(3);
  s.pv_profile = Trace<double>::Ones(2);
  s.esp_nonmanageable = Trace<double>::Zero(3);
  CHECK_THROWS_AS(s.validate(), InputError);
  s.pv_profile = Trace<double>::Ones(3);
  CHECK_NOTHROW(s.validate());
  s.round_trip_efficiency = 1.5;
  CHECK_THROWS_AS(s.validate(), InputError);
}

TEST_CASE("bisection agrees with a linear scan") {
  std::mt19937_64 rng(5);
  int compared = 0;
  for (int trial = 0; trial < 12; ++trial) {
    const auto s = fixtures::random_residual_system(rng);
    const double pv = 2.2 * s.total_demand() / s.pv_profile.sum();
    double found = 0.0;
    try {
      found = min_storage_for_full_coverage(s, pv);
    } catch (const InfeasibleError&) {
      continue;
    }
    const double deficit = (s.demand - s.esp_nonmanageable - pv * s.pv_profile).max(0.0).sum();
    const double step = deficit * 1e-4;
    const double scan = fixtures::linear_scan_min_storage(s, pv, step, 200000);
    CHECK(std::abs(found - scan) <= step + 1e-3 * scan);
    ++compared;
  }
  CHECK(compared >= 6);
}

TEST_CASE("coverage rises with storage and manageable budget") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = fixtures::random_residual_system(rng);
    const double pv = s.total_demand() / s.pv_profile.sum();
    double previous = -1.0;
    for (double storage : {0.0, 50.0, 200.0, 800.0, 3200.0}) {
      const double unserved = s.simulate(pv, storage).unserved;
      if (previous >= 0.0) CHECK(unserved <= previous + 1e-9);
      previous = unserved;
    }
    previous = -1.0;
    for (double budget : {0.0, 100.0, 1000.0, 10000.0}) {
      s.manageable_budget = budget;
      s.manageable_power_cap = 50.0;
      const double unserved = s.simulate(pv, 100.0).unserved;
      if (previous >= 0.0) CHECK(unserved <= previous + 1e-9);
      previous = unserved;
    }
  }
}

TEST_CASE("operating point accounting") {
  auto s = full_year_system(1e6);
  const double pv_gwp = 1.2;
  const auto p = evaluate_point(s, pv_gwp, 2.0, CostModel{});
  const auto r = s.simulate(1200.0, 2000.0);
  CHECK(p.useful_new_twh == doctest::Approx((r.direct_supplied + r.battery_discharged) / 1e6));
  CHECK(p.lcoe == doctest::Approx(lcoe(pv_gwp, 2.0, p.useful_new_twh, CostModel{})));
  CHECK(p.served_fraction == doctest::Approx(1.0 - r.unserved / r.total_demand));
  CHECK(p.rated_power_gw ==
        doctest::Approx(std::max(r.peak_charge_power, r.peak_discharge_power) / 1e3));

  const auto zero = evaluate_point(s, 0.0, 0.0, CostModel{});
  CHECK(zero.lcoe == 0.0);
  CHECK(zero.blended_cost == doctest::Approx(56.4));
  const auto idle = evaluate_point(s, 0.0, 1.0, CostModel{});
  CHECK(std::isinf(idle.lcoe));
}

TEST_CASE("existing generation has priority in the useful energy") {
  ResidualSystem s;
  s.demand = Trace<double>::Constant(4, 10.0);
  s.pv_profile = Trace<double>(4);
  s.pv_profile << 1.0, 1.0, 0.0, 0.0;
  s.esp_nonmanageable = Trace<double>(4);
  s.esp_nonmanageable << 4.0, 12.0, 0.0, 0.0;
  s.round_trip_efficiency = 1.0;
  // 6 MW of PV: hour 0 gives 6 to load, hour 1 spills 8 into the battery.
  const auto p = evaluate_point(s, 6e-3, 8e-3, CostModel{});
  CHECK(p.useful_new_twh * 1e6 == doctest::Approx(6.0 + 8.0));
}

TEST_CASE("isoquant sweep on a synthetic year") {
  auto s = full_year_system(2e6);
  s.pv_limit = 6000.0;
  SweepSettings settings;
  settings.pv_step_gwp = 0.1;
  settings.stop_threshold = 0.5;
  const auto sweep = pv_storage_isoquant(s, settings, CostModel{});
  REQUIRE(sweep.points.size() >= 3);
  for (std::size_t i = 1; i < sweep.points.size(); ++i) {
    CHECK(sweep.points[i].pv_gwp > sweep.points[i - 1].pv_gwp);
    CHECK(sweep.points[i].storage_gwh <= sweep.points[i - 1].storage_gwh);
  }
  for (const auto& p : sweep.points) {
    CHECK(p.served_fraction >= 1.0 - 1e-6);
    CHECK(sweep.least_cost().lcoe <= p.lcoe);
  }
  CHECK(sweep.min_pv_asymptote_gwp <= sweep.points.front().pv_gwp);
  CHECK(sweep.points.back().pv_gwp <= 6.0 + 1e-9);

  settings.jobs = 4;
  const auto parallel = pv_storage_isoquant(s, settings, CostModel{});
  REQUIRE(parallel.points.size() == sweep.points.size());
  for (std::size_t i = 0; i < sweep.points.size(); ++i) {
    CHECK(parallel.points[i].storage_gwh == sweep.points[i].storage_gwh);
    CHECK(parallel.points[i].lcoe == sweep.points[i].lcoe);
  }
}

TEST_CASE("least-cost point matches an exhaustive evaluation") {
  auto s = full_year_system(1e6);
  SweepSettings settings;
  settings.pv_step_gwp = 0.05;
  settings.stop_threshold = 0.2;
  const auto sweep = pv_storage_isoquant(s, settings, CostModel{});
  std::size_t best = 0;
  double best_lcoe = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sweep.points.size(); ++i) {
    const auto& p = sweep.points[i];
    const double storage =
        units::mwh_to_gwh(min_storage_for_full_coverage(s, units::gw_to_mw(p.pv_gwp)));
    if (!p.flagged) CHECK(storage == doctest::Approx(p.storage_gwh).epsilon(1e-9));
    const double cost = evaluate_point(s, p.pv_gwp, p.storage_gwh, CostModel{}).lcoe;
    if (cost < best_lcoe) {
      best_lcoe = cost;
      best = i;
    }
  }
  CHECK(sweep.least_cost_index == best);
}

TEST_CASE("sweep that never becomes feasible") {
  auto s = full_year_system(1e6);
  s.pv_limit = 100.0;  // 0.1 GWp cannot serve 1 TWh
  CHECK_THROWS_AS(pv_storage_isoquant(s, SweepSettings{}, CostModel{}), InfeasibleError);
  SweepSettings bad;
  bad.pv_step_gwp = 0.0;
  CHECK_THROWS_AS(pv_storage_isoquant(s, bad, CostModel{}), InputError);
}

TEST_CASE("coverage curve at fixed PV") {
  auto s = full_year_system(1e6);
  const std::vector<double> grid{0.0, 0.5, 1.0, 2.0, 4.0};
  const auto curve = coverage_vs_storage_curve(s, 1.0, grid, CostModel{}, 2);
  REQUIRE(curve.size() == grid.size());
  for (std::size_t i = 1; i < curve.size(); ++i) {
    CHECK(curve[i].served_fraction >= curve[i - 1].served_fraction - 1e-12);
  }
  CHECK(curve[least_cost_index(curve)].lcoe <= curve[0].lcoe);
  CHECK_THROWS_AS(coverage_vs_storage_curve(s, 1.0, {2.0, 1.0}, CostModel{}), InputError);
  CHECK_THROWS_AS(least_cost_index({}), InputError);
}

TEST_CASE("re-splitting hydro keeps its energy and shape") {
  const auto p = fixtures::portfolio_fixture(1e6, 0.85);
  const auto* hydro = p.find("hydro");
  const auto q = with_manageability(p, "hydro", 0.4);
  const auto* h = q.find("hydro");
  CHECK(h->total_energy() == doctest::Approx(hydro->total_energy()));
  CHECK(h->manageable_energy == doctest::Approx(0.4 * hydro->total_energy()));
  const double ratio = h->nonmanageable_series[1000] / hydro->nonmanageable_series[1000];
  CHECK(h->nonmanageable_series[5000] == doctest::Approx(ratio * hydro->nonmanageable_series[5000]));
  CHECK(h->manageable_power_cap == doctest::Approx(hydro->manageable_power_cap * 0.4 / 0.85));
  CHECK(q.find("wind")->nonmanageable_series == p.find("wind")->nonmanageable_series);

  // Fully manageable hydro cannot exceed the installed power.
  const auto full = with_manageability(p, "hydro", 1.0);
  CHECK(full.find("hydro")->manageable_power_cap <= hydro->installed_power);
  CHECK(full.find("hydro")->nonmanageable_series.sum() == doctest::Approx(0.0).epsilon(1e-9));

  // From zero manageability the cap follows the installed power.
  const auto none = with_manageability(p, "hydro", 0.0);
  const auto back = with_manageability(none, "hydro", 0.5);
  CHECK(back.find("hydro")->manageable_power_cap ==
        doctest::Approx(0.5 * hydro->installed_power));

  CHECK_THROWS_AS(with_manageability(p, "geothermal", 0.5), InputError);
  CHECK_THROWS_AS(with_manageability(p, "hydro", 1.2), InputError);
}

TEST_CASE("hydro manageability sensitivity") {
  auto base = full_year_system(1e6);
  const auto portfolio = fixtures::portfolio_fixture(1e6, 0.85);
  SweepSettings settings;
  settings.pv_step_gwp = 0.05;
  settings.stop_threshold = 0.2;
  settings.jobs = 2;
  const auto rows = hydro_manageability_sweep(base, portfolio, {0.85, 0.4, 0.7, 0.55},
                                              settings, CostModel{});
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].hydro_fraction == 0.4);
  CHECK(rows[3].hydro_fraction == 0.85);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].least_cost.lcoe <= rows[i - 1].least_cost.lcoe + 1e-9);
  }
  CHECK_THROWS_AS(hydro_manageability_sweep(base, portfolio, {1.5}, settings, CostModel{}),
                  InputError);
}
