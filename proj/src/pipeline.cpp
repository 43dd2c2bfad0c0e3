#include "gridmix/pipeline.hpp"

#include <fmt/format.h>

#include <fstream>

#include "gridmix/csv.hpp"

namespace gridmix::pipeline {

namespace fs = std::filesystem;

namespace {

fs::path require_file(const fs::path& dir, const char* name) {
  const auto path = dir / name;
  if (!fs::is_regular_file(path)) {
    throw InputError(fmt::format("required file '{}' not found in {}", name, dir.string()),
                     path.string());
  }
  return path;
}

// Municipalities are expanded to hourly series in blocks so that only the
// per-province and per-region sums stay resident.
constexpr std::size_t kBlock = 128;

void accumulate(std::map<std::string, GroupSeries>& groups,
                const std::map<std::string, HourlySeries>& demand,
                const std::map<std::string, HourlySeries>& production) {
  for (const auto& [key, series] : demand) {
    auto [it, inserted] = groups.try_emplace(key, GroupSeries{series, production.at(key), 0.0});
    if (!inserted) {
      it->second.demand += series;
      it->second.production += production.at(key);
    }
  }
}

}  // namespace

Bundle load_bundle(const fs::path& dir, const std::string& portfolio) {
  if (!fs::is_directory(dir)) {
    throw InputError("data directory does not exist", dir.string());
  }
  Bundle b;
  auto track = [&](fs::path p) {
    b.sources.push_back(p);
    return p;
  };
  b.municipalities = load_municipalities(track(require_file(dir, files::kMunicipalities)));
  b.load_profile = demand::load_profile(track(require_file(dir, files::kLoadProfile)));
  b.ev_profile = demand::load_profile(track(require_file(dir, files::kEvProfile)));
  b.yields = pv::load_canonical_yields(track(require_file(dir, files::kCanonicalYields)));
  b.rooftop_split = pv::load_rooftop_split(track(require_file(dir, files::kRooftopSplit)));
  b.warnings = b.rooftop_split.warnings();

  if (fs::is_regular_file(dir / files::kRegionalTotals)) {
    b.regional_totals = demand::load_regional_totals(track(dir / files::kRegionalTotals));
  }
  if (!portfolio.empty() && fs::is_regular_file(dir / portfolio)) {
    const auto path = track(dir / portfolio);
    b.portfolio = load_portfolio(path);
    const auto table = csv::read(path);
    for (const auto& row : table.rows) {
      if (!row[4].empty()) track(path.parent_path() / row[4]);
    }
  }
  return b;
}

std::vector<fs::path> write_bundle(const Bundle& bundle, const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<fs::path> written;
  auto out = [&](const char* name) {
    written.push_back(dir / name);
    return dir / name;
  };
  write_municipalities(bundle.municipalities, out(files::kMunicipalities));
  demand::write_profile(bundle.load_profile, out(files::kLoadProfile));
  demand::write_profile(bundle.ev_profile, out(files::kEvProfile));
  pv::write_canonical_yields(bundle.yields, out(files::kCanonicalYields));
  pv::write_rooftop_split(bundle.rooftop_split, out(files::kRooftopSplit));

  if (!bundle.regional_totals.empty()) {
    std::ofstream f(out(files::kRegionalTotals), std::ios::binary);
    csv::write_row(f, {"region", "annual_mwh"});
    for (const auto& [region, total] : bundle.regional_totals) {
      csv::write_row(f, {region, csv::format_double(total)});
    }
  }
  if (bundle.portfolio) {
    std::ofstream f(out(files::kPortfolio), std::ios::binary);
    csv::write_row(f, {"technology", "installed_gw", "manageable_twh", "manageable_cap_gw",
                       "series_file"});
    for (std::size_t i = 0; i < bundle.portfolio->technologies.size(); ++i) {
      const auto& t = bundle.portfolio->technologies[i];
      const std::string series_name = fmt::format("portfolio_series_{}.csv", i);
      write_hourly_series(t.nonmanageable_series, dir / series_name);
      written.push_back(dir / series_name);
      csv::write_row(f, {t.name, csv::format_double(units::mw_to_gw(t.installed_power)),
                         csv::format_double(units::mwh_to_twh(t.manageable_energy)),
                         csv::format_double(units::mw_to_gw(t.manageable_power_cap)),
                         series_name});
    }
  }
  return written;
}

Trace<double> NationalModel::pv_profile() const {
  if (pv_capacity_mwp <= 0.0) return Trace<double>::Zero(units::kHoursPerYear);
  return pv_production.values() / pv_capacity_mwp;
}

NationalModel build_national_model(const Bundle& bundle, const ScenarioConfig& scenario) {
  scenario.validate();
  const auto& entries = bundle.municipalities.entries();
  NationalModel model;

  // Annual base demand: known values, regression for the rest, then scaling.
  std::vector<Municipality> training;
  bool needs_prediction = false;
  for (const auto& m : entries) {
    if (m.known_annual_demand) {
      training.push_back(m);
    } else {
      needs_prediction = true;
    }
  }
  std::vector<bool> extrapolated(entries.size(), false);
  std::vector<demand::DemandEstimate> estimates;
  estimates.reserve(entries.size());
  if (needs_prediction) {
    model.regression = demand::fit_demand_regression(MunicipalitySet(std::move(training)));
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& m = entries[i];
    double annual = 0.0;
    if (m.known_annual_demand) {
      annual = *m.known_annual_demand;
    } else {
      const auto p = demand::predict_annual_demand(*model.regression, m);
      annual = p.annual_mwh;
      extrapolated[i] = p.extrapolated;
    }
    estimates.push_back({m.id, m.region, annual});
  }
  if (!bundle.regional_totals.empty()) {
    estimates = demand::scale_to_regional_totals(std::move(estimates), bundle.regional_totals);
  }

  std::map<std::string, std::map<pv::Orientation, Trace<double>>> yields;
  const auto ev_table = demand::EvConversionTable::spanish_fleet();

  model.base_demand = HourlySeries::zeros(scenario.year_label);
  model.ev_demand = HourlySeries::zeros(scenario.year_label);
  model.pv_production = HourlySeries::zeros(scenario.year_label);
  model.municipalities.reserve(entries.size());

  for (std::size_t begin = 0; begin < entries.size(); begin += kBlock) {
    const std::size_t end = std::min(entries.size(), begin + kBlock);
    std::vector<pv::MunicipalSeries> demand_block, production_block;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& m = entries[i];
      MunicipalSummary s;
      s.municipality = &m;
      s.base_demand_mwh = estimates[i].annual_mwh;
      s.extrapolated = extrapolated[i];
      model.extrapolated_count += s.extrapolated ? 1 : 0;

      auto base = demand::hourly_demand(s.base_demand_mwh, bundle.load_profile);
      s.equivalent_cars = demand::equivalent_car_fleet(m.vehicle_counts, ev_table);
      auto ev = demand::ev_demand(s.equivalent_cars, scenario.per_car_annual_mwh,
                                  bundle.ev_profile);
      model.base_demand += base;
      model.ev_demand += ev;
      if (scenario.include_ev) {
        s.ev_demand_mwh = ev.sum();
        base += ev;
      }

      auto yit = yields.find(m.region);
      if (yit == yields.end()) {
        auto table = bundle.yields.find(m.region);
        if (table == bundle.yields.end()) {
          throw InputError("no canonical yields for region '" + m.region +
                           "' (municipality '" + m.id + "')");
        }
        yit = yields.emplace(m.region, pv::interpolate_canonical_days(table->second)).first;
      }
      const auto inventory = pv::classify_rooftops(m, bundle.rooftop_split, scenario.pv);
      const auto capacity = pv::installable_capacity(inventory, scenario.pv);
      auto production = pv::hourly_pv_production(capacity, yit->second, scenario.pv);
      s.capacity_mwp = units::kw_to_mw(capacity.producing_kwp());
      s.north_capacity_mwp = units::kw_to_mw(capacity.north_kwp());
      s.production_mwh = production.sum();
      model.pv_production += production;
      model.pv_capacity_mwp += s.capacity_mwp;

      demand_block.push_back({&m, std::move(base)});
      production_block.push_back({&m, std::move(production)});
      model.municipalities.push_back(s);
    }
    using pv::AggregationLevel;
    accumulate(model.provinces, pv::aggregate_production(demand_block, AggregationLevel::kProvince),
               pv::aggregate_production(production_block, AggregationLevel::kProvince));
    accumulate(model.regions, pv::aggregate_production(demand_block, AggregationLevel::kRegion),
               pv::aggregate_production(production_block, AggregationLevel::kRegion));
  }
  for (const auto& s : model.municipalities) {
    model.provinces.at(s.municipality->province).capacity_mwp += s.capacity_mwp;
    model.regions.at(s.municipality->region).capacity_mwp += s.capacity_mwp;
  }

  model.demand = model.base_demand;
  if (scenario.include_ev) model.demand += model.ev_demand;
  return model;
}

Portfolio scenario_portfolio(const Bundle& bundle, const ScenarioConfig& scenario) {
  if (!bundle.portfolio) {
    throw InputError("brownfield scenario needs a portfolio file ('" + scenario.portfolio + "')");
  }
  if (!bundle.portfolio->find(scenario.hydro_technology)) return *bundle.portfolio;
  return opt::with_manageability(*bundle.portfolio, scenario.hydro_technology,
                                 scenario.hydro_manageability);
}

opt::ResidualSystem residual_system(const NationalModel& model, const Bundle& bundle,
                                    const ScenarioConfig& scenario) {
  opt::ResidualSystem system;
  system.demand = model.demand.values();
  system.pv_profile = model.pv_profile();
  system.esp_nonmanageable = Trace<double>::Zero(units::kHoursPerYear);
  system.round_trip_efficiency = scenario.storage.round_trip_efficiency;
  system.pv_limit = model.pv_capacity_mwp;
  if (scenario.mode == Mode::kBrownfield) {
    system = opt::with_portfolio(std::move(system), scenario_portfolio(bundle, scenario));
  }
  system.validate();
  return system;
}

}  // namespace gridmix::pipeline
