#include "fixtures.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <numbers>

#include "gridmix/csv.hpp"

namespace fixtures {

using namespace gridmix;
namespace fs = std::filesystem;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Incidence cosine on a tilted plane; azimuth 0 is south, west positive.
double cos_incidence(double lat, double decl, double omega, double tilt, double azimuth) {
  return std::sin(decl) * std::sin(lat) * std::cos(tilt) -
         std::sin(decl) * std::cos(lat) * std::sin(tilt) * std::cos(azimuth) +
         std::cos(decl) * std::cos(lat) * std::cos(tilt) * std::cos(omega) +
         std::cos(decl) * std::sin(lat) * std::sin(tilt) * std::cos(azimuth) * std::cos(omega) +
         std::cos(decl) * std::sin(tilt) * std::sin(azimuth) * std::sin(omega);
}

}  // namespace

Eigen::VectorXd reference_coefficients() {
  Eigen::VectorXd beta(demand::kRegressorCount);
  beta << 350.0, 3.2, 0.015, 2.5e-7, -0.4, 180.0, 420.0, -150.0, 260.0;
  return beta;
}

std::vector<Municipality> synthetic_municipalities(std::uint64_t seed, int count, int regions) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_pop(std::log(1200.0), std::log(250000.0));
  std::uniform_real_distribution<double> income(8000.0, 22000.0);
  std::uniform_real_distribution<double> value_per_person(2e4, 9e4);
  std::uniform_real_distribution<double> altitude(0.0, 1100.0);
  std::uniform_real_distribution<double> roof_per_person(45.0, 75.0);
  const auto beta = reference_coefficients();

  std::vector<Municipality> out;
  for (int i = 0; i < count; ++i) {
    Municipality m;
    m.id = fmt::format("M{:04}", i);
    m.name = fmt::format("Town {}", i);
    const int region = i % regions;
    m.region = fmt::format("R{}", region);
    m.province = fmt::format("P{}{}", region, (i / regions) % 2);
    m.population = std::round(std::exp(log_pop(rng)));
    m.income = std::round(income(rng));
    m.cadastral_value = std::round(m.population * value_per_person(rng));
    m.altitude = std::round(altitude(rng));
    m.climate_zone = static_cast<ClimateZone>(1 + i % 5);
    m.footprint_area = std::round(m.population * roof_per_person(rng));
    // Fleet sized so EV energy is about a quarter of the base demand.
    m.vehicle_counts = {{VehicleCategory::kCars, std::round(0.29 * m.population)},
                        {VehicleCategory::kVans, std::round(0.036 * m.population)},
                        {VehicleCategory::kBuses, std::round(0.0007 * m.population)},
                        {VehicleCategory::kMotorbikes, std::round(0.03 * m.population)},
                        {VehicleCategory::kMotorcycles, std::round(0.012 * m.population)}};
    m.known_annual_demand = demand::design_row(m).dot(beta);
    out.push_back(std::move(m));
  }
  return out;
}

pv::CanonicalYieldTable solar_canonical_days(const SolarSite& site) {
  struct Plane {
    pv::Orientation orientation;
    double tilt;
    double azimuth;
  };
  const Plane planes[] = {{pv::Orientation::kFlat, 10.0, 0.0},
                          {pv::Orientation::kSouth, 25.0, 0.0},
                          {pv::Orientation::kEast, 25.0, -90.0},
                          {pv::Orientation::kWest, 25.0, 90.0},
                          {pv::Orientation::kNorth, 25.0, 180.0}};
  const double lat = site.latitude_deg * kDeg;
  const auto& anchors = pv::canonical_anchor_days();

  pv::CanonicalYieldTable table;
  for (const auto& plane : planes) table.days[plane.orientation].setZero();
  for (int month = 0; month < 12; ++month) {
    const double n = anchors[month] + 1;
    const double decl = 23.45 * kDeg * std::sin(2.0 * std::numbers::pi * (284.0 + n) / 365.0);
    std::array<double, 24> cos_zenith{};
    double shape_sum = 0.0;
    for (int h = 0; h < 24; ++h) {
      const double omega = 15.0 * kDeg * (h + 0.5 - 12.0);
      cos_zenith[h] = std::max(0.0, cos_incidence(lat, decl, omega, 0.0, 0.0));
      shape_sum += cos_zenith[h];
    }
    for (int h = 0; h < 24; ++h) {
      const double ghi = site.monthly_ghi[month] * cos_zenith[h] / shape_sum;
      if (ghi <= 0.0) continue;
      const double omega = 15.0 * kDeg * (h + 0.5 - 12.0);
      for (const auto& plane : planes) {
        const double tilt = plane.tilt * kDeg;
        const double ci =
            std::max(0.0, cos_incidence(lat, decl, omega, tilt, plane.azimuth * kDeg));
        const double beam_ratio = cos_zenith[h] > 0.05 ? std::min(ci / cos_zenith[h], 5.0) : 0.0;
        const double poa = ghi * (site.diffuse_fraction * (1.0 + std::cos(tilt)) / 2.0 +
                                  (1.0 - site.diffuse_fraction) * beam_ratio);
        table.days[plane.orientation](month, h) = poa * site.performance_ratio;
      }
    }
  }
  return table;
}

demand::LoadProfile load_profile_fixture() {
  Trace<double> w(units::kHoursPerYear);
  for (int h = 0; h < units::kHoursPerYear; ++h) {
    const int day = h / 24;
    const int hod = h % 24;
    const double daily = 1.0 + 0.35 * std::sin(2.0 * std::numbers::pi * (hod - 8) / 24.0);
    const double seasonal = 1.0 + 0.15 * std::cos(2.0 * std::numbers::pi * day / 365.0);
    const double weekly = (day % 7) >= 5 ? 0.85 : 1.0;
    w(h) = daily * seasonal * weekly;
  }
  return demand::LoadProfile::normalized(w / w.sum());
}

demand::LoadProfile ev_profile_fixture() {
  Trace<double> w(units::kHoursPerYear);
  for (int h = 0; h < units::kHoursPerYear; ++h) {
    const int hod = h % 24;
    w(h) = (hod >= 20 || hod < 6) ? 3.0 : (hod >= 10 && hod < 16 ? 1.0 : 0.4);
  }
  return demand::LoadProfile::normalized(w / w.sum());
}

Portfolio portfolio_fixture(double annual_demand_mwh, double hydro_manageability,
                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.18);
  Trace<double> wind(units::kHoursPerYear);
  double state = 0.3;
  for (int h = 0; h < units::kHoursPerYear; ++h) {
    state = std::clamp(0.95 * state + 0.05 * 0.3 + 0.25 * noise(rng) * 0.3, 0.0, 1.0);
    wind(h) = state;
  }
  wind *= 0.50 * annual_demand_mwh / wind.sum();

  Trace<double> river(units::kHoursPerYear);
  for (int h = 0; h < units::kHoursPerYear; ++h) {
    const double day = h / 24;
    river(h) = 1.0 + 0.6 * std::cos(2.0 * std::numbers::pi * (day - 100.0) / 365.0);
  }
  const double hydro_total = 0.14 * annual_demand_mwh;
  const double hydro_power = hydro_total / units::kHoursPerYear / 0.25;
  river *= (1.0 - hydro_manageability) * hydro_total / river.sum();

  const double biomass = 0.02 * annual_demand_mwh;
  const double biomass_power = biomass / units::kHoursPerYear / 0.8;

  Portfolio p;
  p.technologies.push_back(
      {"wind", wind.maxCoeff(), 0.0, HourlySeries(wind, "2018"), 0.0});
  p.technologies.push_back({"hydro", hydro_power, hydro_manageability * hydro_total,
                            HourlySeries(river, "2018"), hydro_manageability * hydro_power});
  p.technologies.push_back(
      {"biomass", biomass_power, biomass, HourlySeries::zeros("2018"), biomass_power});
  return p;
}

double write_fixture_dir(const fs::path& dir, const FixtureOptions& o) {
  fs::create_directories(dir);
  auto entries = synthetic_municipalities(o.seed, o.municipalities);
  std::mt19937_64 rng(o.seed + 1);
  std::uniform_real_distribution<double> small_pop(150.0, 950.0);
  for (int i = 0; i < o.small_municipalities; ++i) {
    auto m = entries[i % entries.size()];
    m.id = fmt::format("S{:04}", i);
    m.name = fmt::format("Hamlet {}", i);
    m.population = std::round(small_pop(rng));
    m.cadastral_value = std::round(m.population * 3e4);
    m.footprint_area = std::round(m.population * 70.0);
    for (auto& [category, count] : m.vehicle_counts) count = std::round(count * m.population / 1e5);
    m.known_annual_demand = demand::design_row(m).dot(reference_coefficients());
    entries.push_back(std::move(m));
  }
  double total = 0.0;
  for (const auto& m : entries) total += *m.known_annual_demand;
  std::bernoulli_distribution drop(o.unknown_demand_share);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    // Keep enough known rows in every zone for the regression.
    if (i >= 15 && drop(rng)) entries[i].known_annual_demand.reset();
  }
  write_municipalities(MunicipalitySet(entries), dir / "municipalities.csv");
  demand::write_profile(load_profile_fixture(), dir / "load_profile.csv");
  demand::write_profile(ev_profile_fixture(), dir / "ev_profile.csv");

  pv::RegionalYields yields;
  for (int r = 0; r < 3; ++r) {
    SolarSite site;
    site.latitude_deg = 37.5 + 2.5 * r;
    for (auto& g : site.monthly_ghi) g *= 1.0 - 0.05 * r;
    yields[fmt::format("R{}", r)] = solar_canonical_days(site);
  }
  pv::write_canonical_yields(yields, dir / "canonical_yields.csv");
  pv::write_rooftop_split(pv::RooftopSplitTable::spanish_survey(), dir / "rooftop_split.csv");
  {
    // Restore the survey's unnormalized zone I large-city row.
    std::ifstream in(dir / "rooftop_split.csv", std::ios::binary);
    std::stringstream text;
    text << in.rdbuf();
    std::string body = text.str();
    const std::string key = "I,100000+,";
    const auto start = body.find("\n" + key) + 1;
    const auto end = body.find('\n', start);
    body.replace(start, end - start, key + "0.2,0.9");
    in.close();
    std::ofstream(dir / "rooftop_split.csv", std::ios::binary) << body;
  }

  if (o.regional_totals) {
    std::map<std::string, double> totals;
    for (const auto& m : entries) totals[m.region] += *m.known_annual_demand;
    std::ofstream f(dir / "regional_totals.csv", std::ios::binary);
    csv::write_row(f, {"region", "annual_mwh"});
    for (const auto& [region, value] : totals) {
      csv::write_row(f, {region, csv::format_double(value * 1.05)});
    }
  }
  if (o.portfolio) {
    const auto portfolio = portfolio_fixture(total, 0.85, o.seed);
    std::ofstream f(dir / "portfolio.csv", std::ios::binary);
    csv::write_row(f, {"technology", "installed_gw", "manageable_twh", "manageable_cap_gw",
                       "series_file"});
    for (const auto& t : portfolio.technologies) {
      const auto name = "series_" + t.name + ".csv";
      write_hourly_series(t.nonmanageable_series, dir / name);
      csv::write_row(f, {t.name, csv::format_double(units::mw_to_gw(t.installed_power)),
                         csv::format_double(units::mwh_to_twh(t.manageable_energy)),
                         csv::format_double(units::mw_to_gw(t.manageable_power_cap)), name});
    }
  }
  return total;
}

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("gridmix_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

opt::ResidualSystem random_residual_system(std::mt19937_64& rng,
                                           const RandomSystemOptions& o) {
  std::uniform_int_distribution<int> hours_dist(o.min_hours, o.max_hours);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = hours_dist(rng);

  opt::ResidualSystem s;
  s.demand.resize(n);
  s.pv_profile.resize(n);
  s.esp_nonmanageable = Trace<double>::Zero(n);
  const double base = 50.0 + 100.0 * u(rng);
  const double cloud = u(rng);
  for (int h = 0; h < n; ++h) {
    const int hod = h % 24;
    s.demand(h) = base * (0.7 + 0.6 * u(rng));
    const double sun = std::max(0.0, std::sin(std::numbers::pi * (hod - 6) / 12.0));
    s.pv_profile(h) = sun * (1.0 - 0.7 * cloud * u(rng));
    if (o.with_esp) s.esp_nonmanageable(h) = base * 0.4 * u(rng);
  }
  if (o.with_esp) {
    s.manageable_budget = s.demand.sum() * 0.1 * u(rng);
    s.manageable_power_cap = base * 0.3 * u(rng);
  }
  s.round_trip_efficiency = 0.85 + 0.15 * u(rng);
  return s;
}

double linear_scan_min_storage(const opt::ResidualSystem& system, double pv_mw, double step,
                               int max_steps) {
  for (int k = 0; k <= max_steps; ++k) {
    if (opt::fully_covered(system, pv_mw, k * step)) return k * step;
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace fixtures
