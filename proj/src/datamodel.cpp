#include "gridmix/datamodel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_set>

#include "gridmix/csv.hpp"

namespace gridmix {

namespace {

std::string describe(const std::string& message, const std::string& file,
                     std::optional<std::size_t> row, const std::string& field) {
  std::string out;
  if (!file.empty()) out += file;
  if (row) out += fmt::format("{}row {}", out.empty() ? "" : ": ", *row);
  if (!field.empty()) out += fmt::format("{}field '{}'", out.empty() ? "" : ": ", field);
  if (!out.empty()) out += ": ";
  return out + message;
}

const std::vector<std::string> kMunicipalityHeader = {
    "id",          "name",         "province",      "region",
    "population",  "income_eur",   "cadastral_eur", "altitude_m",
    "climate_zone", "footprint_m2", "cars",          "vans",
    "buses",       "motorbikes",   "motorcycles",   "annual_demand_mwh"};

const std::vector<std::string> kSeriesHeader = {"hour", "value_mwh"};

void require_non_negative(double value, std::string_view field,
                          const std::string& id) {
  if (!(value >= 0.0)) {
    throw InputError(fmt::format("municipality '{}': {} must be non-negative, got {}",
                                 id, field, value),
                     {}, std::nullopt, std::string(field));
  }
}

}  // namespace

InputError::InputError(std::string message, std::string file,
                       std::optional<std::size_t> row, std::string field)
    : Error(describe(message, file, row, field)),
      file_(std::move(file)),
      row_(row),
      field_(std::move(field)) {}

std::string_view to_string(ClimateZone zone) {
  switch (zone) {
    case ClimateZone::kI: return "I";
    case ClimateZone::kII: return "II";
    case ClimateZone::kIII: return "III";
    case ClimateZone::kIV: return "IV";
    case ClimateZone::kV: return "V";
  }
  return "?";
}

std::optional<ClimateZone> parse_climate_zone(std::string_view text) {
  if (text.starts_with("Zone ")) text.remove_prefix(5);
  for (int i = 1; i <= kClimateZoneCount; ++i) {
    const auto zone = static_cast<ClimateZone>(i);
    if (text == to_string(zone)) return zone;
  }
  return std::nullopt;
}

std::string_view to_string(VehicleCategory category) {
  switch (category) {
    case VehicleCategory::kCars: return "cars";
    case VehicleCategory::kVans: return "vans";
    case VehicleCategory::kBuses: return "buses";
    case VehicleCategory::kMotorbikes: return "motorbikes";
    case VehicleCategory::kMotorcycles: return "motorcycles";
  }
  return "?";
}

std::optional<VehicleCategory> parse_vehicle_category(std::string_view text) {
  for (auto c : kVehicleCategories) {
    if (text == to_string(c)) return c;
  }
  return std::nullopt;
}

std::string_view to_string(Provenance provenance) {
  return provenance == Provenance::kRaw ? "raw" : "aggregated";
}

void validate(const Municipality& m) {
  if (m.id.empty()) {
    throw InputError("municipality id is empty", {}, std::nullopt, "id");
  }
  require_non_negative(m.population, "population", m.id);
  require_non_negative(m.income, "income_eur", m.id);
  require_non_negative(m.cadastral_value, "cadastral_eur", m.id);
  require_non_negative(m.footprint_area, "footprint_m2", m.id);
  if (!std::isfinite(m.altitude)) {
    throw InputError("altitude must be finite", {}, std::nullopt, "altitude_m");
  }
  for (const auto& [category, count] : m.vehicle_counts) {
    require_non_negative(count, to_string(category), m.id);
  }
  if (m.known_annual_demand) {
    require_non_negative(*m.known_annual_demand, "annual_demand_mwh", m.id);
  }
}

MunicipalitySet::MunicipalitySet(std::vector<Municipality> entries,
                                 Provenance provenance)
    : entries_(std::move(entries)), provenance_(provenance) {
  std::unordered_set<std::string> ids;
  for (const auto& m : entries_) {
    validate(m);
    if (!ids.insert(m.id).second) {
      throw InputError("duplicate municipality id '" + m.id + "'", {},
                       std::nullopt, "id");
    }
  }
}

const Municipality* MunicipalitySet::find(std::string_view id) const {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const Municipality& m) { return m.id == id; });
  return it == entries_.end() ? nullptr : &*it;
}

MunicipalitySet load_municipalities(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  table.require_header(kMunicipalityHeader);

  std::vector<Municipality> entries;
  entries.reserve(table.rows.size());
  std::unordered_set<std::string> ids;
  bool any_virtual = false;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    const std::size_t row = i + 1;
    auto number = [&](std::size_t col) {
      return csv::parse_double(r[col], table, row, kMunicipalityHeader[col]);
    };
    auto non_negative = [&](std::size_t col) {
      const double v = number(col);
      if (v < 0.0) {
        throw InputError(fmt::format("must be non-negative, got {}", r[col]),
                         table.source, row, kMunicipalityHeader[col]);
      }
      return v;
    };

    Municipality m;
    m.id = r[0];
    if (m.id.empty()) {
      throw InputError("missing id", table.source, row, "id");
    }
    if (!ids.insert(m.id).second) {
      throw InputError("duplicate id '" + m.id + "'", table.source, row, "id");
    }
    m.name = r[1];
    m.province = r[2];
    m.region = r[3];
    m.population = non_negative(4);
    m.income = non_negative(5);
    m.cadastral_value = non_negative(6);
    m.altitude = number(7);
    auto zone = parse_climate_zone(r[8]);
    if (!zone) {
      throw InputError("unknown climate zone '" + r[8] + "'", table.source, row,
                       "climate_zone");
    }
    m.climate_zone = *zone;
    m.footprint_area = non_negative(9);
    for (std::size_t k = 0; k < kVehicleCategories.size(); ++k) {
      m.vehicle_counts[kVehicleCategories[k]] = non_negative(10 + k);
    }
    if (!r[15].empty()) m.known_annual_demand = non_negative(15);
    m.is_virtual = m.id.starts_with(kVirtualIdPrefix);
    any_virtual = any_virtual || m.is_virtual;
    entries.push_back(std::move(m));
  }
  return MunicipalitySet(std::move(entries),
                         any_virtual ? Provenance::kAggregated : Provenance::kRaw);
}

void write_municipalities(const MunicipalitySet& set,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file", path.string());
  csv::write_row(out, kMunicipalityHeader);
  for (const auto& m : set.entries()) {
    std::vector<std::string> row = {
        m.id,
        m.name,
        m.province,
        m.region,
        csv::format_double(m.population),
        csv::format_double(m.income),
        csv::format_double(m.cadastral_value),
        csv::format_double(m.altitude),
        std::string(to_string(m.climate_zone)),
        csv::format_double(m.footprint_area)};
    for (auto c : kVehicleCategories) {
      auto it = m.vehicle_counts.find(c);
      row.push_back(csv::format_double(it == m.vehicle_counts.end() ? 0.0 : it->second));
    }
    row.push_back(m.known_annual_demand ? csv::format_double(*m.known_annual_demand)
                                        : std::string());
    csv::write_row(out, row);
  }
}

MunicipalitySet aggregate_small_municipalities(const MunicipalitySet& set,
                                               double threshold) {
  if (set.provenance() != Provenance::kRaw) {
    throw InputError("aggregation requires a raw municipality set");
  }
  if (!(threshold > 0.0)) {
    throw InputError("aggregation threshold must be positive");
  }

  struct Accumulator {
    std::string region;
    std::vector<const Municipality*> members;
  };
  std::map<std::string, Accumulator> by_province;
  std::vector<Municipality> out;
  for (const auto& m : set.entries()) {
    if (!m.is_virtual && m.population < threshold) {
      auto& acc = by_province[m.province];
      if (acc.members.empty()) acc.region = m.region;
      acc.members.push_back(&m);
    } else {
      out.push_back(m);
    }
  }

  for (const auto& [province, acc] : by_province) {
    Municipality v;
    v.id = std::string(kVirtualIdPrefix) + province;
    v.name = province + " (aggregated)";
    v.province = province;
    v.region = acc.region;
    v.is_virtual = true;

    std::array<int, kClimateZoneCount> zone_votes{};
    double weighted_income = 0.0, weighted_altitude = 0.0;
    double plain_income = 0.0, plain_altitude = 0.0;
    double demand = 0.0;
    bool all_demand_known = true;
    for (const auto* m : acc.members) {
      v.population += m->population;
      v.cadastral_value += m->cadastral_value;
      v.footprint_area += m->footprint_area;
      for (const auto& [c, n] : m->vehicle_counts) v.vehicle_counts[c] += n;
      weighted_income += m->population * m->income;
      weighted_altitude += m->population * m->altitude;
      plain_income += m->income;
      plain_altitude += m->altitude;
      ++zone_votes[zone_index(m->climate_zone)];
      if (m->known_annual_demand) {
        demand += *m->known_annual_demand;
      } else {
        all_demand_known = false;
      }
    }
    const auto n = static_cast<double>(acc.members.size());
    if (v.population > 0.0) {
      v.income = weighted_income / v.population;
      v.altitude = weighted_altitude / v.population;
    } else {
      v.income = plain_income / n;
      v.altitude = plain_altitude / n;
    }
    // max_element returns the first maximum: ties go to the lower zone.
    const auto modal = std::max_element(zone_votes.begin(), zone_votes.end());
    v.climate_zone = static_cast<ClimateZone>(modal - zone_votes.begin() + 1);
    // A partially known total would masquerade as a training observation.
    if (all_demand_known) v.known_annual_demand = demand;
    out.push_back(std::move(v));
  }
  return MunicipalitySet(std::move(out), Provenance::kAggregated);
}

HourlySeries load_hourly_series(const std::filesystem::path& path,
                                SignConstraint sign) {
  const auto table = csv::read(path);
  table.require_header(kSeriesHeader);
  if (table.rows.size() != static_cast<std::size_t>(units::kHoursPerYear)) {
    throw InputError(fmt::format("expected 8760 data rows, found {}",
                                 table.rows.size()),
                     table.source);
  }
  HourlySeries::Values values(units::kHoursPerYear);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto hour = csv::parse_integer(table.rows[i][0], table, i + 1, "hour");
    if (hour != static_cast<long long>(i)) {
      throw InputError(fmt::format("expected hour {}, found {}", i, hour),
                       table.source, i + 1, "hour");
    }
    const double v = csv::parse_double(table.rows[i][1], table, i + 1, "value_mwh");
    if (sign == SignConstraint::kNonNegative && v < 0.0) {
      throw InputError(fmt::format("negative value {} in non-negative series", v),
                       table.source, i + 1, "value_mwh");
    }
    values(static_cast<Eigen::Index>(i)) = v;
  }
  return HourlySeries(values, path.stem().string(), sign);
}

void write_hourly_series(const HourlySeries& series,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file", path.string());
  csv::write_row(out, kSeriesHeader);
  for (Eigen::Index h = 0; h < series.size(); ++h) {
    csv::write_row(out, {std::to_string(h), csv::format_double(series[h])});
  }
}

double Portfolio::manageable_energy() const {
  double total = 0.0;
  for (const auto& t : technologies) total += t.manageable_energy;
  return total;
}

double Portfolio::manageable_power_cap() const {
  double total = 0.0;
  for (const auto& t : technologies) total += t.manageable_power_cap;
  return total;
}

HourlySeries Portfolio::nonmanageable_series() const {
  auto total = HourlySeries::zeros();
  for (const auto& t : technologies) total += t.nonmanageable_series;
  return total;
}

const Technology* Portfolio::find(std::string_view name) const {
  for (const auto& t : technologies) {
    if (t.name.size() == name.size() &&
        std::equal(t.name.begin(), t.name.end(), name.begin(), [](char a, char b) {
          return std::tolower(static_cast<unsigned char>(a)) ==
                 std::tolower(static_cast<unsigned char>(b));
        })) {
      return &t;
    }
  }
  return nullptr;
}

void validate(const Portfolio& portfolio) {
  std::set<std::string> names;
  for (const auto& t : portfolio.technologies) {
    if (!names.insert(t.name).second) {
      throw InputError("duplicate technology '" + t.name + "'");
    }
    if (!(t.manageable_energy >= 0.0) || !(t.manageable_power_cap >= 0.0) ||
        !(t.installed_power >= 0.0)) {
      throw InputError("technology '" + t.name +
                       "': energy, power and caps must be non-negative");
    }
    if (!t.nonmanageable_series.is_non_negative()) {
      throw InputError("technology '" + t.name +
                       "': non-manageable series must be non-negative");
    }
  }
}

Portfolio load_portfolio(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  table.require_header({"technology", "installed_gw", "manageable_twh",
                        "manageable_cap_gw", "series_file"});
  Portfolio portfolio;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    Technology t;
    t.name = r[0];
    t.installed_power = units::gw_to_mw(csv::parse_double(r[1], table, i + 1, "installed_gw"));
    t.manageable_energy =
        units::twh_to_mwh(csv::parse_double(r[2], table, i + 1, "manageable_twh"));
    t.manageable_power_cap =
        units::gw_to_mw(csv::parse_double(r[3], table, i + 1, "manageable_cap_gw"));
    if (!r[4].empty()) {
      t.nonmanageable_series = load_hourly_series(path.parent_path() / r[4],
                                                  SignConstraint::kNonNegative);
    }
    portfolio.technologies.push_back(std::move(t));
  }
  try {
    validate(portfolio);
  } catch (const InputError& e) {
    throw InputError(e.what(), path.string());
  }
  return portfolio;
}

void validate(const StorageSpec& storage) {
  if (!(storage.capacity >= 0.0)) {
    throw InputError("storage capacity must be non-negative");
  }
  if (!(storage.round_trip_efficiency > 0.0 && storage.round_trip_efficiency <= 1.0)) {
    throw InputError("round-trip efficiency must lie in (0, 1]");
  }
  if (!(storage.unit_cost >= 0.0) || !(storage.lifetime > 0.0)) {
    throw InputError("storage unit cost must be non-negative and lifetime positive");
  }
}

void validate(const CostModel& cost) {
  if (!(cost.pv_unit_cost > 0.0) || !(cost.pv_lifetime > 0.0) ||
      !(cost.storage_unit_cost > 0.0) || !(cost.storage_lifetime > 0.0) ||
      !(cost.wholesale_price > 0.0)) {
    throw InputError("cost model parameters must all be positive");
  }
}

}  // namespace gridmix
