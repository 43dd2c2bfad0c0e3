#include "gridmix/rooftop_pv.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>

#include "gridmix/csv.hpp"

namespace gridmix::pv {

std::string_view to_string(PopulationBand band) {
  switch (band) {
    case PopulationBand::kSmall: return "1000-10000";
    case PopulationBand::kMedium: return "10000-100000";
    case PopulationBand::kLarge: return "100000+";
  }
  return "?";
}

std::optional<PopulationBand> parse_population_band(std::string_view text) {
  for (auto b : {PopulationBand::kSmall, PopulationBand::kMedium, PopulationBand::kLarge}) {
    if (text == to_string(b)) return b;
  }
  return std::nullopt;
}

PopulationBand population_band(const Municipality& m) {
  if (m.is_virtual) return PopulationBand::kSmall;
  if (m.population < 1e3) {
    throw InputError("municipality '" + m.id +
                     "' is below 1,000 inhabitants; aggregate it first");
  }
  if (m.population < 1e4) return PopulationBand::kSmall;
  if (m.population < 1e5) return PopulationBand::kMedium;
  return PopulationBand::kLarge;
}

std::string_view to_string(Orientation o) {
  switch (o) {
    case Orientation::kFlat: return "flat";
    case Orientation::kSouth: return "south";
    case Orientation::kEast: return "east";
    case Orientation::kWest: return "west";
    case Orientation::kNorth: return "north";
  }
  return "?";
}

std::optional<Orientation> parse_orientation(std::string_view text) {
  for (auto o : kOrientations) {
    if (text == to_string(o)) return o;
  }
  return std::nullopt;
}

RooftopSplitTable::RooftopSplitTable(
    std::map<std::pair<ClimateZone, PopulationBand>, RoofSplit> rows)
    : rows_(std::move(rows)) {
  for (auto& [key, split] : rows_) {
    if (!(split.flat >= 0.0) || !(split.pitched >= 0.0)) {
      throw InputError(fmt::format("rooftop split for zone {} band {} has negative fractions",
                                   to_string(key.first), to_string(key.second)));
    }
    const double sum = split.flat + split.pitched;
    if (!(sum > 0.0)) {
      throw InputError(fmt::format("rooftop split for zone {} band {} sums to zero",
                                   to_string(key.first), to_string(key.second)));
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      warnings_.push_back(fmt::format(
          "rooftop split for zone {} band {} sums to {}; renormalized", to_string(key.first),
          to_string(key.second), sum));
      split.flat /= sum;
      split.pitched /= sum;
    }
  }
}

RooftopSplitTable RooftopSplitTable::spanish_survey() {
  using Z = ClimateZone;
  using B = PopulationBand;
  // The zone I large-city row is published as 20% / 90% and gets renormalized.
  return RooftopSplitTable({
      {{Z::kI, B::kSmall}, {0.10, 0.90}},   {{Z::kI, B::kMedium}, {0.10, 0.90}},
      {{Z::kI, B::kLarge}, {0.20, 0.90}},   {{Z::kII, B::kSmall}, {0.10, 0.90}},
      {{Z::kII, B::kMedium}, {0.20, 0.80}}, {{Z::kII, B::kLarge}, {0.40, 0.60}},
      {{Z::kIII, B::kSmall}, {0.20, 0.80}}, {{Z::kIII, B::kMedium}, {0.30, 0.70}},
      {{Z::kIII, B::kLarge}, {0.30, 0.70}}, {{Z::kIV, B::kSmall}, {0.10, 0.90}},
      {{Z::kIV, B::kMedium}, {0.30, 0.70}}, {{Z::kIV, B::kLarge}, {0.50, 0.50}},
      {{Z::kV, B::kSmall}, {0.20, 0.80}},   {{Z::kV, B::kMedium}, {0.40, 0.60}},
      {{Z::kV, B::kLarge}, {0.70, 0.30}},
  });
}

const RoofSplit& RooftopSplitTable::at(ClimateZone zone, PopulationBand band) const {
  auto it = rows_.find({zone, band});
  if (it == rows_.end()) {
    throw InputError(fmt::format("rooftop split table has no entry for zone {} band {}",
                                 to_string(zone), to_string(band)));
  }
  return it->second;
}

RooftopSplitTable load_rooftop_split(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  table.require_header({"climate_zone", "pop_band", "flat_fraction", "pitched_fraction"});
  std::map<std::pair<ClimateZone, PopulationBand>, RoofSplit> rows;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    auto zone = parse_climate_zone(r[0]);
    if (!zone) {
      throw InputError("unknown climate zone '" + r[0] + "'", table.source, i + 1,
                       "climate_zone");
    }
    auto band = parse_population_band(r[1]);
    if (!band) {
      throw InputError("unknown population band '" + r[1] + "'", table.source, i + 1,
                       "pop_band");
    }
    RoofSplit split{csv::parse_double(r[2], table, i + 1, "flat_fraction"),
                    csv::parse_double(r[3], table, i + 1, "pitched_fraction")};
    if (split.flat < 0.0 || split.flat > 1.0 || split.pitched < 0.0 || split.pitched > 1.0) {
      throw InputError("fractions must lie in [0, 1]", table.source, i + 1);
    }
    if (!rows.emplace(std::pair{*zone, *band}, split).second) {
      throw InputError("duplicate (climate_zone, pop_band) entry", table.source, i + 1);
    }
  }
  try {
    return RooftopSplitTable(std::move(rows));
  } catch (const InputError& e) {
    throw InputError(e.what(), table.source);
  }
}

void write_rooftop_split(const RooftopSplitTable& table,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file", path.string());
  csv::write_row(out, {"climate_zone", "pop_band", "flat_fraction", "pitched_fraction"});
  for (const auto& [key, split] : table.rows()) {
    csv::write_row(out, {std::string(to_string(key.first)), std::string(to_string(key.second)),
                         csv::format_double(split.flat), csv::format_double(split.pitched)});
  }
}

void validate(const PvParams& p) {
  if (!(p.panel_density > 0.0)) throw InputError("panel density must be positive");
  if (!(p.shadow_loss >= 0.0 && p.shadow_loss < 1.0)) {
    throw InputError("shadow loss must lie in [0, 1)");
  }
  if (!(p.utilization_factor >= 0.0 && p.utilization_factor < 1.0)) {
    throw InputError("utilization factor must lie in [0, 1)");
  }
}

double RooftopInventory::total() const {
  double sum = 0.0;
  for (double a : area) sum += a;
  return sum;
}

RooftopInventory classify_rooftops(const Municipality& m,
                                   const RooftopSplitTable& table,
                                   const PvParams& p) {
  if (!(m.footprint_area >= 0.0)) {
    throw InputError("footprint area must be non-negative for '" + m.id + "'");
  }
  const auto& split = table.at(m.climate_zone, population_band(m));
  const double usable = m.footprint_area * p.utilization_factor;
  RooftopInventory inv;
  inv.area[index(Orientation::kFlat)] = usable * split.flat;
  const double per_side = usable * split.pitched / 4.0;
  for (auto o : {Orientation::kSouth, Orientation::kEast, Orientation::kWest,
                 Orientation::kNorth}) {
    inv.area[index(o)] = per_side;
  }
  return inv;
}

double PvCapacity::producing_kwp() const {
  double sum = 0.0;
  for (auto o : kOrientations) {
    if (o == Orientation::kNorth && north_excluded) continue;
    sum += kwp[index(o)];
  }
  return sum;
}

PvCapacity installable_capacity(const RooftopInventory& inventory,
                                const PvParams& p) {
  PvCapacity cap;
  cap.north_excluded = p.exclude_north;
  for (auto o : kOrientations) cap.kwp[index(o)] = inventory[o] / p.panel_density;
  return cap;
}

RegionalYields load_canonical_yields(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  table.require_header({"region", "orientation", "month", "hour", "kwh_per_kwp"});
  RegionalYields out;
  std::map<std::pair<std::string, Orientation>, std::array<bool, 12 * 24>> seen;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    const std::size_t row = i + 1;
    auto o = parse_orientation(r[1]);
    if (!o) {
      throw InputError("unknown orientation '" + r[1] + "'", table.source, row,
                       "orientation");
    }
    const auto month = csv::parse_integer(r[2], table, row, "month");
    const auto hour = csv::parse_integer(r[3], table, row, "hour");
    if (month < 1 || month > 12) {
      throw InputError("month must be 1..12", table.source, row, "month");
    }
    if (hour < 0 || hour > 23) {
      throw InputError("hour must be 0..23", table.source, row, "hour");
    }
    const double v = csv::parse_double(r[4], table, row, "kwh_per_kwp");
    if (v < 0.0) {
      throw InputError("yield must be non-negative", table.source, row, "kwh_per_kwp");
    }
    auto& flags = seen[{r[0], *o}];
    auto& days = out[r[0]].days[*o];
    const auto slot = static_cast<std::size_t>((month - 1) * 24 + hour);
    if (flags[slot]) {
      throw InputError("duplicate (region, orientation, month, hour) entry",
                       table.source, row);
    }
    flags[slot] = true;
    days(month - 1, hour) = v;
  }
  for (const auto& [key, flags] : seen) {
    for (bool f : flags) {
      if (!f) {
        throw InputError(fmt::format("region '{}' orientation {} lacks some of the 12x24 "
                                     "canonical-day entries",
                                     key.first, to_string(key.second)),
                         table.source);
      }
    }
  }
  for (const auto& [region, t] : out) {
    for (auto o : {Orientation::kFlat, Orientation::kSouth, Orientation::kEast,
                   Orientation::kWest}) {
      if (!t.days.contains(o)) {
        throw InputError(fmt::format("region '{}' has no {} yields", region, to_string(o)),
                         table.source);
      }
    }
  }
  return out;
}

void write_canonical_yields(const RegionalYields& yields,
                            const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file", path.string());
  csv::write_row(out, {"region", "orientation", "month", "hour", "kwh_per_kwp"});
  for (const auto& [region, table] : yields) {
    for (const auto& [o, days] : table.days) {
      for (int month = 0; month < 12; ++month) {
        for (int hour = 0; hour < 24; ++hour) {
          csv::write_row(out, {region, std::string(to_string(o)), std::to_string(month + 1),
                               std::to_string(hour), csv::format_double(days(month, hour))});
        }
      }
    }
  }
}

const std::array<int, 12>& canonical_anchor_days() {
  static const std::array<int, 12> anchors = [] {
    constexpr std::array<int, 12> month_length = {31, 28, 31, 30, 31, 30,
                                                  31, 31, 30, 31, 30, 31};
    std::array<int, 12> a{};
    int first = 0;
    for (int m = 0; m < 12; ++m) {
      a[m] = first + 14;
      first += month_length[m];
    }
    return a;
  }();
  return anchors;
}

std::map<Orientation, Trace<double>> interpolate_canonical_days(
    const CanonicalYieldTable& table) {
  std::map<Orientation, Trace<double>> out;
  for (const auto& [o, days] : table.days) out.emplace(o, interpolate_canonical_days(days));
  return out;
}

HourlySeries hourly_pv_production(const PvCapacity& capacity,
                                  const std::map<Orientation, Trace<double>>& yields,
                                  const PvParams& p) {
  Trace<double> kwh = Trace<double>::Zero(units::kHoursPerYear);
  for (auto o : kOrientations) {
    const double kwp = capacity[o];
    if (o == Orientation::kNorth && capacity.north_excluded) continue;
    if (kwp == 0.0) continue;
    auto it = yields.find(o);
    if (it == yields.end()) {
      throw InputError("no yield trace for orientation " + std::string(to_string(o)));
    }
    if (it->second.size() != units::kHoursPerYear) {
      throw InputError("yield trace must cover 8760 hours");
    }
    kwh += kwp * it->second;
  }
  return HourlySeries(units::kw_to_mw(1.0) * (1.0 - p.shadow_loss) * kwh, {},
                      SignConstraint::kNonNegative);
}

std::string_view to_string(AggregationLevel level) {
  switch (level) {
    case AggregationLevel::kMunicipality: return "municipality";
    case AggregationLevel::kProvince: return "province";
    case AggregationLevel::kRegion: return "region";
    case AggregationLevel::kNational: return "national";
  }
  return "?";
}

std::map<std::string, HourlySeries> aggregate_production(
    const std::vector<MunicipalSeries>& series, AggregationLevel level) {
  std::map<std::string, HourlySeries> groups;
  for (const auto& s : series) {
    const Municipality& m = *s.municipality;
    std::string key;
    switch (level) {
      case AggregationLevel::kMunicipality: key = m.id; break;
      case AggregationLevel::kProvince: key = m.province; break;
      case AggregationLevel::kRegion: key = m.region; break;
      case AggregationLevel::kNational: key = "national"; break;
    }
    auto [it, inserted] = groups.try_emplace(key, s.series);
    if (!inserted) it->second += s.series;
  }
  return groups;
}

}  // namespace gridmix::pv
