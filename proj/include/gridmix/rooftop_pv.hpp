#pragma once

#include <Eigen/Core>
#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gridmix/datamodel.hpp"

namespace gridmix::pv {

enum class PopulationBand { kSmall, kMedium, kLarge };  // [1e3,1e4) [1e4,1e5) [1e5,inf)

std::string_view to_string(PopulationBand band);
std::optional<PopulationBand> parse_population_band(std::string_view text);
PopulationBand population_band(const Municipality& m);

enum class Orientation { kFlat, kSouth, kEast, kWest, kNorth };

inline constexpr int kOrientationCount = 5;
inline constexpr std::array<Orientation, kOrientationCount> kOrientations = {
    Orientation::kFlat, Orientation::kSouth, Orientation::kEast,
    Orientation::kWest, Orientation::kNorth};

std::string_view to_string(Orientation o);
std::optional<Orientation> parse_orientation(std::string_view text);
inline int index(Orientation o) { return static_cast<int>(o); }

struct RoofSplit {
  double flat = 0.0;
  double pitched = 0.0;
};

class RooftopSplitTable {
 public:
  // Rows that do not sum to one are renormalized; each such row produces a
  // message in warnings().
  explicit RooftopSplitTable(std::map<std::pair<ClimateZone, PopulationBand>, RoofSplit> rows);

  // Pitched/flat shares surveyed for mainland Spanish municipalities.
  static RooftopSplitTable spanish_survey();

  const RoofSplit& at(ClimateZone zone, PopulationBand band) const;
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  const auto& rows() const noexcept { return rows_; }

 private:
  std::map<std::pair<ClimateZone, PopulationBand>, RoofSplit> rows_;
  std::vector<std::string> warnings_;
};

// rooftop_split.csv: climate_zone,pop_band,flat_fraction,pitched_fraction
RooftopSplitTable load_rooftop_split(const std::filesystem::path& path);
void write_rooftop_split(const RooftopSplitTable& table,
                         const std::filesystem::path& path);

struct PvParams {
  double panel_density = 5.8;        // m2 per kWp
  double shadow_loss = 0.10;
  double utilization_factor = 0.68;
  bool exclude_north = true;
};

void validate(const PvParams& p);

// Usable roof area (m2) per surface class.
struct RooftopInventory {
  std::array<double, kOrientationCount> area{};

  double operator[](Orientation o) const { return area[index(o)]; }
  double total() const;
};

RooftopInventory classify_rooftops(const Municipality& m,
                                   const RooftopSplitTable& table,
                                   const PvParams& p);

struct PvCapacity {
  std::array<double, kOrientationCount> kwp{};
  bool north_excluded = true;

  double operator[](Orientation o) const { return kwp[index(o)]; }
  // Capacity that actually produces (north left out when excluded).
  double producing_kwp() const;
  double north_kwp() const { return kwp[index(Orientation::kNorth)]; }
};

PvCapacity installable_capacity(const RooftopInventory& inventory,
                                const PvParams& p);

// Per-kWp hourly yields (kWh/kWp) of twelve representative days, one per
// month, for each orientation class present in the source data.
using CanonicalDays = Eigen::Matrix<double, 12, 24, Eigen::RowMajor>;

struct CanonicalYieldTable {
  std::map<Orientation, CanonicalDays> days;
};

using RegionalYields = std::map<std::string, CanonicalYieldTable>;

// canonical_yields.csv: region,orientation,month,hour,kwh_per_kwp
RegionalYields load_canonical_yields(const std::filesystem::path& path);
void write_canonical_yields(const RegionalYields& yields,
                            const std::filesystem::path& path);

// Zero-based day of year of each month's representative day (the 15th).
const std::array<int, 12>& canonical_anchor_days();

// Expands twelve representative days into a 365-day hourly trace by linear
// interpolation across day of year for each hour-of-day slot, wrapping from
// December back to January.
template <typename Scalar, int Options>
Trace<Scalar> interpolate_canonical_days(
    const Eigen::Matrix<Scalar, 12, 24, Options>& days) {
  const auto& anchors = canonical_anchor_days();
  Trace<Scalar> out(units::kHoursPerYear);
  for (int day = 0; day < units::kDaysPerYear; ++day) {
    // Find the anchor at or before `day`, cyclically.
    int prev = 11;
    for (int k = 0; k < 12; ++k) {
      if (anchors[k] <= day) prev = k;
    }
    const int next = (prev + 1) % 12;
    int start = anchors[prev];
    int end = anchors[next];
    int offset = day - start;
    if (offset < 0) offset += units::kDaysPerYear;
    if (end <= start) end += units::kDaysPerYear;
    const Scalar t = Scalar(offset) / Scalar(end - start);
    for (int hour = 0; hour < units::kHoursPerDay; ++hour) {
      const Scalar a = days(prev, hour);
      const Scalar b = days(next, hour);
      out(day * units::kHoursPerDay + hour) = offset == 0 ? a : a + t * (b - a);
    }
  }
  return out;
}

// Hourly per-kWp yield traces, one per orientation class of the table.
std::map<Orientation, Trace<double>> interpolate_canonical_days(
    const CanonicalYieldTable& table);

// Hourly production (MWh) of the given capacities after shadow losses.
HourlySeries hourly_pv_production(const PvCapacity& capacity,
                                  const std::map<Orientation, Trace<double>>& yields,
                                  const PvParams& p);

enum class AggregationLevel { kMunicipality, kProvince, kRegion, kNational };

std::string_view to_string(AggregationLevel level);

struct MunicipalSeries {
  const Municipality* municipality = nullptr;
  HourlySeries series;
};

// Element-wise sums keyed by municipality id, province, region, or "national".
std::map<std::string, HourlySeries> aggregate_production(
    const std::vector<MunicipalSeries>& series, AggregationLevel level);

}  // namespace gridmix::pv
