#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridmix/series.hpp"

namespace gridmix {

enum class ClimateZone { kI = 1, kII, kIII, kIV, kV };

inline constexpr int kClimateZoneCount = 5;

std::string_view to_string(ClimateZone zone);
// Accepts roman numerals, optionally prefixed with "Zone " ("III", "Zone III").
std::optional<ClimateZone> parse_climate_zone(std::string_view text);
inline int zone_index(ClimateZone zone) { return static_cast<int>(zone) - 1; }

enum class VehicleCategory { kCars, kVans, kBuses, kMotorbikes, kMotorcycles };

inline constexpr std::array<VehicleCategory, 5> kVehicleCategories = {
    VehicleCategory::kCars, VehicleCategory::kVans, VehicleCategory::kBuses,
    VehicleCategory::kMotorbikes, VehicleCategory::kMotorcycles};

std::string_view to_string(VehicleCategory category);
std::optional<VehicleCategory> parse_vehicle_category(std::string_view text);

using VehicleCounts = std::map<VehicleCategory, double>;

struct Municipality {
  std::string id;
  std::string name;
  std::string province;
  std::string region;
  double population = 0.0;
  double income = 0.0;           // EUR per person and year
  double cadastral_value = 0.0;  // EUR, industrial land excluded
  double altitude = 0.0;         // m
  ClimateZone climate_zone = ClimateZone::kI;
  double footprint_area = 0.0;   // m2
  VehicleCounts vehicle_counts;
  std::optional<double> known_annual_demand;  // MWh
  bool is_virtual = false;

  friend bool operator==(const Municipality&, const Municipality&) = default;
};

enum class Provenance { kRaw, kAggregated };

std::string_view to_string(Provenance provenance);

class MunicipalitySet {
 public:
  MunicipalitySet() = default;
  // Validates unique ids and per-entry invariants.
  explicit MunicipalitySet(std::vector<Municipality> entries,
                           Provenance provenance = Provenance::kRaw);

  const std::vector<Municipality>& entries() const noexcept { return entries_; }
  Provenance provenance() const noexcept { return provenance_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const Municipality* find(std::string_view id) const;

  friend bool operator==(const MunicipalitySet&, const MunicipalitySet&) = default;

 private:
  std::vector<Municipality> entries_;
  Provenance provenance_ = Provenance::kRaw;
};

// Throws InputError describing the first violated field.
void validate(const Municipality& m);

inline constexpr std::string_view kVirtualIdPrefix = "VIRTUAL-";

MunicipalitySet load_municipalities(const std::filesystem::path& path);
void write_municipalities(const MunicipalitySet& set,
                          const std::filesystem::path& path);

// Merges every real municipality below `threshold` inhabitants into one
// virtual entity per province. Summed quantities are conserved; income and
// altitude become population-weighted means; the zone is the modal zone.
MunicipalitySet aggregate_small_municipalities(const MunicipalitySet& set,
                                               double threshold = 1000.0);

HourlySeries load_hourly_series(const std::filesystem::path& path,
                                SignConstraint sign);
void write_hourly_series(const HourlySeries& series,
                         const std::filesystem::path& path);

struct Technology {
  std::string name;
  double installed_power = 0.0;       // MW
  double manageable_energy = 0.0;     // MWh per year
  HourlySeries nonmanageable_series;  // MWh per hour
  double manageable_power_cap = 0.0;  // MW

  double total_energy() const {
    return manageable_energy + nonmanageable_series.sum();
  }
};

struct Portfolio {
  std::vector<Technology> technologies;

  double manageable_energy() const;
  double manageable_power_cap() const;
  HourlySeries nonmanageable_series() const;
  const Technology* find(std::string_view name) const;
};

void validate(const Portfolio& portfolio);

// portfolio.csv: technology,installed_gw,manageable_twh,manageable_cap_gw,series_file
// where series_file is a series.csv path relative to the portfolio file.
Portfolio load_portfolio(const std::filesystem::path& path);

struct StorageSpec {
  double capacity = 0.0;               // MWh
  double round_trip_efficiency = 0.95;
  double unit_cost = 100.0;            // EUR per kWh
  double lifetime = 13.7;              // years
};

void validate(const StorageSpec& storage);

struct CostModel {
  double pv_unit_cost = 1.0;         // EUR per Wp
  double pv_lifetime = 25.0;         // years
  double storage_unit_cost = 100.0;  // EUR per kWh
  double storage_lifetime = 13.7;    // years
  double wholesale_price = 56.4;     // EUR per MWh
};

void validate(const CostModel& cost);

}  // namespace gridmix
