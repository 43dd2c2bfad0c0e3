#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gridmix/datamodel.hpp"

namespace gridmix::demand {

// Design-matrix column layout. Zone I is the reference category, so the
// indicator block covers zones II..V.
enum Regressor : int {
  kIntercept = 0,
  kPopulation,
  kIncome,
  kCadastralValue,
  kAltitude,
  kZoneII,
  kZoneIII,
  kZoneIV,
  kZoneV,
  kRegressorCount
};

std::string_view regressor_name(int column);

struct RegressionModel {
  Eigen::VectorXd coefficients = Eigen::VectorXd::Zero(kRegressorCount);
  double r_squared = 0.0;
  std::size_t training_size = 0;
};

// Design row for one municipality.
Eigen::RowVectorXd design_row(const Municipality& m);

// Ordinary least squares of known annual demand on the explanatory
// variables. Throws SingularDesignError naming the dependent columns when
// the design is rank deficient, InputError for missing demand or too few rows.
RegressionModel fit_demand_regression(const MunicipalitySet& training);

struct Prediction {
  double annual_mwh = 0.0;
  bool extrapolated = false;  // raw prediction was negative and got clamped
};

Prediction predict_annual_demand(const RegressionModel& model,
                                 const Municipality& m);

struct DemandEstimate {
  std::string id;
  std::string region;
  double annual_mwh = 0.0;
};

// Scales every estimate by (regional total / regional predicted sum).
std::vector<DemandEstimate> scale_to_regional_totals(
    std::vector<DemandEstimate> predictions,
    const std::map<std::string, double>& regional_totals);

// regional_totals.csv: region,annual_mwh
std::map<std::string, double> load_regional_totals(
    const std::filesystem::path& path);

// Hourly weights summing to one.
class LoadProfile {
 public:
  LoadProfile();  // uniform
  // Throws unless non-negative, length 8760 and normalized within 1e-9.
  explicit LoadProfile(Trace<double> weights);

  static LoadProfile uniform();
  // Renormalizes weights whose sum lies within `tolerance` of one.
  static LoadProfile normalized(Trace<double> weights, double tolerance = 0.01);

  const Trace<double>& weights() const noexcept { return weights_; }

 private:
  Trace<double> weights_;
};

// load_profile.csv / ev_profile.csv: hour,weight
LoadProfile load_profile(const std::filesystem::path& path);
void write_profile(const LoadProfile& profile, const std::filesystem::path& path);

HourlySeries hourly_demand(double annual_mwh, const LoadProfile& profile);

struct VehicleConsumption {
  double annual_distance_km = 0.0;
  double specific_consumption_wh_per_km = 0.0;

  double annual_mwh() const {
    return annual_distance_km * specific_consumption_wh_per_km * 1e-6;
  }
};

class EvConversionTable {
 public:
  explicit EvConversionTable(std::map<VehicleCategory, VehicleConsumption> rows);

  // Annual mileage and specific consumption per category for the Spanish
  // light-duty fleet.
  static EvConversionTable spanish_fleet();

  // Annual consumption of the category relative to one car.
  double equivalence_factor(VehicleCategory category) const;
  bool contains(VehicleCategory category) const { return rows_.contains(category); }
  double car_annual_mwh() const { return rows_.at(VehicleCategory::kCars).annual_mwh(); }

 private:
  std::map<VehicleCategory, VehicleConsumption> rows_;
};

double equivalent_car_fleet(const VehicleCounts& counts,
                            const EvConversionTable& table);

// 12,500 km at 163 Wh/km.
inline constexpr double kDefaultPerCarAnnualMwh = 2.0375;

HourlySeries ev_demand(double equivalent_cars, double per_car_annual_mwh,
                       const LoadProfile& charging_profile);

}  // namespace gridmix::demand
