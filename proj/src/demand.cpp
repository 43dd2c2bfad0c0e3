#include "gridmix/demand.hpp"

#include <fmt/format.h>

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <fstream>

#include "gridmix/csv.hpp"

namespace gridmix::demand {

std::string_view regressor_name(int column) {
  static constexpr std::string_view kNames[kRegressorCount] = {
      "intercept", "population", "income",   "cadastral_value", "altitude",
      "zone_II",   "zone_III",   "zone_IV",  "zone_V"};
  return kNames[column];
}

Eigen::RowVectorXd design_row(const Municipality& m) {
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(kRegressorCount);
  row(kIntercept) = 1.0;
  row(kPopulation) = m.population;
  row(kIncome) = m.income;
  row(kCadastralValue) = m.cadastral_value;
  row(kAltitude) = m.altitude;
  if (m.climate_zone != ClimateZone::kI) {
    row(kZoneII + zone_index(m.climate_zone) - 1) = 1.0;
  }
  return row;
}

RegressionModel fit_demand_regression(const MunicipalitySet& training) {
  const auto n = static_cast<Eigen::Index>(training.size());
  if (n < kRegressorCount + 1) {
    throw InputError(fmt::format(
        "regression needs at least {} training rows, got {}",
        kRegressorCount + 1, n));
  }

  Eigen::MatrixXd x(n, kRegressorCount);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& m = training.entries()[static_cast<std::size_t>(i)];
    if (!m.known_annual_demand) {
      throw InputError("training municipality '" + m.id +
                       "' has no known annual demand");
    }
    x.row(i) = design_row(m);
    y(i) = *m.known_annual_demand;
  }

  // Column equilibration keeps the rank decision independent of units
  // (population ~1e5 against cadastral values ~1e9).
  Eigen::VectorXd scale = x.colwise().norm().transpose();
  std::vector<int> zero_columns;
  for (Eigen::Index j = 0; j < scale.size(); ++j) {
    if (scale(j) == 0.0) {
      zero_columns.push_back(static_cast<int>(j));
      scale(j) = 1.0;
    }
  }
  const Eigen::MatrixXd xs = x * scale.cwiseInverse().asDiagonal();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs);
  qr.setThreshold(1e-10);
  if (qr.rank() < kRegressorCount || !zero_columns.empty()) {
    std::string names;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < kRegressorCount; ++k) {
      names += (names.empty() ? "" : ", ") + std::string(regressor_name(perm(k)));
    }
    throw SingularDesignError(
        "rank-deficient regression design (rank " + std::to_string(qr.rank()) +
        " of " + std::to_string(kRegressorCount) + "); dependent columns: " + names);
  }

  RegressionModel model;
  model.coefficients = scale.cwiseInverse().asDiagonal() * qr.solve(y);
  model.training_size = static_cast<std::size_t>(n);

  const Eigen::VectorXd residual = y - x * model.coefficients;
  const double sse = residual.squaredNorm();
  const double sst = (y.array() - y.mean()).matrix().squaredNorm();
  const double y_scale = y.cwiseAbs().maxCoeff();
  const double exact_fit_tol = std::pow(1e-12 * y_scale, 2) * static_cast<double>(n);
  if (sst <= exact_fit_tol) {
    model.r_squared = sse <= exact_fit_tol ? 1.0 : 0.0;
  } else {
    model.r_squared = std::clamp(1.0 - sse / sst, 0.0, 1.0);
  }
  return model;
}

Prediction predict_annual_demand(const RegressionModel& model,
                                 const Municipality& m) {
  const double raw = design_row(m).dot(model.coefficients);
  if (raw < 0.0) return {0.0, true};
  return {raw, false};
}

std::vector<DemandEstimate> scale_to_regional_totals(
    std::vector<DemandEstimate> predictions,
    const std::map<std::string, double>& regional_totals) {
  std::map<std::string, double> predicted;
  for (const auto& p : predictions) {
    if (!regional_totals.contains(p.region)) {
      throw InputError("no regional total for region '" + p.region +
                       "' (municipality '" + p.id + "')");
    }
    predicted[p.region] += p.annual_mwh;
  }
  for (const auto& [region, total] : regional_totals) {
    const double sum = predicted.contains(region) ? predicted.at(region) : 0.0;
    if (sum <= 0.0 && total != 0.0) {
      throw InputError(fmt::format(
          "region '{}' has total {} MWh but zero predicted demand", region, total));
    }
  }
  for (auto& p : predictions) {
    const double sum = predicted.at(p.region);
    if (sum > 0.0) p.annual_mwh *= regional_totals.at(p.region) / sum;
  }
  return predictions;
}

std::map<std::string, double> load_regional_totals(
    const std::filesystem::path& path) {
  const auto table = csv::read(path);
  table.require_header({"region", "annual_mwh"});
  std::map<std::string, double> totals;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const double v = csv::parse_double(table.rows[i][1], table, i + 1, "annual_mwh");
    if (v < 0.0) {
      throw InputError("regional total must be non-negative", table.source, i + 1,
                       "annual_mwh");
    }
    if (!totals.emplace(table.rows[i][0], v).second) {
      throw InputError("duplicate region '" + table.rows[i][0] + "'", table.source,
                       i + 1, "region");
    }
  }
  return totals;
}

LoadProfile::LoadProfile()
    : weights_(Trace<double>::Constant(units::kHoursPerYear,
                                       1.0 / units::kHoursPerYear)) {}

LoadProfile::LoadProfile(Trace<double> weights) : weights_(std::move(weights)) {
  if (weights_.size() != units::kHoursPerYear) {
    throw InputError("load profile must have 8760 weights");
  }
  if (!weights_.allFinite() || (weights_ < 0.0).any()) {
    throw InputError("load profile weights must be finite and non-negative");
  }
  if (std::abs(weights_.sum() - 1.0) > 1e-9) {
    throw InputError(fmt::format("load profile weights sum to {}, not 1",
                                 weights_.sum()));
  }
}

LoadProfile LoadProfile::uniform() { return LoadProfile(); }

LoadProfile LoadProfile::normalized(Trace<double> weights, double tolerance) {
  const double sum = weights.sum();
  if (!(std::abs(sum - 1.0) <= tolerance)) {
    throw InputError(fmt::format(
        "profile weights sum to {}, outside the accepted {} of 1", sum, tolerance));
  }
  return LoadProfile(weights / sum);
}

LoadProfile load_profile(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  table.require_header({"hour", "weight"});
  if (table.rows.size() != static_cast<std::size_t>(units::kHoursPerYear)) {
    throw InputError(fmt::format("expected 8760 data rows, found {}",
                                 table.rows.size()),
                     table.source);
  }
  Trace<double> w(units::kHoursPerYear);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto hour = csv::parse_integer(table.rows[i][0], table, i + 1, "hour");
    if (hour != static_cast<long long>(i)) {
      throw InputError(fmt::format("expected hour {}, found {}", i, hour),
                       table.source, i + 1, "hour");
    }
    const double v = csv::parse_double(table.rows[i][1], table, i + 1, "weight");
    if (v < 0.0) {
      throw InputError("negative weight", table.source, i + 1, "weight");
    }
    w(static_cast<Eigen::Index>(i)) = v;
  }
  try {
    return LoadProfile::normalized(std::move(w));
  } catch (const InputError& e) {
    throw InputError(e.what(), table.source);
  }
}

void write_profile(const LoadProfile& profile, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write file", path.string());
  csv::write_row(out, {"hour", "weight"});
  const auto& w = profile.weights();
  for (Eigen::Index h = 0; h < w.size(); ++h) {
    csv::write_row(out, {std::to_string(h), csv::format_double(w(h))});
  }
}

HourlySeries hourly_demand(double annual_mwh, const LoadProfile& profile) {
  if (!(annual_mwh >= 0.0)) {
    throw InputError("annual demand must be non-negative");
  }
  return HourlySeries(annual_mwh * profile.weights(), {},
                      SignConstraint::kNonNegative);
}

EvConversionTable::EvConversionTable(
    std::map<VehicleCategory, VehicleConsumption> rows)
    : rows_(std::move(rows)) {
  auto car = rows_.find(VehicleCategory::kCars);
  if (car == rows_.end() || !(car->second.annual_mwh() > 0.0)) {
    throw InputError("EV conversion table needs a car row with positive consumption");
  }
  for (const auto& [category, row] : rows_) {
    if (!(row.annual_distance_km >= 0.0) ||
        !(row.specific_consumption_wh_per_km >= 0.0)) {
      throw InputError("EV conversion row for " + std::string(to_string(category)) +
                       " must be non-negative");
    }
  }
}

EvConversionTable EvConversionTable::spanish_fleet() {
  return EvConversionTable({
      {VehicleCategory::kCars, {12'500.0, 163.0}},
      {VehicleCategory::kVans, {19'500.0, 235.0}},
      {VehicleCategory::kBuses, {55'000.0, 1'269.0}},
      {VehicleCategory::kMotorbikes, {7'700.0, 68.0}},
      {VehicleCategory::kMotorcycles, {11'000.0, 32.0}},
  });
}

double EvConversionTable::equivalence_factor(VehicleCategory category) const {
  auto it = rows_.find(category);
  if (it == rows_.end()) {
    throw InputError("unknown vehicle category '" +
                     std::string(to_string(category)) + "' in conversion table");
  }
  return it->second.annual_mwh() / car_annual_mwh();
}

double equivalent_car_fleet(const VehicleCounts& counts,
                            const EvConversionTable& table) {
  double fleet = 0.0;
  for (const auto& [category, count] : counts) {
    if (!(count >= 0.0)) {
      throw InputError("vehicle counts must be non-negative");
    }
    fleet += count * table.equivalence_factor(category);
  }
  return fleet;
}

HourlySeries ev_demand(double equivalent_cars, double per_car_annual_mwh,
                       const LoadProfile& charging_profile) {
  if (!(per_car_annual_mwh > 0.0)) {
    throw InputError("per-car annual consumption must be positive");
  }
  if (!(equivalent_cars >= 0.0)) {
    throw InputError("equivalent car count must be non-negative");
  }
  return hourly_demand(equivalent_cars * per_car_annual_mwh, charging_profile);
}

}  // namespace gridmix::demand
