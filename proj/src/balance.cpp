#include "gridmix/balance.hpp"

#include <fmt/format.h>

#include <array>
#include <numeric>

namespace gridmix::balance {

namespace {

constexpr std::array<int, 12> kMonthLength = {31, 28, 31, 30, 31, 30,
                                              31, 31, 30, 31, 30, 31};
constexpr std::array<std::string_view, 12> kMonthName = {
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

}  // namespace

BalanceResult<double> simulate_balance(const HourlySeries& demand,
                                       const HourlySeries& nonmanageable_production,
                                       double manageable_budget,
                                       double manageable_power_cap,
                                       const StorageSpec& storage) {
  if (!demand.is_non_negative() || !nonmanageable_production.is_non_negative()) {
    throw InputError("dispatch needs non-negative demand and production");
  }
  DispatchInputs<double> in{demand.values(), nonmanageable_production.values(),
                            manageable_budget, manageable_power_cap, storage};
  return simulate_balance(in);
}

std::string_view to_string(Period period) {
  switch (period) {
    case Period::kMonth: return "month";
    case Period::kQuarter: return "quarter";
    case Period::kYear: return "year";
  }
  return "?";
}

std::vector<PeriodBalance> periodic_balance(const HourlySeries& demand,
                                            const HourlySeries& production,
                                            Period period) {
  std::vector<PeriodBalance> months;
  Eigen::Index first = 0;
  for (int m = 0; m < 12; ++m) {
    const Eigen::Index n = kMonthLength[m] * units::kHoursPerDay;
    PeriodBalance b;
    b.label = std::string(kMonthName[m]);
    b.demand = demand.values().segment(first, n).sum();
    b.production = production.values().segment(first, n).sum();
    months.push_back(std::move(b));
    first += n;
  }

  auto merge = [&](int begin, int end, std::string label) {
    PeriodBalance b;
    b.label = std::move(label);
    for (int m = begin; m < end; ++m) {
      b.demand += months[m].demand;
      b.production += months[m].production;
    }
    return b;
  };

  std::vector<PeriodBalance> out;
  switch (period) {
    case Period::kMonth: out = std::move(months); break;
    case Period::kQuarter:
      for (int q = 0; q < 4; ++q) out.push_back(merge(3 * q, 3 * q + 3, fmt::format("Q{}", q + 1)));
      break;
    case Period::kYear: out.push_back(merge(0, 12, "year")); break;
  }
  for (auto& b : out) b.balance = b.production - b.demand;
  return out;
}

std::vector<LorenzPoint> lorenz_curve(const std::map<std::string, double>& annual_demand) {
  std::vector<double> values;
  values.reserve(annual_demand.size());
  for (const auto& [id, v] : annual_demand) {
    if (!(v >= 0.0)) throw InputError("demand of '" + id + "' must be non-negative");
    values.push_back(v);
  }
  const double total = std::accumulate(values.begin(), values.end(), 0.0);
  if (!(total > 0.0)) {
    throw InputError("Lorenz curve needs at least one positive demand");
  }
  std::sort(values.begin(), values.end(), std::greater<>());

  std::vector<LorenzPoint> curve;
  curve.reserve(values.size() + 1);
  curve.push_back({0.0, 0.0});
  const auto n = static_cast<double>(values.size());
  double cumulative = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    cumulative += values[i];
    curve.push_back({static_cast<double>(i + 1) / n, cumulative / total});
  }
  curve.back() = {1.0, 1.0};
  return curve;
}

double count_share_for_demand_share(const std::vector<LorenzPoint>& curve,
                                    double demand_share) {
  for (const auto& p : curve) {
    if (p.demand_share >= demand_share) return p.count_share;
  }
  return 1.0;
}

}  // namespace gridmix::balance
