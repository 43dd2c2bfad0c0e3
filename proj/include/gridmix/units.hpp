#pragma once

// Internal base units: MWh, MW, EUR, m2. Conversions happen only at the
// reporting and configuration boundaries.
namespace gridmix::units {

inline constexpr int kHoursPerYear = 8760;
inline constexpr int kDaysPerYear = 365;
inline constexpr int kHoursPerDay = 24;

inline constexpr double kMwhPerGwh = 1e3;
inline constexpr double kMwhPerTwh = 1e6;
inline constexpr double kMwPerGw = 1e3;
inline constexpr double kKwPerMw = 1e3;
inline constexpr double kM2PerKm2 = 1e6;
inline constexpr double kEurPerMeur = 1e6;

constexpr double gwh_to_mwh(double gwh) { return gwh * kMwhPerGwh; }
constexpr double twh_to_mwh(double twh) { return twh * kMwhPerTwh; }
constexpr double mwh_to_gwh(double mwh) { return mwh / kMwhPerGwh; }
constexpr double mwh_to_twh(double mwh) { return mwh / kMwhPerTwh; }
constexpr double gw_to_mw(double gw) { return gw * kMwPerGw; }
constexpr double mw_to_gw(double mw) { return mw / kMwPerGw; }
constexpr double kw_to_mw(double kw) { return kw / kKwPerMw; }

}  // namespace gridmix::units
