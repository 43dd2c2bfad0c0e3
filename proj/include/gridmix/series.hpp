#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>

#include "gridmix/error.hpp"
#include "gridmix/units.hpp"

namespace gridmix {

// Hourly trace of arbitrary length. The dispatch and search kernels work on
// these so that short synthetic horizons can be simulated directly.
template <typename Scalar>
using Trace = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

enum class SignConstraint { kNonNegative, kSigned };

// One 365-day year of hourly energy values (MWh per hour).
template <typename Scalar>
class BasicHourlySeries {
 public:
  using Values = Trace<Scalar>;

  BasicHourlySeries() : values_(Values::Zero(units::kHoursPerYear)) {}

  template <typename Derived>
  explicit BasicHourlySeries(const Eigen::ArrayBase<Derived>& values,
                             std::string year_label = {},
                             SignConstraint sign = SignConstraint::kSigned)
      : values_(values), year_label_(std::move(year_label)) {
    validate(sign);
  }

  static BasicHourlySeries zeros(std::string year_label = {}) {
    return BasicHourlySeries(Values::Zero(units::kHoursPerYear),
                             std::move(year_label));
  }

  static BasicHourlySeries constant(Scalar value, std::string year_label = {}) {
    return BasicHourlySeries(Values::Constant(units::kHoursPerYear, value),
                             std::move(year_label));
  }

  const Values& values() const noexcept { return values_; }
  const std::string& year_label() const noexcept { return year_label_; }

  Scalar operator[](Eigen::Index hour) const { return values_(hour); }
  Eigen::Index size() const noexcept { return values_.size(); }
  Scalar sum() const { return values_.sum(); }
  Scalar max() const { return values_.maxCoeff(); }

  bool is_non_negative() const { return (values_ >= Scalar(0)).all(); }

  BasicHourlySeries& operator+=(const BasicHourlySeries& other) {
    values_ += other.values_;
    return *this;
  }

  friend BasicHourlySeries operator+(BasicHourlySeries lhs,
                                     const BasicHourlySeries& rhs) {
    lhs += rhs;
    return lhs;
  }

  friend BasicHourlySeries operator*(Scalar k, const BasicHourlySeries& s) {
    return BasicHourlySeries(k * s.values_, s.year_label_);
  }

  friend bool operator==(const BasicHourlySeries& a,
                         const BasicHourlySeries& b) {
    return (a.values_ == b.values_).all() && a.year_label_ == b.year_label_;
  }

 private:
  void validate(SignConstraint sign) const {
    if (values_.size() != units::kHoursPerYear) {
      throw InputError("hourly series must have exactly 8760 values, got " +
                       std::to_string(values_.size()));
    }
    if (!values_.allFinite()) {
      throw InputError("hourly series contains non-finite values");
    }
    if (sign == SignConstraint::kNonNegative && !is_non_negative()) {
      throw InputError("hourly series contains negative values");
    }
  }

  Values values_;
  std::string year_label_;
};

using HourlySeries = BasicHourlySeries<double>;

}  // namespace gridmix
