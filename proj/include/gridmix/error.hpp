#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace gridmix {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or invariant-violating input. Carries the file and the 1-based
// data row (header excluded) when the problem is tied to one.
class InputError : public Error {
 public:
  InputError(std::string message, std::string file = {},
             std::optional<std::size_t> row = std::nullopt,
             std::string field = {});

  const std::string& file() const noexcept { return file_; }
  std::optional<std::size_t> row() const noexcept { return row_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string file_;
  std::optional<std::size_t> row_;
  std::string field_;
};

class SingularDesignError : public Error {
 public:
  using Error::Error;
};

// No storage capacity can close the hourly balance. gap_mwh is the annual
// energy that stays unserved even with unbounded storage.
class InfeasibleError : public Error {
 public:
  InfeasibleError(std::string message, double gap_mwh)
      : Error(std::move(message)), gap_mwh_(gap_mwh) {}
  double gap_mwh() const noexcept { return gap_mwh_; }

 private:
  double gap_mwh_;
};

}  // namespace gridmix
