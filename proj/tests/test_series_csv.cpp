#include <doctest.h>

#include <sstream>

#include "gridmix/csv.hpp"
#include "gridmix/series.hpp"

using namespace gridmix;

TEST_CASE("hourly series requires exactly one year of finite values") {
  CHECK_NOTHROW(HourlySeries::zeros("2018"));
  CHECK_THROWS_AS(HourlySeries(Trace<double>::Zero(8759)), InputError);
  CHECK_THROWS_AS(HourlySeries(Trace<double>::Zero(8761)), InputError);

  Trace<double> v = Trace<double>::Ones(units::kHoursPerYear);
  v(17) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(HourlySeries{v}, InputError);
}

TEST_CASE("non-negative series reject negative hours, signed ones accept them") {
  Trace<double> v = Trace<double>::Ones(units::kHoursPerYear);
  v(100) = -1.0;
  CHECK_THROWS_AS(HourlySeries(v, "", SignConstraint::kNonNegative), InputError);
  const HourlySeries signed_series(v, "", SignConstraint::kSigned);
  CHECK(signed_series[100] == -1.0);
  CHECK_FALSE(signed_series.is_non_negative());
}

TEST_CASE("series arithmetic") {
  const auto a = HourlySeries::constant(2.0, "2018");
  const auto b = HourlySeries::constant(0.5, "2018");
  CHECK((a + b).sum() == doctest::Approx(2.5 * 8760));
  CHECK((3.0 * b).max() == 1.5);
  CHECK((a + b).year_label() == "2018");
  CHECK(a == HourlySeries::constant(2.0, "2018"));
  CHECK_FALSE(a == HourlySeries::constant(2.0, "2019"));
}

TEST_CASE("csv parsing handles quotes and blank lines") {
  const auto t = csv::parse("a,b,c\n1,\"x, y\",\"say \"\"hi\"\"\"\n\n2,,3\n", "mem");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "x, y");
  CHECK(t.rows[0][2] == "say \"hi\"");
  CHECK(t.rows[1][1].empty());
  CHECK(t.column("c") == 2);
}

TEST_CASE("csv errors carry file and row") {
  try {
    csv::parse("a,b\n1,2\n3\n", "broken.csv");
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(e.file() == "broken.csv");
    REQUIRE(e.row().has_value());
    CHECK(*e.row() == 2);
  }
  const auto t = csv::parse("value\n1.5\nabc\n", "nums.csv");
  CHECK(csv::parse_double(t.rows[0][0], t, 1, "value") == 1.5);
  try {
    csv::parse_double(t.rows[1][0], t, 2, "value");
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(e.field() == "value");
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  CHECK_THROWS_AS(csv::parse_integer("4.2", t, 1, "value"), InputError);
  CHECK_THROWS_AS(t.require_header({"other"}), InputError);
}

TEST_CASE("csv doubles round-trip through text") {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0}) {
    const auto text = csv::format_double(v);
    const auto t = csv::parse("v\n" + text + "\n", "rt");
    CHECK(csv::parse_double(t.rows[0][0], t, 1, "v") == v);
  }
  std::ostringstream out;
  csv::write_row(out, {"plain", "with,comma", "with\"quote"});
  CHECK(out.str() == "plain,\"with,comma\",\"with\"\"quote\"\n");
}
