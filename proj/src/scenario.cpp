#include "gridmix/scenario.hpp"

#include <fmt/format.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace gridmix {

namespace {

namespace pt = boost::property_tree;

double to_number(const std::string& text, const std::string& key, const std::string& source) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() ||
      !std::isfinite(v)) {
    throw InputError(fmt::format("{}: key '{}': '{}' is not a number", source, key, text));
  }
  return v;
}

bool to_bool(const std::string& text, const std::string& key, const std::string& source) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw InputError(fmt::format("{}: key '{}': '{}' is not a boolean", source, key, text));
}

using Setter = std::function<void(ScenarioConfig&, const std::string&, const std::string&)>;

std::map<std::string, std::map<std::string, Setter>> setters(const std::string& source) {
  auto number = [source](double ScenarioConfig::*field) -> Setter {
    return [field, source](ScenarioConfig& c, const std::string& key, const std::string& v) {
      c.*field = to_number(v, key, source);
    };
  };
  auto with = [source](std::function<void(ScenarioConfig&, double)> assign) -> Setter {
    return [assign, source](ScenarioConfig& c, const std::string& key, const std::string& v) {
      assign(c, to_number(v, key, source));
    };
  };

  return {
      {"scenario",
       {{"mode",
         [source](ScenarioConfig& c, const std::string& key, const std::string& v) {
           if (v == "greenfield") {
             c.mode = Mode::kGreenfield;
           } else if (v == "brownfield") {
             c.mode = Mode::kBrownfield;
           } else {
             throw InputError(fmt::format("{}: key '{}': unknown mode '{}'", source, key, v));
           }
         }},
        {"include_ev",
         [source](ScenarioConfig& c, const std::string& key, const std::string& v) {
           c.include_ev = to_bool(v, key, source);
         }},
        {"hydro_manageability", number(&ScenarioConfig::hydro_manageability)},
        {"hydro_technology",
         [](ScenarioConfig& c, const std::string&, const std::string& v) {
           c.hydro_technology = v;
         }},
        {"portfolio",
         [](ScenarioConfig& c, const std::string&, const std::string& v) { c.portfolio = v; }},
        {"year_label",
         [](ScenarioConfig& c, const std::string&, const std::string& v) { c.year_label = v; }}}},
      {"storage",
       {{"capacity_gwh",
         with([](ScenarioConfig& c, double v) { c.storage.capacity = units::gwh_to_mwh(v); })},
        {"round_trip_efficiency",
         with([](ScenarioConfig& c, double v) { c.storage.round_trip_efficiency = v; })}}},
      {"cost",
       {{"pv_unit_cost_eur_per_wp", with([](ScenarioConfig& c, double v) { c.cost.pv_unit_cost = v; })},
        {"pv_lifetime_years", with([](ScenarioConfig& c, double v) { c.cost.pv_lifetime = v; })},
        {"storage_unit_cost_eur_per_kwh",
         with([](ScenarioConfig& c, double v) { c.cost.storage_unit_cost = v; })},
        {"storage_lifetime_years",
         with([](ScenarioConfig& c, double v) { c.cost.storage_lifetime = v; })},
        {"wholesale_eur_per_mwh",
         with([](ScenarioConfig& c, double v) { c.cost.wholesale_price = v; })}}},
      {"sweep",
       {{"pv_step_gwp", with([](ScenarioConfig& c, double v) { c.sweep.pv_step_gwp = v; })},
        {"storage_tol", with([](ScenarioConfig& c, double v) { c.sweep.storage_tol = v; })},
        {"stop_threshold_gwh_per_gwp",
         with([](ScenarioConfig& c, double v) { c.sweep.stop_threshold = v; })},
        {"capacity_factor", with([](ScenarioConfig& c, double v) { c.sweep.capacity_factor = v; })},
        {"pv_start_gwp", with([](ScenarioConfig& c, double v) { c.sweep.pv_start_gwp = v; })},
        {"max_points",
         with([](ScenarioConfig& c, double v) { c.sweep.max_points = static_cast<int>(v); })},
        {"storage_grid_gwh",
         [](ScenarioConfig& c, const std::string&, const std::string& v) {
           c.storage_grid_gwh = parse_number_list(v);
         }},
        {"hydro_fractions",
         [](ScenarioConfig& c, const std::string&, const std::string& v) {
           c.hydro_fractions = parse_number_list(v);
         }}}},
      {"pv",
       {{"capacity_gwp", with([](ScenarioConfig& c, double v) { c.pv_gwp = v; })},
        {"panel_density_m2_per_kwp", with([](ScenarioConfig& c, double v) { c.pv.panel_density = v; })},
        {"shadow_loss", with([](ScenarioConfig& c, double v) { c.pv.shadow_loss = v; })},
        {"utilization_factor",
         with([](ScenarioConfig& c, double v) { c.pv.utilization_factor = v; })},
        {"exclude_north",
         [source](ScenarioConfig& c, const std::string& key, const std::string& v) {
           c.pv.exclude_north = to_bool(v, key, source);
         }}}},
      {"demand",
       {{"aggregation_threshold", number(&ScenarioConfig::aggregation_threshold)},
        {"per_car_annual_mwh", number(&ScenarioConfig::per_car_annual_mwh)}}},
  };
}

}  // namespace

std::string_view to_string(Mode mode) {
  return mode == Mode::kGreenfield ? "greenfield" : "brownfield";
}

void ScenarioConfig::validate() const {
  if (!(hydro_manageability >= 0.0 && hydro_manageability <= 1.0)) {
    throw InputError("hydro_manageability must lie in [0, 1]");
  }
  for (double f : hydro_fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw InputError("hydro fractions must lie in [0, 1]");
  }
  gridmix::validate(storage);
  gridmix::validate(cost);
  sweep.validate();
  pv::validate(pv);
  if (pv_gwp && !(*pv_gwp >= 0.0)) throw InputError("PV capacity must be non-negative");
  for (double g : storage_grid_gwh) {
    if (!(g >= 0.0)) throw InputError("storage grid values must be non-negative");
  }
  if (!std::is_sorted(storage_grid_gwh.begin(), storage_grid_gwh.end())) {
    throw InputError("storage grid must be sorted ascending");
  }
  if (!(aggregation_threshold > 0.0)) throw InputError("aggregation threshold must be positive");
  if (!(per_car_annual_mwh > 0.0)) throw InputError("per-car consumption must be positive");
}

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    auto item = text.substr(pos, end - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.push_back(to_number(std::string(item), "list", "number list"));
    pos = end + 1;
  }
  return out;
}

ScenarioConfig parse_scenario(std::string_view text, const std::string& source) {
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InputError(fmt::format("{}: line {}: {}", source, e.line(), e.message()));
  }

  ScenarioConfig config;
  const auto table = setters(source);
  for (const auto& [section, entries] : tree) {
    if (entries.empty() && !entries.data().empty()) {
      throw InputError(fmt::format("{}: key '{}' outside any section", source, section));
    }
    auto sec = table.find(section);
    if (sec == table.end()) {
      throw InputError(fmt::format("{}: unknown section [{}]", source, section));
    }
    for (const auto& [key, value] : entries) {
      auto setter = sec->second.find(key);
      if (setter == sec->second.end()) {
        throw InputError(fmt::format("{}: unknown key '{}' in section [{}]", source, key, section));
      }
      setter->second(config, key, value.data());
    }
  }
  config.storage.unit_cost = config.cost.storage_unit_cost;
  config.storage.lifetime = config.cost.storage_lifetime;
  try {
    config.validate();
  } catch (const InputError& e) {
    throw InputError(fmt::format("{}: {}", source, e.what()));
  }
  return config;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open scenario file", path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), path.string());
}

nlohmann::json to_json(const ScenarioConfig& c) {
  nlohmann::json j;
  j["mode"] = std::string(to_string(c.mode));
  j["include_ev"] = c.include_ev;
  j["hydro_manageability"] = c.hydro_manageability;
  j["hydro_technology"] = c.hydro_technology;
  j["portfolio"] = c.portfolio;
  j["year_label"] = c.year_label;
  j["storage"] = {{"capacity_gwh", units::mwh_to_gwh(c.storage.capacity)},
                  {"round_trip_efficiency", c.storage.round_trip_efficiency}};
  j["cost"] = {{"pv_unit_cost_eur_per_wp", c.cost.pv_unit_cost},
               {"pv_lifetime_years", c.cost.pv_lifetime},
               {"storage_unit_cost_eur_per_kwh", c.cost.storage_unit_cost},
               {"storage_lifetime_years", c.cost.storage_lifetime},
               {"wholesale_eur_per_mwh", c.cost.wholesale_price}};
  j["sweep"] = {{"pv_step_gwp", c.sweep.pv_step_gwp},
                {"storage_tol", c.sweep.storage_tol},
                {"stop_threshold_gwh_per_gwp", c.sweep.stop_threshold},
                {"capacity_factor", c.sweep.capacity_factor},
                {"max_points", c.sweep.max_points},
                {"storage_grid_gwh", c.storage_grid_gwh},
                {"hydro_fractions", c.hydro_fractions}};
  if (c.sweep.pv_start_gwp) j["sweep"]["pv_start_gwp"] = *c.sweep.pv_start_gwp;
  j["pv"] = {{"panel_density_m2_per_kwp", c.pv.panel_density},
             {"shadow_loss", c.pv.shadow_loss},
             {"utilization_factor", c.pv.utilization_factor},
             {"exclude_north", c.pv.exclude_north}};
  if (c.pv_gwp) j["pv"]["capacity_gwp"] = *c.pv_gwp;
  j["demand"] = {{"aggregation_threshold", c.aggregation_threshold},
                 {"per_car_annual_mwh", c.per_car_annual_mwh}};
  return j;
}

}  // namespace gridmix
