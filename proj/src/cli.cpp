#include "gridmix/cli.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <openssl/evp.h>

#include <CLI11.hpp>
#include <array>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <memory>
#include <ostream>

#include "gridmix/balance.hpp"
#include "gridmix/csv.hpp"
#include "gridmix/pipeline.hpp"
#include "gridmix/scenario.hpp"

namespace gridmix::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file for hashing", path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 initialisation failed");
  }
  std::array<char, 1 << 16> buffer{};
  while (in) {
    in.read(buffer.data(), buffer.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buffer.data(), in.gcount());
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &length);
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

namespace {

// Collects what a run read and wrote, then seals it into manifest.json.
class RunRecord {
 public:
  RunRecord(std::string command, std::vector<std::string> args, fs::path out)
      : command_(std::move(command)), args_(std::move(args)), out_(std::move(out)),
        start_(std::chrono::steady_clock::now()) {
    fs::create_directories(out_);
  }

  void input(const fs::path& p) { inputs_.push_back(fs::absolute(p).lexically_normal()); }
  void inputs(const std::vector<fs::path>& ps) {
    for (const auto& p : ps) input(p);
  }
  fs::path output(const std::string& name) {
    outputs_.push_back(name);
    return out_ / name;
  }
  void scenario(json j) { scenario_ = std::move(j); }

  void seal() const {
    json m;
    m["command"] = command_;
    m["arguments"] = args_;
    m["version"] = GRIDMIX_VERSION;
    m["scenario"] = scenario_;
    m["inputs"] = json::array();
    for (const auto& p : inputs_) {
      m["inputs"].push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
    }
    m["outputs"] = json::array();
    for (const auto& name : outputs_) {
      m["outputs"].push_back({{"path", name}, {"sha256", sha256_file(out_ / name)}});
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
    m["wall_clock_seconds"] = elapsed.count();
    std::ofstream f(out_ / kManifest, std::ios::binary);
    f << m.dump(2) << '\n';
  }

 private:
  std::string command_;
  std::vector<std::string> args_;
  fs::path out_;
  std::chrono::steady_clock::time_point start_;
  std::vector<fs::path> inputs_;
  std::vector<std::string> outputs_;
  json scenario_ = json::object();
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  f << j.dump(2) << '\n';
}

std::string num(double v) { return csv::format_double(v); }

struct Options {
  std::string data_dir;
  std::string scenario_file;
  std::string out = "run";
  int jobs = 1;
  std::string hydro_fractions;
};

fs::path data_dir_or_env(const std::string& given) {
  if (!given.empty()) return given;
  if (const char* env = std::getenv("GRIDMIX_DATA"); env && *env) return env;
  throw InputError("no data directory given and GRIDMIX_DATA is not set");
}

ScenarioConfig scenario_from(const Options& o, RunRecord& run) {
  ScenarioConfig s;
  if (!o.scenario_file.empty()) {
    s = load_scenario(o.scenario_file);
    run.input(o.scenario_file);
  }
  if (o.jobs < 1) throw InputError("--jobs must be at least 1");
  s.sweep.jobs = o.jobs;
  if (!o.hydro_fractions.empty()) s.hydro_fractions = parse_number_list(o.hydro_fractions);
  s.validate();
  run.scenario(to_json(s));
  return s;
}

pipeline::Bundle bundle_for_run(const fs::path& dir, const ScenarioConfig& s) {
  auto bundle = pipeline::load_bundle(dir, s.portfolio);
  if (bundle.municipalities.provenance() == Provenance::kRaw) {
    bundle.municipalities =
        aggregate_small_municipalities(bundle.municipalities, s.aggregation_threshold);
  }
  return bundle;
}

void print_warnings(const pipeline::Bundle& b, std::ostream& err) {
  for (const auto& w : b.warnings) fmt::print(err, "warning: {}\n", w);
}

void cmd_prepare(const Options& o, const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err) {
  RunRecord run("prepare", args, o.out);
  const auto scenario = scenario_from(o, run);
  const auto dir = data_dir_or_env(o.data_dir);
  const auto bundle = bundle_for_run(dir, scenario);
  print_warnings(bundle, err);
  run.inputs(bundle.sources);
  // Building the model catches cross-file problems such as a region
  // without canonical days.
  const auto model = pipeline::build_national_model(bundle, scenario);
  for (const auto& p : pipeline::write_bundle(bundle, o.out)) {
    run.output(p.filename().string());
  }
  run.seal();
  fmt::print(out, "prepared {} entities ({} municipalities read) into {}\n",
             bundle.municipalities.size(), model.municipalities.size(), o.out);
}

void write_group_csv(const fs::path& path, const std::map<std::string, pipeline::GroupSeries>& g,
                     const char* key) {
  std::ofstream f(path, std::ios::binary);
  csv::write_row(f, {key, "demand_mwh", "production_mwh", "capacity_mwp", "equivalent_hours",
                     "balance_mwh"});
  for (const auto& [name, s] : g) {
    const double d = s.demand.sum();
    const double p = s.production.sum();
    const double hours = s.capacity_mwp > 0.0 ? p / s.capacity_mwp : 0.0;
    csv::write_row(f, {name, num(d), num(p), num(s.capacity_mwp), num(hours), num(p - d)});
  }
}

void cmd_balance(const Options& o, const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err) {
  RunRecord run("balance", args, o.out);
  const auto scenario = scenario_from(o, run);
  const auto bundle = bundle_for_run(data_dir_or_env(o.data_dir), scenario);
  print_warnings(bundle, err);
  run.inputs(bundle.sources);

  const auto model = pipeline::build_national_model(bundle, scenario);
  const auto system = pipeline::residual_system(model, bundle, scenario);
  double pv_mw = 0.0;
  if (scenario.pv_gwp) {
    pv_mw = units::gw_to_mw(*scenario.pv_gwp);
  } else if (scenario.mode == Mode::kGreenfield) {
    pv_mw = model.pv_capacity_mwp;
  }
  const auto r = system.simulate(pv_mw, scenario.storage.capacity);
  const double eta = scenario.storage.round_trip_efficiency;
  const double total = r.total_demand;

  {
    std::ofstream f(run.output("soc_trace.csv"), std::ios::binary);
    csv::write_row(f, {"hour", "soc_mwh"});
    for (Eigen::Index h = 0; h < r.soc_trace.size(); ++h) {
      csv::write_row(f, {std::to_string(h), num(r.soc_trace(h))});
    }
  }
  {
    const HourlySeries production(system.pv_profile * pv_mw + system.esp_nonmanageable,
                                  scenario.year_label);
    std::ofstream f(run.output("periodic_balance.csv"), std::ios::binary);
    csv::write_row(f, {"period", "label", "production_mwh", "demand_mwh", "balance_mwh"});
    for (auto period : {balance::Period::kMonth, balance::Period::kQuarter, balance::Period::kYear}) {
      for (const auto& row : balance::periodic_balance(model.demand, production, period)) {
        csv::write_row(f, {std::string(balance::to_string(period)), row.label, num(row.production),
                           num(row.demand), num(row.balance)});
      }
    }
  }
  std::map<std::string, double> annual;
  {
    std::ofstream f(run.output("municipal_balance.csv"), std::ios::binary);
    csv::write_row(f, {"id", "name", "province", "region", "base_demand_mwh", "ev_demand_mwh",
                       "production_mwh", "capacity_mwp", "balance_mwh", "status"});
    for (const auto& s : model.municipalities) {
      const auto& m = *s.municipality;
      annual[m.id] = s.demand_mwh();
      const double b = s.balance_mwh();
      csv::write_row(f, {m.id, m.name, m.province, m.region, num(s.base_demand_mwh),
                         num(s.ev_demand_mwh), num(s.production_mwh), num(s.capacity_mwp),
                         num(b), b > 0.0 ? "surplus" : (b < 0.0 ? "deficit" : "balanced")});
    }
  }
  write_group_csv(run.output("provincial_balance.csv"), model.provinces, "province");
  write_group_csv(run.output("regional_balance.csv"), model.regions, "region");
  {
    std::ofstream f(run.output("lorenz.csv"), std::ios::binary);
    csv::write_row(f, {"count_share", "demand_share"});
    for (const auto& p : balance::lorenz_curve(annual)) {
      csv::write_row(f, {num(p.count_share), num(p.demand_share)});
    }
  }

  const double esp_nm = system.esp_nonmanageable.sum();
  const double pv_energy = (system.pv_profile * pv_mw).sum();
  const double available = r.total_production + system.manageable_budget;
  json summary;
  summary["mode"] = std::string(to_string(scenario.mode));
  summary["pv_gwp"] = units::mw_to_gw(pv_mw);
  summary["storage_gwh"] = units::mwh_to_gwh(scenario.storage.capacity);
  summary["rooftop_potential_gwp"] = units::mw_to_gw(model.pv_capacity_mwp);
  summary["extrapolated_municipalities"] = model.extrapolated_count;
  summary["ledger"] = {
      {"total_demand_mwh", r.total_demand},
      {"nonmanageable_production_mwh", r.total_production},
      {"served_mwh", r.served},
      {"unserved_mwh", r.unserved},
      {"curtailed_mwh", r.curtailed},
      {"storage_losses_mwh", r.storage_losses},
      {"manageable_used_mwh", r.manageable_used},
      {"direct_supplied_mwh", r.direct_supplied},
      {"battery_discharged_mwh", r.battery_discharged},
      {"battery_charge_input_mwh", r.battery_charge_input},
      {"soc_start_mwh", r.soc_start},
      {"soc_end_mwh", r.soc_end},
      {"peak_charge_mw", r.peak_charge_power},
      {"peak_discharge_mw", r.peak_discharge_power},
      {"cyclic", r.cyclic},
      {"residual", balance::ledger_residual(r, eta)},
  };
  summary["coverage"] = total > 0.0 ? balance::coverage(r, total) : 1.0;
  const double base = scenario.include_ev ? model.base_demand.sum() : model.demand.sum();
  const double ev = scenario.include_ev ? model.ev_demand.sum() : 0.0;
  summary["table"] = json::array({
      {{"group", "demand"}, {"item", "base demand"}, {"twh", units::mwh_to_twh(base)}},
      {{"group", "demand"}, {"item", "EV demand"}, {"twh", units::mwh_to_twh(ev)}},
      {{"group", "demand"}, {"item", "total"}, {"twh", units::mwh_to_twh(total)}},
      {{"group", "production"}, {"item", "non-manageable ESP"}, {"twh", units::mwh_to_twh(esp_nm)}},
      {{"group", "production"}, {"item", "rooftop PV"}, {"twh", units::mwh_to_twh(pv_energy)}},
      {{"group", "production"},
       {"item", "manageable"},
       {"twh", units::mwh_to_twh(system.manageable_budget)}},
      {{"group", "production"}, {"item", "total"}, {"twh", units::mwh_to_twh(available)}},
      {{"group", "balance"}, {"item", "total demand"}, {"twh", units::mwh_to_twh(total)}},
      {{"group", "balance"},
       {"item", "used energy"},
       {"twh", units::mwh_to_twh(r.served)},
       {"share_of_production", available > 0.0 ? r.served / available : 0.0}},
      {{"group", "balance"}, {"item", "unserved demand"}, {"twh", -units::mwh_to_twh(r.unserved)}},
      {{"group", "balance"}, {"item", "curtailed"}, {"twh", units::mwh_to_twh(r.curtailed)}},
  });
  write_json(run.output("summary.json"), summary);
  run.seal();

  fmt::print(out, "demand {:.3f} TWh, served {:.3f} TWh, unserved {:.3f} TWh, coverage {:.4f}\n",
             units::mwh_to_twh(total), units::mwh_to_twh(r.served),
             units::mwh_to_twh(r.unserved), summary["coverage"].get<double>());
}

json point_json(const opt::OperatingPoint& p) {
  return {{"pv_gwp", p.pv_gwp},
          {"storage_gwh", p.storage_gwh},
          {"lcoe_eur_mwh", p.lcoe},
          {"blended_eur_mwh", p.blended_cost},
          {"curtailed_twh", p.curtailed_twh},
          {"served_fraction", p.served_fraction},
          {"useful_new_twh", p.useful_new_twh},
          {"storage_losses_twh", p.storage_losses_twh},
          {"manageable_used_twh", p.manageable_used_twh},
          {"rated_power_gw", p.rated_power_gw},
          {"storage_hours", p.rated_power_gw > 0.0
                                ? opt::storage_hours(p.storage_gwh, p.rated_power_gw)
                                : 0.0}};
}

void cmd_optimize(const Options& o, const std::vector<std::string>& args, std::ostream& out,
                  std::ostream& err) {
  RunRecord run("optimize", args, o.out);
  const auto scenario = scenario_from(o, run);
  const auto bundle = bundle_for_run(data_dir_or_env(o.data_dir), scenario);
  print_warnings(bundle, err);
  run.inputs(bundle.sources);

  const auto model = pipeline::build_national_model(bundle, scenario);
  const auto system = pipeline::residual_system(model, bundle, scenario);
  const auto sweep = opt::pv_storage_isoquant(system, scenario.sweep, scenario.cost);
  {
    std::ofstream f(run.output("isoquant.csv"), std::ios::binary);
    csv::write_row(f, {"pv_gwp", "storage_gwh", "lcoe_eur_mwh", "blended_eur_mwh",
                       "curtailed_twh", "flag"});
    for (const auto& p : sweep.points) {
      csv::write_row(f, {num(p.pv_gwp), num(p.storage_gwh), num(p.lcoe), num(p.blended_cost),
                         num(p.curtailed_twh), p.flagged ? "1" : "0"});
    }
  }

  std::vector<opt::SensitivityRow> rows;
  if (!scenario.hydro_fractions.empty()) {
    if (!bundle.portfolio) {
      throw InputError("hydro sensitivity needs a portfolio file ('" + scenario.portfolio + "')");
    }
    auto base = system;
    if (scenario.mode == Mode::kGreenfield) {
      base.esp_nonmanageable.setZero();
      base.manageable_budget = 0.0;
      base.manageable_power_cap = 0.0;
    }
    rows = opt::hydro_manageability_sweep(base, *bundle.portfolio, scenario.hydro_fractions,
                                          scenario.sweep, scenario.cost,
                                          scenario.hydro_technology);
  }
  {
    std::ofstream f(run.output("sensitivity.csv"), std::ios::binary);
    csv::write_row(f, {"hydro_fraction", "pv_gwp", "storage_gwh", "lcoe_eur_mwh"});
    for (const auto& r : rows) {
      csv::write_row(f, {num(r.hydro_fraction), num(r.least_cost.pv_gwp),
                         num(r.least_cost.storage_gwh), num(r.least_cost.lcoe)});
    }
  }

  if (!scenario.storage_grid_gwh.empty()) {
    const double pv = scenario.pv_gwp.value_or(sweep.least_cost().pv_gwp);
    const auto curve = opt::coverage_vs_storage_curve(system, pv, scenario.storage_grid_gwh,
                                                      scenario.cost, scenario.sweep.jobs);
    std::ofstream f(run.output("coverage.csv"), std::ios::binary);
    csv::write_row(f, {"pv_gwp", "storage_gwh", "served_fraction", "lcoe_eur_mwh",
                       "blended_eur_mwh", "curtailed_twh"});
    for (const auto& p : curve) {
      csv::write_row(f, {num(p.pv_gwp), num(p.storage_gwh), num(p.served_fraction),
                         num(p.lcoe), num(p.blended_cost), num(p.curtailed_twh)});
    }
  }

  json summary;
  summary["mode"] = std::string(to_string(scenario.mode));
  summary["least_cost"] = point_json(sweep.least_cost());
  summary["points"] = sweep.points.size();
  summary["flagged_points"] = sweep.flagged_count();
  summary["skipped_infeasible_steps"] = sweep.skipped_infeasible;
  summary["min_pv_asymptote_gwp"] = sweep.min_pv_asymptote_gwp;
  summary["min_storage_asymptote_gwh"] = sweep.min_storage_asymptote_gwh;
  summary["sensitivity"] = json::array();
  for (const auto& r : rows) {
    auto j = point_json(r.least_cost);
    j["hydro_fraction"] = r.hydro_fraction;
    summary["sensitivity"].push_back(j);
  }
  write_json(run.output("least_cost.json"), summary);
  run.seal();

  const auto& best = sweep.least_cost();
  fmt::print(out, "least cost: {:.2f} GWp PV, {:.2f} GWh storage, LCOE {:.2f} EUR/MWh ({} points)\n",
             best.pv_gwp, best.storage_gwh, best.lcoe, sweep.points.size());
}

void print_table(const fs::path& csv_path, std::ostream& out) {
  const auto t = csv::read(csv_path);
  fmt::print(out, "\n{}\n", csv_path.filename().string());
  std::vector<std::size_t> width(t.header.size());
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    width[c] = t.header[c].size();
    for (const auto& row : t.rows) width[c] = std::max(width[c], row[c].size());
  }
  auto line = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      fmt::print(out, "{}{:>{}}", c ? "  " : "", row[c], width[c]);
    }
    fmt::print(out, "\n");
  };
  line(t.header);
  for (const auto& row : t.rows) line(row);
}

void cmd_report(const std::string& dir, std::ostream& out) {
  const fs::path run_dir = dir;
  const auto mismatches = verify_manifest(run_dir);
  std::ifstream f(run_dir / kManifest, std::ios::binary);
  const auto manifest = json::parse(f);
  fmt::print(out, "run: {} (gridmix {}), {:.3f} s\n", manifest.at("command").get<std::string>(),
             manifest.at("version").get<std::string>(),
             manifest.at("wall_clock_seconds").get<double>());
  for (const auto& name : {"summary.json", "least_cost.json"}) {
    if (fs::is_regular_file(run_dir / name)) {
      std::ifstream in(run_dir / name, std::ios::binary);
      const auto j = json::parse(in);
      if (j.contains("table")) {
        fmt::print(out, "\n{:<12} {:<20} {:>12}\n", "group", "item", "TWh");
        for (const auto& row : j["table"]) {
          fmt::print(out, "{:<12} {:<20} {:>12.3f}\n", row["group"].get<std::string>(),
                     row["item"].get<std::string>(), row["twh"].get<double>());
        }
        fmt::print(out, "coverage {:.4f}, ledger residual {:.3g}\n", j["coverage"].get<double>(),
                   j["ledger"]["residual"].get<double>());
      }
      if (j.contains("least_cost")) {
        const auto& p = j["least_cost"];
        fmt::print(out, "\nleast cost: {:.2f} GWp, {:.2f} GWh, LCOE {:.2f} EUR/MWh, "
                        "blended {:.2f} EUR/MWh\n",
                   p["pv_gwp"].get<double>(), p["storage_gwh"].get<double>(),
                   p["lcoe_eur_mwh"].get<double>(), p["blended_eur_mwh"].get<double>());
      }
    }
  }
  for (const auto& name : {"sensitivity.csv", "periodic_balance.csv"}) {
    if (fs::is_regular_file(run_dir / name)) print_table(run_dir / name, out);
  }
  if (!mismatches.empty()) {
    std::string list;
    for (const auto& m : mismatches) list += "\n  " + m;
    throw Error("manifest digests do not verify:" + list);
  }
  fmt::print(out, "\nall digests verify\n");
}

}  // namespace

std::vector<std::string> verify_manifest(const fs::path& run_dir) {
  const auto path = run_dir / kManifest;
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("run directory has no manifest", path.string());
  json m;
  try {
    m = json::parse(f);
  } catch (const json::exception& e) {
    throw InputError(std::string("manifest is not valid JSON: ") + e.what(), path.string());
  }
  std::vector<std::string> bad;
  auto check = [&](const json& entry, const fs::path& file) {
    const auto expected = entry.at("sha256").get<std::string>();
    if (!fs::is_regular_file(file)) {
      bad.push_back(file.string() + ": missing");
    } else if (sha256_file(file) != expected) {
      bad.push_back(file.string() + ": digest differs");
    }
  };
  for (const auto& e : m.at("inputs")) check(e, e.at("path").get<std::string>());
  for (const auto& e : m.at("outputs")) check(e, run_dir / e.at("path").get<std::string>());
  return bad;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hourly electricity-mix simulator and PV/storage sizing", "gridmix"};
  app.set_version_flag("--version", GRIDMIX_VERSION);
  app.require_subcommand(1);

  Options o;
  auto add_common = [&](CLI::App* sub, bool optimize) {
    sub->add_option("data_dir", o.data_dir, "Data or bundle directory (default: $GRIDMIX_DATA)");
    sub->add_option("--scenario", o.scenario_file, "Scenario file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "Run directory for outputs")->capture_default_str();
    sub->add_option("--jobs", o.jobs, "Maximum concurrent evaluations")->capture_default_str();
    if (optimize) {
      sub->add_option("--hydro-fractions", o.hydro_fractions,
                      "Comma-separated hydro manageability fractions");
    }
  };
  auto* prepare = app.add_subcommand("prepare", "Validate a data directory and write a bundle");
  add_common(prepare, false);
  auto* bal = app.add_subcommand("balance", "Run the hourly balance for a scenario");
  add_common(bal, false);
  auto* optimize = app.add_subcommand("optimize", "Sweep the PV/storage isoquant");
  add_common(optimize, true);
  std::string report_dir;
  auto* report = app.add_subcommand("report", "Verify a run directory and print its tables");
  report->add_option("run_dir", report_dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    if (*prepare) cmd_prepare(o, args, out, err);
    if (*bal) cmd_balance(o, args, out, err);
    if (*optimize) cmd_optimize(o, args, out, err);
    if (*report) cmd_report(report_dir, out);
  } catch (const InfeasibleError& e) {
    fmt::print(err, "error: {} (gap {:.6g} MWh)\n", e.what(), e.gap_mwh());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"gridmix"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace gridmix::cli
