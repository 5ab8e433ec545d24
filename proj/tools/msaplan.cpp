// msaplan: capacity-aware load-balancing planner for modular CPU/GPU machines.

#include <array>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "msaplan/report.hpp"

namespace {

struct Flags {
  std::string scenario;
  std::string preset_machine;
  std::string preset_case;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::string format = "text";
  std::vector<std::string> modules;
  std::optional<std::int64_t> count;
  std::vector<std::int64_t> counts;
  std::vector<std::string> devices;
  std::optional<double> weight;
  std::vector<double> weight_grid;
  std::string dims;
  std::string network;
  std::string capacity;
  bool enable_io = false;
};

std::array<int, 3> parse_dims(const std::string& text) {
  std::array<int, 3> d{};
  std::string s = text;
  for (auto& c : s) {
    if (c == 'x' || c == 'X' || c == ',') c = ' ';
  }
  std::istringstream in(s);
  std::string rest;
  if (!(in >> d[0] >> d[1] >> d[2]) || (in >> rest)) {
    throw std::invalid_argument(fmt::format("--dims expects NXxNYxNZ, got '{}'", text));
  }
  return d;
}

msa::Scenario build_scenario(const Flags& f) {
  msa::Scenario s;
  if (!f.scenario.empty()) {
    if (!f.preset_machine.empty() || !f.preset_case.empty()) {
      throw std::invalid_argument("use either --scenario or --preset-machine/--preset-case, not both");
    }
    s = msa::load_scenario(f.scenario);
  } else {
    if (f.preset_machine.empty() || f.preset_case.empty()) {
      throw std::invalid_argument("give --scenario, or both --preset-machine and --preset-case");
    }
    s = msa::scenario_from_presets(f.preset_machine, f.preset_case);
  }

  auto& run = s.run;
  if (f.seed) run.seed = *f.seed;
  if (!f.modules.empty()) run.modules = f.modules;
  if (f.count) {
    run.count = f.count;
    run.devices.clear();
  }
  if (!f.counts.empty()) run.counts = f.counts;
  if (!f.devices.empty()) {
    run.devices.clear();
    for (const auto& d : f.devices) {
      const auto eq = d.find('=');
      if (eq == std::string::npos) throw std::invalid_argument(fmt::format("--devices expects MODULE=N, got '{}'", d));
      run.devices.emplace_back(d.substr(0, eq), std::stoll(d.substr(eq + 1)));
    }
  }
  if (f.weight) run.weight = f.weight;
  if (!f.weight_grid.empty()) run.weight_grid = f.weight_grid;
  if (!f.dims.empty()) s.case_spec.mesh_dims = parse_dims(f.dims);
  if (!f.network.empty()) {
    s.network_variant = f.network == "device" ? msa::NetworkVariant::Device : msa::NetworkVariant::Host;
    s.network = f.network == "device" ? s.machine.device_network : s.machine.host_network;
  }
  if (!f.capacity.empty()) {
    run.capacity = f.capacity == "theoretical" ? msa::CapacityMode::Theoretical : msa::CapacityMode::Usable;
  }
  if (f.enable_io) s.io.enabled = true;

  const auto violations = msa::validate(s);
  if (!violations.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& v : violations) msg += fmt::format("\n  {}: {}", v.field, v.rule);
    throw msa::ScenarioError(msa::ScenarioError::Kind::Validation, msg);
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Capacity-aware load balancing planner for modular CPU/GPU supercomputers"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("--scenario", f.scenario, "Scenario file");
  app.add_option("--preset-machine", f.preset_machine, "Built-in machine (deep, juwels, lumi-g)");
  app.add_option("--preset-case", f.preset_case, "Built-in case (pipe, tgv, rbc)");
  app.add_option("--seed", f.seed, "Seed for jittered timings");
  app.add_option("--out", f.out, "Output directory for partition files");
  app.add_option("--format", f.format, "Table format")->check(CLI::IsMember({"text", "csv"}));
  app.add_option("--modules", f.modules, "Modules taking part, comma separated")->delimiter(',');
  app.add_option("--count", f.count, "Total devices, split evenly over the modules");
  app.add_option("--counts", f.counts, "Device counts for the sweep, comma separated")->delimiter(',');
  app.add_option("--devices", f.devices, "Explicit MODULE=N device count, repeatable")->delimiter(',');
  app.add_option("--weight", f.weight, "Fixed GPU rank weight (CPU core rank = 1)");
  app.add_option("--weight-grid", f.weight_grid, "GPU weights to search, comma separated")->delimiter(',');
  app.add_option("--dims", f.dims, "Box mesh dimensions, e.g. 30x32x38");
  app.add_option("--network", f.network, "Network path")->check(CLI::IsMember({"host", "device"}));
  app.add_option("--capacity", f.capacity, "Capacity mode")->check(CLI::IsMember({"usable", "theoretical"}));
  app.add_flag("--enable-io", f.enable_io, "Enable the I/O phase");

  auto* plan = app.add_subcommand("plan", "Model allocation, feasibility and simulated timestep");
  auto* sweep = app.add_subcommand("sweep", "Strong-scaling table");
  auto* partition = app.add_subcommand("partition", "Write partition.csv and comm.csv");
  auto* io_report = app.add_subcommand("io-report", "Per-node I/O times and imbalance");
  auto* presets = app.add_subcommand("presets", "List built-in machines and cases");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return msa::kExitError;
  }

  const msa::CommandIo io{std::cout, std::cerr,
                          f.format == "csv" ? msa::OutputFormat::Csv : msa::OutputFormat::Text};
  if (presets->parsed()) return msa::cmd_presets(io);

  msa::Scenario s;
  try {
    s = build_scenario(f);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return msa::kExitError;
  }

  if (plan->parsed()) return msa::cmd_plan(s, io);
  if (sweep->parsed()) return msa::cmd_sweep(s, io);
  if (partition->parsed()) return msa::cmd_partition(s, f.out, io);
  if (io_report->parsed()) return msa::cmd_io_report(s, io);
  return msa::kExitError;
}
