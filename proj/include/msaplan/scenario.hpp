#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "msaplan/machine.hpp"
#include "msaplan/sweep.hpp"

namespace msa {

struct RunOptions {
  std::vector<std::string> modules;  // empty: every module of the machine
  std::optional<std::int64_t> count;
  std::vector<std::pair<std::string, std::int64_t>> devices;  // explicit per-module device counts
  std::vector<std::int64_t> counts;                           // strong-scaling sweep
  std::optional<double> weight;                               // fixed GPU rank weight
  std::vector<double> weight_grid;
  std::uint64_t seed = 0;
  std::int64_t samples = 100;
  double rel_sigma = 0.0;
  double extreme_fill_ratio = kDefaultExtremeFillRatio;
  CapacityMode capacity = CapacityMode::Usable;

  bool operator==(const RunOptions&) const = default;
};

enum class NetworkVariant { Host, Device };

struct Scenario {
  MachineSpec machine;
  CaseSpec case_spec;
  NetworkVariant network_variant = NetworkVariant::Host;
  NetworkParams network;  // selected variant with overrides applied
  IoParams io;
  RunOptions run;

  bool operator==(const Scenario&) const = default;
};

class ScenarioError : public std::runtime_error {
 public:
  enum class Kind { Parse, Validation, UnknownPreset };

  ScenarioError(Kind kind, const std::string& what, int line = 0, int column = 0)
      : std::runtime_error(what), kind_(kind), line_(line), column_(column) {}

  Kind kind() const { return kind_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  Kind kind_;
  int line_;
  int column_;
};

/// Parses and validates a scenario document. Throws ScenarioError.
Scenario parse_scenario(std::string_view text, std::string_view origin = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path);

/// Scenario built from named presets with default run options.
Scenario scenario_from_presets(std::string_view machine, std::string_view case_name);

/// Fully explicit scenario document (no preset references).
std::string serialize(const Scenario& s);

std::vector<Violation> validate(const Scenario& s);

/// Module indices taken part in the run, in run order.
std::vector<std::size_t> resolve_modules(const Scenario& s);

/// Device mix used by plan, partition and io-report.
Mix resolve_mix(const Scenario& s);

SimOptions sim_options(const Scenario& s);

}  // namespace msa
