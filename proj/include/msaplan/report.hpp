#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "msaplan/scenario.hpp"

namespace msa {

enum class OutputFormat { Text, Csv };

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInfeasible = 2;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Aligned columns for text, RFC 4180-style rows for csv.
void print_table(std::ostream& out, const Table& table, OutputFormat format);

/// Explicit case dimensions, else the most-cubic factorisation of E.
/// Throws std::invalid_argument when neither is available.
BoxMesh resolve_mesh(const CaseSpec& c);

struct AllocationView {
  CapacityMode capacity = CapacityMode::Usable;
  std::vector<DeviceClass> classes;
  std::vector<std::int64_t> ranks_per_device;
  Allocation allocation;
};

struct RunReport {
  Scenario scenario;
  Mix mix;
  Feasibility memory;
  std::vector<AllocationView> allocations;  // selected capacity mode first
  std::optional<MixEvaluation> simulation;
  std::string simulation_note;
  std::optional<Interval> band;  // jittered total, when run.rel_sigma > 0
  std::optional<WeightSearch> weights;

  bool feasible() const;
};

RunReport plan_report(const Scenario& s);

struct CommandIo {
  std::ostream& out;
  std::ostream& err;
  OutputFormat format = OutputFormat::Text;
};

int cmd_plan(const Scenario& s, const CommandIo& io);
int cmd_sweep(const Scenario& s, const CommandIo& io);
/// Writes partition.csv and comm.csv into `out_dir`.
int cmd_partition(const Scenario& s, const std::filesystem::path& out_dir, const CommandIo& io);
int cmd_io_report(const Scenario& s, const CommandIo& io);
int cmd_presets(const CommandIo& io);

}  // namespace msa
