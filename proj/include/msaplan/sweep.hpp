#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msaplan/machine.hpp"
#include "msaplan/mesh.hpp"
#include "msaplan/perfsim.hpp"

namespace msa {

struct SimOptions {
  NetworkParams network;
  IoParams io;
  double extreme_fill_ratio = kDefaultExtremeFillRatio;
  CapacityMode capacity = CapacityMode::Usable;
};

/// Everything derived for one device mix: the model allocation, the
/// partition that realises the chosen split, and the simulated timestep.
struct MixEvaluation {
  Mix mix;
  std::vector<DeviceClass> classes;
  RankLayout layout;
  Allocation model;  // capacity-aware min-max allocation
  bool feasible = false;
  std::string infeasible_reason;
  Partition partition;
  CommPlan plan;
  TimestepEstimate estimate;
};

/// Without `gpu_weight` the split follows the model allocation; with it,
/// ranks are weighted directly and any rank pushed past its capacity makes
/// the evaluation infeasible.
MixEvaluation evaluate_mix(const BoxMesh& mesh, const Workload& w, const MachineSpec& m, const Mix& mix,
                           std::optional<double> gpu_weight, const SimOptions& opts);

/// Splits `devices` evenly over `modules` (1:1 mix for two modules).
Mix even_mix(const MachineSpec& m, std::span<const std::size_t> modules, std::int64_t devices);

struct ScalingRow {
  std::int64_t devices = 0;
  std::int64_t gpu_devices = 0;
  std::int64_t cpu_cores = 0;
  double elements_per_gpu = 0.0;
  double elements_per_core = 0.0;
  double t_a_max = 0.0;
  double t_c_max = 0.0;
  double t_io_max = 0.0;
  double t_total = 0.0;
  double speedup = 0.0;
  double parallel_efficiency = 0.0;
  double model_tmin = 0.0;
  double linear_ref = 0.0;
  std::string domain;
  bool feasible = false;
};

struct ScalingTable {
  std::vector<ScalingRow> rows;
};

inline constexpr const char* kScalingCsvHeader =
    "devices,gpu_devices,cpu_cores,elements_per_gpu,elements_per_core,t_a_max,t_c_max,t_io_max,t_total,"
    "speedup,parallel_efficiency,model_tmin,domain";

/// CSV in the documented column order; `linear_ref` appends the perfect
/// linear scaling reference column.
void write_scaling_csv(std::ostream& out, const ScalingTable& table, bool linear_ref = false);

/// Strong-scaling sweep over total device counts. Points are evaluated
/// concurrently and returned in input order. Speedup and efficiency are
/// relative to the first feasible point.
ScalingTable sweep_strong_scaling(const BoxMesh& mesh, const Workload& w, const MachineSpec& m,
                                  std::span<const std::size_t> modules, std::span<const std::int64_t> device_counts,
                                  std::optional<double> gpu_weight, const SimOptions& opts);

struct WeightRow {
  double weight = 0.0;
  bool feasible = false;
  double total = 0.0;
  double elements_per_gpu = 0.0;
};

struct WeightSearch {
  bool found = false;
  double best_weight = 0.0;
  double best_time = 0.0;
  std::vector<WeightRow> table;
};

/// Evaluates every GPU weight on the grid; the fastest feasible one wins,
/// ties going to the smaller weight.
WeightSearch search_weight(const BoxMesh& mesh, const Workload& w, const MachineSpec& m, const Mix& mix,
                           std::span<const double> weight_grid, const SimOptions& opts);

}  // namespace msa
