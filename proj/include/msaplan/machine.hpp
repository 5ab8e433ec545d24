#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msaplan/model.hpp"
#include "msaplan/perfsim.hpp"

namespace msa {

enum class ModuleKind { Gpu, Cpu };

std::string_view to_string(ModuleKind k);
std::optional<ModuleKind> parse_module_kind(std::string_view s);

/// One internally homogeneous module of a machine (e.g. a GPU booster).
///
/// A computing device is one logical GPU for GPU modules and one node for
/// CPU modules. GPU modules run one rank per device; CPU modules run one
/// rank per core.
struct ModuleSpec {
  std::string name;
  ModuleKind kind = ModuleKind::Cpu;
  std::string device;                // human-readable device description
  std::int64_t nodes = 1;
  std::int64_t devices_per_node = 1;
  std::int64_t cores_per_node = 1;
  std::int64_t count = 1;            // devices; equals nodes * devices_per_node
  double p_opt = 1.0;                // element-timesteps/s per device
  double eff_half_load = 0.0;        // elements per device at 50% efficiency
  double mem_per_device_gb = 0.0;
  std::optional<double> usable_mem_gb;  // memory left for elements after solver overhead
  double io_bw_gbs = 0.0;            // per device, 0 uses the machine I/O default

  std::int64_t ranks_per_device() const;
  /// Memory-limited elements per device.
  double c_max(double mem_per_element) const;
  /// Elements per device the solver can actually use; c_max when no overhead is recorded.
  double usable_c_max(double mem_per_element) const;
  DeviceClass device_class(std::int64_t devices, double mem_per_element, bool usable = true) const;

  bool operator==(const ModuleSpec&) const = default;
};

struct MachineSpec {
  std::string name;
  std::vector<ModuleSpec> modules;
  NetworkParams host_network;
  NetworkParams device_network;
  IoParams io;

  /// Index of the named module, or nullopt.
  std::optional<std::size_t> find(std::string_view module) const;
  bool operator==(const MachineSpec&) const = default;
};

struct CaseSpec {
  std::string name;
  Workload workload{1, 7};
  std::optional<std::array<int, 3>> mesh_dims;
  bool box_geometry = true;  // false: auto box dimensions are refused

  bool operator==(const CaseSpec&) const = default;
};

inline constexpr double kDefaultMemPerElement = 0.001;  // GB, polynomial order 7
inline constexpr int kDefaultPolyOrder = 7;

std::vector<MachineSpec> builtin_machines();
std::vector<CaseSpec> builtin_cases();
std::optional<MachineSpec> find_machine_preset(std::string_view name);
std::optional<CaseSpec> find_case_preset(std::string_view name);

struct Violation {
  std::string field;
  std::string rule;
};

std::vector<Violation> validate(const MachineSpec& m);
std::vector<Violation> validate(const CaseSpec& c);

/// Devices taken from one module of a machine.
struct MixEntry {
  std::size_t module = 0;
  std::int64_t devices = 0;

  bool operator==(const MixEntry&) const = default;
};
using Mix = std::vector<MixEntry>;

enum class CapacityMode { Usable, Theoretical };

std::vector<DeviceClass> device_classes(const MachineSpec& m, const Mix& mix, double mem_per_element,
                                        CapacityMode capacity = CapacityMode::Usable);

/// Ranks ordered by mix entry, then device, then core. Each mix entry is one
/// rank class; nodes are numbered in the same order.
RankLayout rank_layout(const MachineSpec& m, const Mix& mix, double mem_per_element,
                       CapacityMode capacity = CapacityMode::Usable);

/// Per-rank partition weights for a fixed GPU weight: every GPU rank
/// carries `gpu_weight`, every CPU core rank carries 1.
std::vector<double> rank_weights(const MachineSpec& m, const Mix& mix, double gpu_weight);

/// Integer per-rank element counts realising a continuous allocation:
/// class totals by largest remainder, then an even split inside each class.
std::vector<std::int64_t> rank_counts(const Allocation& a, const MachineSpec& m, const Mix& mix,
                                      std::int64_t elements);

}  // namespace msa
