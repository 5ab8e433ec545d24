#include "msaplan/machine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace msa {

std::string_view to_string(ModuleKind k) { return k == ModuleKind::Gpu ? "gpu" : "cpu"; }

std::optional<ModuleKind> parse_module_kind(std::string_view s) {
  if (s == "gpu") return ModuleKind::Gpu;
  if (s == "cpu") return ModuleKind::Cpu;
  return std::nullopt;
}

std::int64_t ModuleSpec::ranks_per_device() const {
  if (kind == ModuleKind::Gpu) return 1;
  return std::max<std::int64_t>(1, cores_per_node / std::max<std::int64_t>(1, devices_per_node));
}

double ModuleSpec::c_max(double mem_per_element) const {
  return capacity_from_memory(mem_per_device_gb, mem_per_element);
}

double ModuleSpec::usable_c_max(double mem_per_element) const {
  return usable_mem_gb ? capacity_from_memory(*usable_mem_gb, mem_per_element) : c_max(mem_per_element);
}

DeviceClass ModuleSpec::device_class(std::int64_t devices, double mem_per_element, bool usable) const {
  DeviceClass c;
  c.name = name;
  c.p_opt = p_opt;
  c.c_max = usable ? usable_c_max(mem_per_element) : c_max(mem_per_element);
  c.mem_per_device = mem_per_device_gb;
  c.io_bw_per_device = io_bw_gbs;
  c.count = devices;
  return c;
}

std::optional<std::size_t> MachineSpec::find(std::string_view module) const {
  for (std::size_t i = 0; i < modules.size(); ++i) {
    if (modules[i].name == module) return i;
  }
  return std::nullopt;
}

// Absolute throughputs are not published; the values below are calibrated
// so that GPU strong scaling falls from ~80% to 50-60% efficiency around
// 4000 elements per GPU, CPU scaling stays near-linear, and one GPU does
// the work of roughly 100 CPU cores. gs_rounds_per_step assumes ~150
// gather-scatter calls per step across the pressure and velocity solves.
std::vector<MachineSpec> builtin_machines() {
  std::vector<MachineSpec> out;

  {
    MachineSpec deep;
    deep.name = "deep";
    ModuleSpec cluster{.name = "cluster",
                       .kind = ModuleKind::Cpu,
                       .device = "1 node, 2x12 core Intel Xeon 6146, 192 GB DDR4",
                       .nodes = 50,
                       .devices_per_node = 1,
                       .cores_per_node = 24,
                       .count = 50,
                       .p_opt = 24 * 2.0e3,
                       .eff_half_load = 0.0,
                       .mem_per_device_gb = 192.0};
    ModuleSpec booster{.name = "booster",
                       .kind = ModuleKind::Gpu,
                       .device = "Nvidia V100, 32 GB HBM",
                       .nodes = 75,
                       .devices_per_node = 1,
                       .cores_per_node = 16,
                       .count = 75,
                       .p_opt = 2.0e5,
                       .eff_half_load = 3000.0,
                       .mem_per_device_gb = 32.0,
                       .usable_mem_gb = 30.0};
    deep.modules = {cluster, booster};
    deep.host_network = {.alpha = 1.5e-6, .beta = 5e-10, .gs_rounds_per_step = 150};
    deep.device_network = deep.host_network;
    deep.io = {.enabled = false, .bytes_per_point = 32.0, .node_io_bw = 1.0, .output_every = 1};
    out.push_back(std::move(deep));
  }
  {
    MachineSpec juwels;
    juwels.name = "juwels";
    ModuleSpec cluster{.name = "cluster",
                       .kind = ModuleKind::Cpu,
                       .device = "1 node, 2x24 core Intel Xeon 8168, 96 GB DDR4",
                       .nodes = 2271,
                       .devices_per_node = 1,
                       .cores_per_node = 48,
                       .count = 2271,
                       .p_opt = 48 * 2.2e3,
                       .eff_half_load = 0.0,
                       .mem_per_device_gb = 96.0};
    ModuleSpec booster{.name = "booster",
                       .kind = ModuleKind::Gpu,
                       .device = "Nvidia A100, 40 GB HBM",
                       .nodes = 936,
                       .devices_per_node = 4,
                       .cores_per_node = 48,
                       .count = 3744,
                       .p_opt = 3.5e5,
                       .eff_half_load = 3000.0,
                       .mem_per_device_gb = 40.0};
    juwels.modules = {cluster, booster};
    juwels.host_network = {.alpha = 0.6e-6, .beta = 1.5e-10, .gs_rounds_per_step = 150};
    juwels.device_network = {.alpha = 0.58e-6, .beta = 1.45e-10, .gs_rounds_per_step = 150};
    juwels.io = {.enabled = false, .bytes_per_point = 32.0, .node_io_bw = 2.0, .output_every = 1};
    out.push_back(std::move(juwels));
  }
  {
    MachineSpec lumi;
    lumi.name = "lumi-g";
    ModuleSpec gpu{.name = "lumi-g",
                   .kind = ModuleKind::Gpu,
                   .device = "AMD MI250X GCD, 64 GB HBM2e (128 GB per MI250X)",
                   .nodes = 2560,
                   .devices_per_node = 8,
                   .cores_per_node = 64,
                   .count = 20480,
                   .p_opt = 2.8e5,
                   .eff_half_load = 2500.0,
                   .mem_per_device_gb = 64.0};
    lumi.modules = {gpu};
    lumi.host_network = {.alpha = 1.5e-6, .beta = 3.5e-10, .gs_rounds_per_step = 150};
    lumi.device_network = {.alpha = 0.8e-6, .beta = 2e-10, .gs_rounds_per_step = 150};
    lumi.io = {.enabled = false, .bytes_per_point = 32.0, .node_io_bw = 2.0, .output_every = 1};
    out.push_back(std::move(lumi));
  }
  return out;
}

std::vector<CaseSpec> builtin_cases() {
  return {
      CaseSpec{"pipe", Workload(36480, kDefaultPolyOrder, kDefaultMemPerElement), std::nullopt, false},
      CaseSpec{"tgv", Workload(262144, kDefaultPolyOrder, kDefaultMemPerElement), std::array{64, 64, 64}, true},
      CaseSpec{"rbc", Workload(2097152, kDefaultPolyOrder, kDefaultMemPerElement), std::array{128, 128, 128},
               true},
  };
}

std::optional<MachineSpec> find_machine_preset(std::string_view name) {
  for (auto& m : builtin_machines()) {
    if (m.name == name) return m;
  }
  return std::nullopt;
}

std::optional<CaseSpec> find_case_preset(std::string_view name) {
  for (auto& c : builtin_cases()) {
    if (c.name == name) return c;
  }
  return std::nullopt;
}

namespace {

void check_network(std::vector<Violation>& out, const std::string& prefix, const NetworkParams& n) {
  if (!(n.alpha >= 0.0)) out.push_back({prefix + ".alpha", prefix + ".alpha ≥ 0"});
  if (!(n.beta >= 0.0)) out.push_back({prefix + ".beta", prefix + ".beta ≥ 0"});
  if (!(n.gs_rounds_per_step >= 0.0)) {
    out.push_back({prefix + ".gs_rounds_per_step", prefix + ".gs_rounds_per_step ≥ 0"});
  }
}

void check_io(std::vector<Violation>& out, const std::string& prefix, const IoParams& io) {
  if (!(io.bytes_per_point >= 0.0)) out.push_back({prefix + ".bytes_per_point", prefix + ".bytes_per_point ≥ 0"});
  if (!(io.node_io_bw > 0.0)) out.push_back({prefix + ".node_io_bw_gbs", prefix + ".node_io_bw_gbs > 0"});
  if (io.output_every < 1) out.push_back({prefix + ".output_every", prefix + ".output_every ≥ 1"});
}

}  // namespace

std::vector<Violation> validate(const MachineSpec& m) {
  std::vector<Violation> out;
  if (m.name.empty()) out.push_back({"machine.name", "machine.name must not be empty"});
  if (m.modules.empty()) out.push_back({"machine.module", "machine needs at least one module"});
  for (std::size_t i = 0; i < m.modules.size(); ++i) {
    const auto& mod = m.modules[i];
    const std::string f = "machine.module." + mod.name;
    if (mod.name.empty()) out.push_back({f, "module name must not be empty"});
    for (std::size_t j = 0; j < i; ++j) {
      if (m.modules[j].name == mod.name) out.push_back({f, fmt::format("module name '{}' is not unique", mod.name)});
    }
    if (mod.nodes < 1) out.push_back({f + ".nodes", f + ".nodes ≥ 1"});
    if (mod.devices_per_node < 1) out.push_back({f + ".devices_per_node", f + ".devices_per_node ≥ 1"});
    if (mod.cores_per_node < 1) out.push_back({f + ".cores_per_node", f + ".cores_per_node ≥ 1"});
    if (mod.count != mod.nodes * mod.devices_per_node) {
      out.push_back({f + ".count", fmt::format("{}.count = nodes · devices_per_node ({} ≠ {} · {})", f, mod.count,
                                               mod.nodes, mod.devices_per_node)});
    }
    if (!(mod.p_opt > 0.0) || !std::isfinite(mod.p_opt)) out.push_back({f + ".p_opt", f + ".p_opt > 0"});
    if (!(mod.eff_half_load >= 0.0)) out.push_back({f + ".eff_half_load", f + ".eff_half_load ≥ 0"});
    if (!(mod.mem_per_device_gb > 0.0)) out.push_back({f + ".mem_per_device_gb", f + ".mem_per_device_gb > 0"});
    if (mod.usable_mem_gb && !(*mod.usable_mem_gb > 0.0 && *mod.usable_mem_gb <= mod.mem_per_device_gb)) {
      out.push_back({f + ".usable_mem_gb", f + ".usable_mem_gb in (0, mem_per_device_gb]"});
    }
    if (!(mod.io_bw_gbs >= 0.0)) out.push_back({f + ".io_bw_gbs", f + ".io_bw_gbs ≥ 0"});
  }
  check_network(out, "machine.network.host", m.host_network);
  check_network(out, "machine.network.device", m.device_network);
  check_io(out, "machine.io", m.io);
  return out;
}

std::vector<Violation> validate(const CaseSpec& c) {
  std::vector<Violation> out;
  if (c.name.empty()) out.push_back({"case.name", "case.name must not be empty"});
  if (c.mesh_dims) {
    const auto& d = *c.mesh_dims;
    if (d[0] < 1 || d[1] < 1 || d[2] < 1) {
      out.push_back({"case.mesh_dims", "case.mesh_dims entries ≥ 1"});
    } else if (static_cast<std::int64_t>(d[0]) * d[1] * d[2] != c.workload.elements()) {
      out.push_back({"case.mesh_dims", "case.mesh_dims product = case.elements"});
    }
  }
  return out;
}

std::vector<DeviceClass> device_classes(const MachineSpec& m, const Mix& mix, double mem_per_element,
                                        CapacityMode capacity) {
  std::vector<DeviceClass> out;
  for (const auto& e : mix) {
    const auto& mod = m.modules.at(e.module);
    out.push_back(mod.device_class(e.devices, mem_per_element, capacity == CapacityMode::Usable));
  }
  return out;
}

RankLayout rank_layout(const MachineSpec& m, const Mix& mix, double mem_per_element, CapacityMode capacity) {
  RankLayout layout;
  for (std::size_t c = 0; c < mix.size(); ++c) {
    const auto& e = mix[c];
    const auto& mod = m.modules.at(e.module);
    if (e.devices < 1) throw std::invalid_argument(fmt::format("module '{}' needs at least one device", mod.name));
    if (e.devices > mod.count) {
      throw std::invalid_argument(
          fmt::format("module '{}' has {} devices, {} requested", mod.name, mod.count, e.devices));
    }
    const auto rpd = mod.ranks_per_device();
    const double per_device_cap =
        capacity == CapacityMode::Usable ? mod.usable_c_max(mem_per_element) : mod.c_max(mem_per_element);
    layout.classes.push_back(RankClass{
        mod.name,
        PerfCurve{mod.p_opt / static_cast<double>(rpd), mod.eff_half_load / static_cast<double>(rpd)},
        per_device_cap / static_cast<double>(rpd)});

    const std::size_t first_node = layout.node_io_bw.size();
    const auto nodes = (e.devices + mod.devices_per_node - 1) / mod.devices_per_node;
    for (std::int64_t n = 0; n < nodes; ++n) {
      const auto on_node = std::min(mod.devices_per_node, e.devices - n * mod.devices_per_node);
      layout.node_io_bw.push_back(mod.io_bw_gbs * static_cast<double>(on_node));
    }
    for (std::int64_t d = 0; d < e.devices; ++d) {
      for (std::int64_t k = 0; k < rpd; ++k) {
        layout.rank_class.push_back(c);
        layout.rank_node.push_back(first_node + static_cast<std::size_t>(d / mod.devices_per_node));
      }
    }
  }
  return layout;
}

std::vector<double> rank_weights(const MachineSpec& m, const Mix& mix, double gpu_weight) {
  std::vector<double> out;
  for (const auto& e : mix) {
    const auto& mod = m.modules.at(e.module);
    const double w = mod.kind == ModuleKind::Gpu ? gpu_weight : 1.0;
    out.insert(out.end(), static_cast<std::size_t>(e.devices * mod.ranks_per_device()), w);
  }
  return out;
}

std::vector<std::int64_t> rank_counts(const Allocation& a, const MachineSpec& m, const Mix& mix,
                                      std::int64_t elements) {
  if (!a.feasible) throw std::invalid_argument("cannot realise an infeasible allocation");
  if (a.per_class_cost.size() != mix.size()) throw std::invalid_argument("allocation does not match the mix");
  const auto class_totals = target_counts(elements, a.per_class_cost);
  std::vector<std::int64_t> out;
  for (std::size_t c = 0; c < mix.size(); ++c) {
    const auto& mod = m.modules.at(mix[c].module);
    const std::vector<double> even(static_cast<std::size_t>(mix[c].devices * mod.ranks_per_device()), 1.0);
    const auto counts = target_counts(class_totals[c], even);
    out.insert(out.end(), counts.begin(), counts.end());
  }
  return out;
}

}  // namespace msa
