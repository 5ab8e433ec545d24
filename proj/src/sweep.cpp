#include "msaplan/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

namespace msa {

namespace {

template <class F>
auto parallel_map(std::size_t n, F&& f) -> std::vector<decltype(f(std::size_t{0}))> {
  using R = decltype(f(std::size_t{0}));
  std::vector<R> out;
  out.reserve(n);
  const std::size_t width = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t start = 0; start < n; start += width) {
    std::vector<std::future<R>> batch;
    for (std::size_t i = start; i < std::min(n, start + width); ++i) {
      batch.push_back(std::async(std::launch::async, f, i));
    }
    for (auto& fut : batch) out.push_back(fut.get());
  }
  return out;
}

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

}  // namespace

Mix even_mix(const MachineSpec& m, std::span<const std::size_t> modules, std::int64_t devices) {
  if (modules.empty()) throw std::invalid_argument("at least one module is required");
  const auto k = static_cast<std::int64_t>(modules.size());
  if (devices < k || devices % k != 0) {
    throw std::invalid_argument(fmt::format("{} devices cannot be split evenly over {} modules", devices, k));
  }
  Mix mix;
  for (auto idx : modules) {
    if (idx >= m.modules.size()) throw std::invalid_argument("unknown module index");
    mix.push_back({idx, devices / k});
  }
  return mix;
}

MixEvaluation evaluate_mix(const BoxMesh& mesh, const Workload& w, const MachineSpec& m, const Mix& mix,
                           std::optional<double> gpu_weight, const SimOptions& opts) {
  if (mesh.element_count() != w.elements()) {
    throw std::invalid_argument(
        fmt::format("mesh has {} elements but the workload has {}", mesh.element_count(), w.elements()));
  }
  MixEvaluation ev;
  ev.mix = mix;
  ev.classes = device_classes(m, mix, w.mem_per_element(), opts.capacity);
  ev.layout = rank_layout(m, mix, w.mem_per_element(), opts.capacity);
  ev.model = solve_allocation(total_cost(w), ev.classes);

  std::vector<std::int64_t> counts;
  if (gpu_weight) {
    counts = target_counts(w.elements(), rank_weights(m, mix, *gpu_weight));
    for (std::size_t r = 0; r < counts.size(); ++r) {
      const auto& cls = ev.layout.classes[ev.layout.rank_class[r]];
      if (static_cast<double>(counts[r]) > cls.capacity) {
        ev.infeasible_reason = fmt::format("weight {} puts {} elements on a {} rank with capacity {}", *gpu_weight,
                                           counts[r], cls.name, cls.capacity);
        return ev;
      }
    }
  } else {
    if (!ev.model.feasible) {
      double capacity = 0.0;
      for (const auto& c : ev.classes) capacity += c.aggregate_capacity();
      ev.infeasible_reason = fmt::format("{} elements exceed the mix capacity of {}", w.elements(), capacity);
      return ev;
    }
    counts = rank_counts(ev.model, m, mix, w.elements());
  }

  ev.feasible = true;
  ev.partition = partition_rcb(mesh, counts);
  ev.plan = comm_plan(mesh, ev.partition, w.poly_order());
  ev.estimate = estimate_timestep(ev.partition, ev.plan, ev.layout, opts.network, opts.io, w.poly_order(),
                                  opts.extreme_fill_ratio);
  return ev;
}

namespace {

ScalingRow make_row(const MixEvaluation& ev, const MachineSpec& m) {
  ScalingRow row;
  double gpu_elements = 0.0;
  double cpu_elements = 0.0;
  for (std::size_t c = 0; c < ev.mix.size(); ++c) {
    const auto& mod = m.modules[ev.mix[c].module];
    row.devices += ev.mix[c].devices;
    if (mod.kind == ModuleKind::Gpu) {
      row.gpu_devices += ev.mix[c].devices;
    } else {
      row.cpu_cores += ev.mix[c].devices * mod.ranks_per_device();
    }
  }
  row.model_tmin = ev.model.t_min;
  row.feasible = ev.feasible;
  if (!ev.feasible) {
    row.elements_per_gpu = row.elements_per_core = kNan;
    row.t_a_max = row.t_c_max = row.t_io_max = row.t_total = kNan;
    row.domain = "infeasible";
    return row;
  }
  for (std::size_t r = 0; r < ev.partition.num_ranks(); ++r) {
    const auto& mod = m.modules[ev.mix[ev.layout.rank_class[r]].module];
    (mod.kind == ModuleKind::Gpu ? gpu_elements : cpu_elements) += static_cast<double>(ev.partition.counts[r]);
  }
  row.elements_per_gpu = row.gpu_devices > 0 ? gpu_elements / static_cast<double>(row.gpu_devices) : 0.0;
  row.elements_per_core = row.cpu_cores > 0 ? cpu_elements / static_cast<double>(row.cpu_cores) : 0.0;
  row.t_a_max = ev.estimate.max_t_a();
  row.t_c_max = ev.estimate.max_t_c();
  row.t_io_max = ev.estimate.max_t_io();
  row.t_total = ev.estimate.total;
  row.domain = std::string(to_string(ev.estimate.domain));
  return row;
}

std::string num(double v, const char* spec) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format(fmt::runtime(spec), v);
}

}  // namespace

void write_scaling_csv(std::ostream& out, const ScalingTable& table, bool linear_ref) {
  out << kScalingCsvHeader << (linear_ref ? ",linear_ref" : "") << '\n';
  for (const auto& r : table.rows) {
    out << r.devices << ',' << r.gpu_devices << ',' << r.cpu_cores << ',' << num(r.elements_per_gpu, "{:.1f}") << ','
        << num(r.elements_per_core, "{:.1f}") << ',' << num(r.t_a_max, "{:.6e}") << ',' << num(r.t_c_max, "{:.6e}")
        << ',' << num(r.t_io_max, "{:.6e}") << ',' << num(r.t_total, "{:.6e}") << ',' << num(r.speedup, "{:.4f}")
        << ',' << num(r.parallel_efficiency, "{:.4f}") << ',' << num(r.model_tmin, "{:.6e}") << ',' << r.domain;
    if (linear_ref) out << ',' << num(r.linear_ref, "{:.6e}");
    out << '\n';
  }
}

ScalingTable sweep_strong_scaling(const BoxMesh& mesh, const Workload& w, const MachineSpec& m,
                                  std::span<const std::size_t> modules, std::span<const std::int64_t> device_counts,
                                  std::optional<double> gpu_weight, const SimOptions& opts) {
  if (device_counts.empty()) throw std::invalid_argument("at least one device count is required");
  if (!std::is_sorted(device_counts.begin(), device_counts.end()) ||
      std::adjacent_find(device_counts.begin(), device_counts.end()) != device_counts.end()) {
    throw std::invalid_argument("device counts must be strictly ascending");
  }
  std::vector<Mix> mixes;
  for (auto n : device_counts) mixes.push_back(even_mix(m, modules, n));

  ScalingTable table;
  table.rows = parallel_map(mixes.size(), [&](std::size_t i) {
    return make_row(evaluate_mix(mesh, w, m, mixes[i], gpu_weight, opts), m);
  });

  const ScalingRow* base = nullptr;
  for (auto& r : table.rows) {
    if (!r.feasible) {
      r.speedup = r.parallel_efficiency = r.linear_ref = kNan;
      continue;
    }
    if (base == nullptr) base = &r;
    r.speedup = base->t_total / r.t_total;
    const double multiple = static_cast<double>(r.devices) / static_cast<double>(base->devices);
    r.parallel_efficiency = r.speedup / multiple;
    r.linear_ref = base->t_total / multiple;
  }
  return table;
}

WeightSearch search_weight(const BoxMesh& mesh, const Workload& w, const MachineSpec& m, const Mix& mix,
                           std::span<const double> weight_grid, const SimOptions& opts) {
  if (weight_grid.empty()) throw std::invalid_argument("the weight grid must not be empty");
  WeightSearch out;
  out.table = parallel_map(weight_grid.size(), [&](std::size_t i) {
    const auto ev = evaluate_mix(mesh, w, m, mix, weight_grid[i], opts);
    WeightRow row;
    row.weight = weight_grid[i];
    row.feasible = ev.feasible;
    row.total = ev.feasible ? ev.estimate.total : kNan;
    row.elements_per_gpu = ev.feasible ? make_row(ev, m).elements_per_gpu : kNan;
    return row;
  });
  for (const auto& row : out.table) {
    if (!row.feasible) continue;
    if (!out.found || row.total < out.best_time || (row.total == out.best_time && row.weight < out.best_weight)) {
      out.found = true;
      out.best_weight = row.weight;
      out.best_time = row.total;
    }
  }
  return out;
}

}  // namespace msa
