#include "msaplan/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace msa {

void DeviceClass::validate() const {
  if (!(p_opt > 0.0) || !std::isfinite(p_opt)) {
    throw std::invalid_argument(fmt::format("device class '{}': p_opt must be positive", name));
  }
  if (!(c_max > 0.0)) {
    throw std::invalid_argument(fmt::format("device class '{}': c_max must be positive or unbounded", name));
  }
  if (count < 1) {
    throw std::invalid_argument(fmt::format("device class '{}': count must be at least 1", name));
  }
  if (mem_per_device < 0.0 || io_bw_per_device < 0.0) {
    throw std::invalid_argument(fmt::format("device class '{}': memory and bandwidth must be non-negative", name));
  }
}

double capacity_from_memory(double mem_gb, double mem_per_element) {
  if (!(mem_per_element > 0.0)) {
    throw std::invalid_argument("mem_per_element must be positive");
  }
  // 32 / 0.001 is 31999.999999999996 in binary floating point.
  return std::floor(mem_gb / mem_per_element * (1.0 + 1e-12));
}

Workload::Workload(std::int64_t elements, int poly_order, double mem_per_element,
                   double bytes_per_point_output)
    : elements_(elements),
      poly_order_(poly_order),
      mem_per_element_(mem_per_element),
      bytes_per_point_output_(bytes_per_point_output) {
  if (elements < 1) {
    throw std::invalid_argument("workload must have at least one element");
  }
  if (poly_order < 1) {
    throw std::invalid_argument("polynomial order must be at least 1");
  }
  if (mem_per_element < 0.0 || bytes_per_point_output < 0.0) {
    throw std::invalid_argument("workload memory and output sizes must be non-negative");
  }
}

double total_cost(const Workload& w) { return static_cast<double>(w.elements()); }

std::int64_t grid_points(const Workload& w) {
  const std::int64_t n = w.poly_order();
  return w.elements() * n * n * n;
}

std::vector<std::size_t> Allocation::saturated_classes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < saturated.size(); ++i) {
    if (saturated[i]) out.push_back(i);
  }
  return out;
}

namespace {

void check_classes(std::span<const DeviceClass> classes) {
  if (classes.empty()) {
    throw std::invalid_argument("at least one device class is required");
  }
  for (const auto& c : classes) c.validate();
}

double total_capacity(std::span<const DeviceClass> classes) {
  double cap = 0.0;
  for (const auto& c : classes) cap += c.aggregate_capacity();
  return cap;
}

Allocation empty_allocation(std::size_t n) {
  Allocation a;
  a.per_class_cost.assign(n, 0.0);
  a.per_device_cost.assign(n, 0.0);
  a.saturated.assign(n, false);
  return a;
}

Allocation infeasible_allocation() {
  Allocation a;
  a.feasible = false;
  a.t_min = kUnbounded;
  return a;
}

void finish(Allocation& a, std::span<const DeviceClass> classes) {
  a.t_min = allocation_time(a.per_class_cost, classes);
  for (std::size_t i = 0; i < classes.size(); ++i) {
    a.per_device_cost[i] = a.per_class_cost[i] / static_cast<double>(classes[i].count);
  }
}

}  // namespace

double allocation_time(std::span<const double> per_class_cost, std::span<const DeviceClass> classes) {
  double t = 0.0;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    t = std::max(t, per_class_cost[i] / classes[i].aggregate_performance());
  }
  return t;
}

double tmin_unconstrained(double cost, std::span<const DeviceClass> classes) {
  check_classes(classes);
  if (cost < 0.0) throw std::invalid_argument("cost must be non-negative");
  double perf = 0.0;
  for (const auto& c : classes) perf += c.aggregate_performance();
  return cost / perf;
}

Allocation solve_allocation(double cost, std::span<const DeviceClass> classes) {
  check_classes(classes);
  if (!(cost >= 0.0)) throw std::invalid_argument("cost must be non-negative");
  if (total_capacity(classes) < cost) return infeasible_allocation();

  const std::size_t n = classes.size();
  Allocation a = empty_allocation(n);
  if (cost == 0.0) return a;

  std::vector<std::size_t> active(n);
  for (std::size_t i = 0; i < n; ++i) active[i] = i;
  double remaining = cost;

  while (!active.empty()) {
    double perf = 0.0;
    for (auto i : active) perf += classes[i].aggregate_performance();
    const double level = std::max(remaining, 0.0) / perf;

    std::vector<std::size_t> still_active;
    bool pinned = false;
    for (auto i : active) {
      const double cap = classes[i].aggregate_capacity();
      if (level * classes[i].aggregate_performance() > cap) {
        a.per_class_cost[i] = cap;
        a.saturated[i] = true;
        remaining -= cap;
        pinned = true;
      } else {
        still_active.push_back(i);
      }
    }
    if (!pinned) {
      for (auto i : active) a.per_class_cost[i] = level * classes[i].aggregate_performance();
      break;
    }
    active = std::move(still_active);
  }

  finish(a, classes);
  return a;
}

namespace {

struct GridSearch {
  double cost;
  int steps;
  std::span<const DeviceClass> classes;
  std::vector<int> parts;
  std::vector<double> best;
  double best_time = kUnbounded;

  void visit(std::size_t index, int left) {
    if (index + 1 == classes.size()) {
      parts[index] = left;
      evaluate();
      return;
    }
    for (int k = 0; k <= left; ++k) {
      parts[index] = k;
      visit(index + 1, left - k);
    }
  }

  void evaluate() {
    double t = 0.0;
    for (std::size_t i = 0; i < classes.size(); ++i) {
      const double c = cost * parts[i] / steps;
      if (c > classes[i].aggregate_capacity() * (1.0 + 1e-12)) return;
      t = std::max(t, c / classes[i].aggregate_performance());
    }
    if (t < best_time) {
      best_time = t;
      for (std::size_t i = 0; i < classes.size(); ++i) best[i] = cost * parts[i] / steps;
    }
  }
};

}  // namespace

Allocation brute_force_allocation(double cost, std::span<const DeviceClass> classes, int grid_steps) {
  check_classes(classes);
  if (classes.size() > 4) {
    throw std::invalid_argument("brute-force allocation supports at most 4 device classes");
  }
  if (grid_steps < 10) throw std::invalid_argument("grid_steps must be at least 10");
  if (!(cost >= 0.0)) throw std::invalid_argument("cost must be non-negative");

  const std::size_t n = classes.size();
  Allocation a = empty_allocation(n);
  if (cost == 0.0) return a;

  GridSearch search{cost, grid_steps, classes, std::vector<int>(n, 0), std::vector<double>(n, 0.0)};
  search.visit(0, grid_steps);
  if (!std::isfinite(search.best_time)) return infeasible_allocation();

  a.per_class_cost = search.best;
  for (std::size_t i = 0; i < n; ++i) {
    a.saturated[i] = a.per_class_cost[i] >= classes[i].aggregate_capacity() * (1.0 - 1e-12);
  }
  finish(a, classes);
  return a;
}

Feasibility feasibility(const Workload& w, std::span<const DeviceClass> classes) {
  Feasibility f;
  f.required_gb = w.total_memory();
  for (const auto& c : classes) f.available_gb += static_cast<double>(c.count) * c.mem_per_device;
  f.feasible = f.required_gb <= f.available_gb;
  return f;
}

std::string_view to_string(OperationDomain d) {
  switch (d) {
    case OperationDomain::Communication: return "communication";
    case OperationDomain::Scaling: return "scaling";
    case OperationDomain::ExtremeScaling: return "extreme-scaling";
  }
  return "unknown";
}

OperationDomain classify_domain(double t_a, double t_c, double cost, double c_max_total,
                                double extreme_fill_ratio) {
  if (!(c_max_total > 0.0)) throw std::invalid_argument("c_max_total must be positive");
  if (t_a < 0.0 || t_c < 0.0) throw std::invalid_argument("times must be non-negative");
  if (t_a <= t_c) return OperationDomain::Communication;
  if (cost / c_max_total >= extreme_fill_ratio) return OperationDomain::ExtremeScaling;
  return OperationDomain::Scaling;
}

double calibrate_popt(std::span<const CalibrationRun> runs) {
  if (runs.empty()) throw std::invalid_argument("calibration needs at least one run");
  double best = 0.0;
  for (const auto& r : runs) {
    if (r.device_count < 1 || r.elements < 1 || !(r.seconds_per_timestep > 0.0)) {
      throw std::invalid_argument("calibration runs must have positive fields");
    }
    best = std::max(best, static_cast<double>(r.elements) /
                              (r.seconds_per_timestep * static_cast<double>(r.device_count)));
  }
  return best;
}

}  // namespace msa
