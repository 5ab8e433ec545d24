#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace msa {

// Cost is measured in element-timesteps; performance in element-timesteps/s.
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// A category of computing device (one V100, one CPU node, one GCD, ...).
struct DeviceClass {
  std::string name;
  double p_opt = 0.0;             // best element-timesteps/s of one device
  double c_max = kUnbounded;      // elements one device can hold
  double mem_per_device = 0.0;    // GB
  double io_bw_per_device = 0.0;  // GB/s, 0 when unknown
  std::int64_t count = 1;

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;

  double aggregate_performance() const { return static_cast<double>(count) * p_opt; }
  double aggregate_capacity() const { return static_cast<double>(count) * c_max; }

  bool operator==(const DeviceClass&) const = default;
};

/// Largest element count that fits in `mem_gb` at `mem_per_element` GB each.
double capacity_from_memory(double mem_gb, double mem_per_element);

/// One flow case: E elements at polynomial order N.
class Workload {
 public:
  Workload(std::int64_t elements, int poly_order, double mem_per_element = 0.001,
           double bytes_per_point_output = 32.0);

  std::int64_t elements() const { return elements_; }
  int poly_order() const { return poly_order_; }
  double mem_per_element() const { return mem_per_element_; }
  double bytes_per_point_output() const { return bytes_per_point_output_; }
  double total_memory() const { return static_cast<double>(elements_) * mem_per_element_; }

  bool operator==(const Workload&) const = default;

 private:
  std::int64_t elements_;
  int poly_order_;
  double mem_per_element_;
  double bytes_per_point_output_;
};

double total_cost(const Workload& w);
std::int64_t grid_points(const Workload& w);

struct Allocation {
  std::vector<double> per_class_cost;
  std::vector<double> per_device_cost;
  std::vector<bool> saturated;
  double t_min = 0.0;
  bool feasible = true;

  std::vector<std::size_t> saturated_classes() const;
};

/// C / sum(count * p_opt): the bound when every device can hold its share.
double tmin_unconstrained(double cost, std::span<const DeviceClass> classes);

/// Exact continuous min-max allocation under per-device capacity.
///
/// Water-filling: split the remaining cost proportionally to aggregate
/// performance over the unpinned classes, pin every class whose share
/// exceeds its capacity, and repeat over the remainder. Terminates in at
/// most classes.size() rounds. An instance whose total capacity is below
/// `cost` comes back with feasible == false and an empty assignment.
Allocation solve_allocation(double cost, std::span<const DeviceClass> classes);

/// Exhaustive grid search over the split simplex. Test oracle only.
Allocation brute_force_allocation(double cost, std::span<const DeviceClass> classes, int grid_steps);

/// Max-over-classes time of an arbitrary assignment, ignoring capacity.
double allocation_time(std::span<const double> per_class_cost, std::span<const DeviceClass> classes);

struct Feasibility {
  bool feasible = false;
  double required_gb = 0.0;
  double available_gb = 0.0;
};

Feasibility feasibility(const Workload& w, std::span<const DeviceClass> classes);

enum class OperationDomain { Communication, Scaling, ExtremeScaling };

std::string_view to_string(OperationDomain d);

inline constexpr double kDefaultExtremeFillRatio = 0.5;

OperationDomain classify_domain(double t_a, double t_c, double cost, double c_max_total,
                                double extreme_fill_ratio = kDefaultExtremeFillRatio);

struct CalibrationRun {
  std::int64_t device_count = 0;
  std::int64_t elements = 0;
  double seconds_per_timestep = 0.0;
};

/// Best measured per-device throughput over a set of runs.
double calibrate_popt(std::span<const CalibrationRun> runs);

}  // namespace msa
