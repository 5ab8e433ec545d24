#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "msaplan/mesh.hpp"
#include "msaplan/model.hpp"

namespace msa {

/// Load-dependent throughput P(c) = p_opt * c / (c + eff_half_load).
/// eff_half_load == 0 is the flat curve P == p_opt.
struct PerfCurve {
  double p_opt = 1.0;
  double eff_half_load = 0.0;

  double rate(double count) const;
  bool operator==(const PerfCurve&) const = default;
};

/// Latency-bandwidth cost of the gather-scatter exchange.
struct NetworkParams {
  double alpha = 0.0;               // s per message
  double beta = 0.0;                // s per point
  double gs_rounds_per_step = 1.0;  // gather-scatter calls per timestep

  bool operator==(const NetworkParams&) const = default;
};

struct IoParams {
  bool enabled = false;
  double bytes_per_point = 32.0;
  double node_io_bw = 1.0;  // GB/s per node
  std::int64_t output_every = 1;

  bool operator==(const IoParams&) const = default;
};

/// Rank-level view of a device mix: which curve each rank runs and which
/// node it sits on.
struct RankClass {
  std::string name;
  PerfCurve curve;
  double capacity = kUnbounded;  // elements per rank
};

struct RankLayout {
  std::vector<RankClass> classes;
  std::vector<std::size_t> rank_class;  // rank -> classes index
  std::vector<std::size_t> rank_node;   // rank -> node index
  std::vector<double> node_io_bw;       // node -> GB/s, 0 uses IoParams::node_io_bw

  std::size_t num_ranks() const { return rank_class.size(); }
  std::size_t num_nodes() const { return node_io_bw.size(); }
  /// Throws std::invalid_argument when maps are inconsistent.
  void validate() const;
};

struct TimestepEstimate {
  std::vector<double> t_a;
  std::vector<double> t_c;
  std::vector<double> t_io;
  double total = 0.0;
  std::size_t dominant_rank = 0;
  OperationDomain domain = OperationDomain::Scaling;

  double max_t_a() const;
  double max_t_c() const;
  double max_t_io() const;
};

double estimate_ta(std::int64_t count, const PerfCurve& curve);
double estimate_tc(const CommPlan& plan, std::size_t rank, const NetworkParams& net);

struct IoReport {
  std::vector<double> node_seconds;
  std::vector<std::int64_t> node_elements;
  double imbalance = 1.0;  // max / min over nodes
};

/// Write time per node for one output step. Nodes without elements are
/// ignored when forming the imbalance ratio.
IoReport io_phase(const Partition& partition, std::span<const std::size_t> rank_node,
                  const IoParams& io, int poly_order, std::span<const double> node_io_bw = {});

TimestepEstimate estimate_timestep(const Partition& partition, const CommPlan& plan, const RankLayout& layout,
                                   const NetworkParams& net, const IoParams& io, int poly_order,
                                   double extreme_fill_ratio = kDefaultExtremeFillRatio);

struct Interval {
  double mean = 0.0;
  double stddev = 0.0;
  double half_width = 0.0;
};

/// Band holding 95% of individual samples under a normal model:
/// mean +- 1.96 * population standard deviation.
Interval ci95(std::span<const double> samples);

std::vector<double> jittered_samples(const TimestepEstimate& estimate, std::size_t n, double rel_sigma,
                                     std::uint64_t seed);

}  // namespace msa
