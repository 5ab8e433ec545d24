#include "msaplan/perfsim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace msa {

double PerfCurve::rate(double count) const {
  if (eff_half_load <= 0.0) return p_opt;
  return p_opt * count / (count + eff_half_load);
}

void RankLayout::validate() const {
  if (rank_node.size() != rank_class.size()) {
    throw std::invalid_argument("rank->class and rank->node maps differ in length");
  }
  for (auto c : rank_class) {
    if (c >= classes.size()) throw std::invalid_argument(fmt::format("rank maps to unknown class {}", c));
  }
  for (auto n : rank_node) {
    if (n >= node_io_bw.size()) throw std::invalid_argument(fmt::format("rank maps to unknown node {}", n));
  }
  for (const auto& c : classes) {
    if (!(c.curve.p_opt > 0.0) || c.curve.eff_half_load < 0.0) {
      throw std::invalid_argument(fmt::format("rank class '{}' has an invalid performance curve", c.name));
    }
  }
}

double TimestepEstimate::max_t_a() const { return t_a.empty() ? 0.0 : *std::max_element(t_a.begin(), t_a.end()); }
double TimestepEstimate::max_t_c() const { return t_c.empty() ? 0.0 : *std::max_element(t_c.begin(), t_c.end()); }
double TimestepEstimate::max_t_io() const {
  return t_io.empty() ? 0.0 : *std::max_element(t_io.begin(), t_io.end());
}

double estimate_ta(std::int64_t count, const PerfCurve& curve) {
  if (count < 0) throw std::invalid_argument("element count must be non-negative");
  if (count == 0) return 0.0;
  // count / P(count) without forming the ratio.
  return (static_cast<double>(count) + std::max(curve.eff_half_load, 0.0)) / curve.p_opt;
}

double estimate_tc(const CommPlan& plan, std::size_t rank, const NetworkParams& net) {
  if (rank >= plan.num_ranks()) throw std::out_of_range(fmt::format("rank {} is not in the plan", rank));
  double t = 0.0;
  for (const auto& m : plan.messages[rank]) t += net.alpha + net.beta * static_cast<double>(m.points);
  return net.gs_rounds_per_step * t;
}

IoReport io_phase(const Partition& partition, std::span<const std::size_t> rank_node, const IoParams& io,
                  int poly_order, std::span<const double> node_io_bw) {
  if (!io.enabled) throw std::invalid_argument("I/O phase requested with I/O disabled");
  if (rank_node.size() != partition.num_ranks()) throw std::invalid_argument("one node per rank is required");
  std::size_t nodes = 0;
  for (auto n : rank_node) nodes = std::max(nodes, n + 1);
  if (!node_io_bw.empty() && node_io_bw.size() < nodes) throw std::invalid_argument("missing node bandwidths");

  IoReport report;
  report.node_elements.assign(nodes, 0);
  for (std::size_t r = 0; r < rank_node.size(); ++r) report.node_elements[rank_node[r]] += partition.counts[r];

  const double points_per_element = std::pow(static_cast<double>(poly_order), 3);
  report.node_seconds.assign(nodes, 0.0);
  double hi = 0.0;
  double lo = kUnbounded;
  for (std::size_t n = 0; n < nodes; ++n) {
    const double bw = !node_io_bw.empty() && node_io_bw[n] > 0.0 ? node_io_bw[n] : io.node_io_bw;
    if (!(bw > 0.0)) throw std::invalid_argument("node I/O bandwidth must be positive");
    const double bytes = static_cast<double>(report.node_elements[n]) * points_per_element * io.bytes_per_point;
    report.node_seconds[n] = bytes / (bw * 1e9);
    if (report.node_elements[n] > 0) {
      hi = std::max(hi, report.node_seconds[n]);
      lo = std::min(lo, report.node_seconds[n]);
    }
  }
  report.imbalance = lo > 0.0 && std::isfinite(lo) ? hi / lo : 1.0;
  return report;
}

TimestepEstimate estimate_timestep(const Partition& partition, const CommPlan& plan, const RankLayout& layout,
                                   const NetworkParams& net, const IoParams& io, int poly_order,
                                   double extreme_fill_ratio) {
  layout.validate();
  const std::size_t ranks = partition.num_ranks();
  if (layout.num_ranks() != ranks || plan.num_ranks() != ranks) {
    throw std::invalid_argument(fmt::format("rank maps disagree: partition {} ranks, layout {}, comm plan {}",
                                            ranks, layout.num_ranks(), plan.num_ranks()));
  }

  TimestepEstimate est;
  est.t_a.resize(ranks);
  est.t_c.resize(ranks);
  est.t_io.assign(ranks, 0.0);

  std::vector<double> node_seconds;
  if (io.enabled) {
    node_seconds = io_phase(partition, layout.rank_node, io, poly_order, layout.node_io_bw).node_seconds;
  }

  for (std::size_t r = 0; r < ranks; ++r) {
    est.t_a[r] = estimate_ta(partition.counts[r], layout.classes[layout.rank_class[r]].curve);
    est.t_c[r] = estimate_tc(plan, r, net);
    if (io.enabled) est.t_io[r] = node_seconds[layout.rank_node[r]] / static_cast<double>(io.output_every);
    const double sum = est.t_a[r] + est.t_c[r] + est.t_io[r];
    if (r == 0 || sum > est.total) {
      est.total = sum;
      est.dominant_rank = r;
    }
  }

  // Fill is taken from the most loaded capacity-limited class.
  std::vector<double> class_elements(layout.classes.size(), 0.0);
  std::vector<double> class_ranks(layout.classes.size(), 0.0);
  for (std::size_t r = 0; r < ranks; ++r) {
    class_elements[layout.rank_class[r]] += static_cast<double>(partition.counts[r]);
    class_ranks[layout.rank_class[r]] += 1.0;
  }
  double fill_cost = 0.0;
  double fill_capacity = kUnbounded;
  for (std::size_t c = 0; c < layout.classes.size(); ++c) {
    const double capacity = class_ranks[c] * layout.classes[c].capacity;
    if (class_ranks[c] == 0.0 || !std::isfinite(capacity)) continue;
    if (!std::isfinite(fill_capacity) || class_elements[c] / capacity > fill_cost / fill_capacity) {
      fill_cost = class_elements[c];
      fill_capacity = capacity;
    }
  }
  const auto d = est.dominant_rank;
  est.domain = classify_domain(est.t_a[d], est.t_c[d], fill_cost, fill_capacity, extreme_fill_ratio);
  return est;
}

Interval ci95(std::span<const double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("ci95 needs at least two samples");
  const double n = static_cast<double>(samples.size());
  // Shifted by the first sample so constant input gives exactly zero spread.
  const double shift = samples.front();
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double s : samples) {
    sum += s - shift;
    sum_sq += (s - shift) * (s - shift);
  }
  const double d = sum / n;
  Interval out;
  out.mean = shift + d;
  out.stddev = std::sqrt(std::max(0.0, sum_sq / n - d * d));
  out.half_width = 1.96 * out.stddev;
  return out;
}

std::vector<double> jittered_samples(const TimestepEstimate& estimate, std::size_t n, double rel_sigma,
                                     std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("at least one sample is required");
  if (!(rel_sigma >= 0.0)) throw std::invalid_argument("rel_sigma must be non-negative");
  std::vector<double> out(n, estimate.total);
  if (rel_sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, rel_sigma);
  for (auto& s : out) s = estimate.total * (1.0 + noise(rng));
  return out;
}

}  // namespace msa
