#include "msaplan/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace msa {

BoxMesh::BoxMesh(int nx, int ny, int nz) : dims_{nx, ny, nz} {
  if (nx < 1 || ny < 1 || nz < 1) {
    throw std::invalid_argument(fmt::format("box mesh dimensions must be positive, got {}x{}x{}", nx, ny, nz));
  }
}

std::int64_t BoxMesh::element_count() const {
  return static_cast<std::int64_t>(dims_[0]) * dims_[1] * dims_[2];
}

std::array<int, 3> BoxMesh::coords(std::int64_t e) const {
  const std::int64_t nx = dims_[0];
  const std::int64_t ny = dims_[1];
  return {static_cast<int>(e % nx), static_cast<int>((e / nx) % ny), static_cast<int>(e / (nx * ny))};
}

std::vector<std::int64_t> BoxMesh::neighbors(std::int64_t e) const {
  const auto c = coords(e);
  std::vector<std::int64_t> out;
  out.reserve(6);
  for (int axis = 0; axis < 3; ++axis) {
    for (int step : {-1, 1}) {
      auto n = c;
      n[axis] += step;
      if (n[axis] >= 0 && n[axis] < dims_[axis]) out.push_back(id(n[0], n[1], n[2]));
    }
  }
  return out;
}

std::int64_t BoxMesh::face_count() const {
  const std::int64_t nx = dims_[0], ny = dims_[1], nz = dims_[2];
  return (nx - 1) * ny * nz + nx * (ny - 1) * nz + nx * ny * (nz - 1);
}

BoxMesh build_box_mesh(int nx, int ny, int nz) { return BoxMesh(nx, ny, nz); }

std::optional<std::array<int, 3>> auto_box_dims(std::int64_t elements, double max_aspect) {
  if (elements < 1) return std::nullopt;
  std::optional<std::array<int, 3>> best;
  std::int64_t best_surface = 0;
  for (std::int64_t a = 1; a * a * a <= elements; ++a) {
    if (elements % a != 0) continue;
    const std::int64_t rest = elements / a;
    for (std::int64_t b = a; b * b <= rest; ++b) {
      if (rest % b != 0) continue;
      const std::int64_t c = rest / b;
      if (static_cast<double>(c) > max_aspect * static_cast<double>(a)) continue;
      const std::int64_t surface = a * b + b * c + a * c;
      if (!best || surface < best_surface) {
        best = std::array<int, 3>{static_cast<int>(a), static_cast<int>(b), static_cast<int>(c)};
        best_surface = surface;
      }
    }
  }
  return best;
}

std::vector<std::int64_t> target_counts(std::int64_t elements, std::span<const double> weights) {
  if (elements < 0) throw std::invalid_argument("element count must be non-negative");
  if (weights.empty()) throw std::invalid_argument("at least one rank weight is required");
  long double total = 0.0L;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("rank weights must be finite and non-negative");
    total += w;
  }
  if (!(total > 0.0L)) throw std::invalid_argument("rank weights must not all be zero");

  const std::size_t n = weights.size();
  std::vector<std::int64_t> counts(n);
  // Remainders kept as numerators over `total`; fmod is exact, so equal quotas tie exactly.
  std::vector<long double> remainder(n);
  std::int64_t assigned = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const long double num = static_cast<long double>(elements) * weights[r];
    remainder[r] = std::fmod(num, total);
    counts[r] = static_cast<std::int64_t>(std::llround((num - remainder[r]) / total));
    assigned += counts[r];
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  std::int64_t left = elements - assigned;
  for (std::size_t i = 0; left > 0; i = (i + 1) % n) {
    if (weights[order[i]] > 0.0) {
      ++counts[order[i]];
      --left;
    }
  }
  for (std::size_t r = n; left < 0 && r-- > 0;) {
    if (counts[r] > 0) {
      --counts[r];
      ++left;
    }
  }
  return counts;
}

namespace {

class Bisector {
 public:
  Bisector(const BoxMesh& mesh, std::span<const std::int64_t> counts, Partition& out)
      : mesh_(mesh), counts_(counts), out_(out) {}

  void run(std::int64_t* begin, std::int64_t* end, std::size_t rank_lo, std::size_t rank_hi) {
    if (rank_hi - rank_lo == 1) {
      for (auto* it = begin; it != end; ++it) out_.assignment[*it] = static_cast<std::int32_t>(rank_lo);
      return;
    }
    const std::size_t mid = rank_lo + (rank_hi - rank_lo) / 2;
    std::int64_t lower = 0;
    for (std::size_t r = rank_lo; r < mid; ++r) lower += counts_[r];
    const std::int64_t size = end - begin;
    if (lower > 0 && lower < size) {
      const auto order = axis_order(begin, end);
      const auto dims = mesh_.dims();
      auto key = [&](std::int64_t e) {
        const auto c = mesh_.coords(e);
        return (static_cast<std::int64_t>(c[order[0]]) * dims[order[1]] + c[order[1]]) * dims[order[2]] +
               c[order[2]];
      };
      std::nth_element(begin, begin + lower, end, [&](std::int64_t a, std::int64_t b) { return key(a) < key(b); });
    }
    run(begin, begin + lower, rank_lo, mid);
    run(begin + lower, end, mid, rank_hi);
  }

 private:
  // Axes by decreasing bounding-box extent; equal extents keep x, y, z order.
  std::array<int, 3> axis_order(const std::int64_t* begin, const std::int64_t* end) const {
    std::array<int, 3> lo{mesh_.nx(), mesh_.ny(), mesh_.nz()};
    std::array<int, 3> hi{-1, -1, -1};
    for (auto* it = begin; it != end; ++it) {
      const auto c = mesh_.coords(*it);
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], c[a]);
        hi[a] = std::max(hi[a], c[a]);
      }
    }
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return hi[a] - lo[a] > hi[b] - lo[b]; });
    return order;
  }

  const BoxMesh& mesh_;
  std::span<const std::int64_t> counts_;
  Partition& out_;
};

}  // namespace

Partition partition_rcb(const BoxMesh& mesh, std::span<const std::int64_t> counts) {
  if (counts.empty()) throw std::invalid_argument("at least one rank is required");
  std::int64_t sum = 0;
  for (auto c : counts) {
    if (c < 0) throw std::invalid_argument("rank counts must be non-negative");
    sum += c;
  }
  if (sum != mesh.element_count()) {
    throw std::invalid_argument(
        fmt::format("rank counts sum to {} but the mesh has {} elements", sum, mesh.element_count()));
  }

  Partition p;
  p.assignment.assign(static_cast<std::size_t>(sum), 0);
  p.counts.assign(counts.begin(), counts.end());
  std::vector<std::int64_t> ids(static_cast<std::size_t>(sum));
  std::iota(ids.begin(), ids.end(), std::int64_t{0});
  Bisector(mesh, counts, p).run(ids.data(), ids.data() + ids.size(), 0, counts.size());
  return p;
}

std::int64_t CommPlan::total_exchanged_points() const {
  return std::accumulate(exchanged_points.begin(), exchanged_points.end(), std::int64_t{0});
}

std::int64_t CommPlan::points_between(std::int32_t a, std::int32_t b) const {
  const auto& msgs = messages.at(static_cast<std::size_t>(a));
  auto it = std::lower_bound(msgs.begin(), msgs.end(), b,
                             [](const RankMessage& m, std::int32_t r) { return m.neighbor < r; });
  return it != msgs.end() && it->neighbor == b ? it->points : 0;
}

CommPlan comm_plan(const BoxMesh& mesh, const Partition& partition, int poly_order) {
  if (poly_order < 1) throw std::invalid_argument("polynomial order must be at least 1");
  if (static_cast<std::int64_t>(partition.assignment.size()) != mesh.element_count()) {
    throw std::invalid_argument("partition does not match the mesh");
  }
  const std::size_t ranks = partition.num_ranks();
  std::vector<std::map<std::int32_t, std::int64_t>> faces(ranks);
  CommPlan plan;
  plan.points_per_face = static_cast<std::int64_t>(poly_order + 1) * (poly_order + 1);
  mesh.for_each_face([&](std::int64_t a, std::int64_t b) {
    const auto ra = partition.assignment[a];
    const auto rb = partition.assignment[b];
    if (ra == rb) return;
    ++faces[ra][rb];
    ++faces[rb][ra];
    ++plan.inter_rank_faces;
  });

  plan.messages.resize(ranks);
  plan.exchanged_points.assign(ranks, 0);
  for (std::size_t r = 0; r < ranks; ++r) {
    for (const auto& [neighbor, n] : faces[r]) {
      plan.messages[r].push_back({neighbor, n, n * plan.points_per_face});
      plan.exchanged_points[r] += n * plan.points_per_face;
    }
  }
  return plan;
}

PartitionStats partition_stats(const Partition& partition, std::span<const double> weights) {
  if (weights.size() != partition.num_ranks()) {
    throw std::invalid_argument("one weight per rank is required");
  }
  const double total_weight = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double elements = static_cast<double>(partition.assignment.size());
  PartitionStats s;
  s.imbalance = 0.0;
  s.max_count = *std::max_element(partition.counts.begin(), partition.counts.end());
  s.min_count = *std::min_element(partition.counts.begin(), partition.counts.end());
  for (std::size_t r = 0; r < partition.num_ranks(); ++r) {
    const double target = elements * weights[r] / total_weight;
    if (target > 0.0) {
      s.imbalance = std::max(s.imbalance, static_cast<double>(partition.counts[r]) / target);
    } else if (partition.counts[r] > 0) {
      s.imbalance = std::numeric_limits<double>::infinity();
    }
  }
  return s;
}

bool unit_depth_holds(const BoxMesh& mesh, const Partition& partition, const CommPlan& plan, int poly_order) {
  const std::int64_t per_face = static_cast<std::int64_t>(poly_order + 1) * (poly_order + 1);
  const auto n = mesh.element_count();
  if (static_cast<std::int64_t>(partition.assignment.size()) != n) return false;
  std::map<std::pair<std::int32_t, std::int32_t>, std::int64_t> faces;
  for (std::int64_t e = 0; e < n; ++e) {
    const auto re = partition.assignment[e];
    for (auto nb : mesh.neighbors(e)) {
      const auto rn = partition.assignment[nb];
      if (rn != re) ++faces[{re, rn}];
    }
  }
  std::int64_t expected_total = 0;
  for (const auto& [pair, count] : faces) {
    const auto expected = count * per_face;
    if (plan.points_between(pair.first, pair.second) != expected) return false;
    expected_total += expected;
  }
  return plan.total_exchanged_points() == expected_total;
}

void write_partition_csv(std::ostream& out, const Partition& partition) {
  out << "element_id,rank\n";
  for (std::size_t e = 0; e < partition.assignment.size(); ++e) {
    out << e << ',' << partition.assignment[e] << '\n';
  }
}

void write_comm_csv(std::ostream& out, const CommPlan& plan) {
  out << "rank_a,rank_b,points\n";
  for (std::size_t r = 0; r < plan.num_ranks(); ++r) {
    for (const auto& m : plan.messages[r]) {
      if (static_cast<std::size_t>(m.neighbor) > r) out << r << ',' << m.neighbor << ',' << m.points << '\n';
    }
  }
}

}  // namespace msa
