#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace msa {

/// Structured hexahedral mesh of nx * ny * nz elements.
/// Element ids are lexicographic with x varying fastest.
class BoxMesh {
 public:
  BoxMesh(int nx, int ny, int nz);

  int nx() const { return dims_[0]; }
  int ny() const { return dims_[1]; }
  int nz() const { return dims_[2]; }
  const std::array<int, 3>& dims() const { return dims_; }

  std::int64_t element_count() const;
  std::int64_t id(int x, int y, int z) const {
    return x + static_cast<std::int64_t>(dims_[0]) * (y + static_cast<std::int64_t>(dims_[1]) * z);
  }
  std::array<int, 3> coords(std::int64_t id) const;

  /// Face neighbours (6-connectivity), in -x,+x,-y,+y,-z,+z order.
  std::vector<std::int64_t> neighbors(std::int64_t id) const;

  /// Interior faces shared by two elements.
  std::int64_t face_count() const;

  /// Calls f(a, b) once per interior face, a < b.
  template <class F>
  void for_each_face(F&& f) const {
    const auto [nx, ny, nz] = dims_;
    for (int z = 0; z < nz; ++z) {
      for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
          const std::int64_t e = id(x, y, z);
          if (x + 1 < nx) f(e, id(x + 1, y, z));
          if (y + 1 < ny) f(e, id(x, y + 1, z));
          if (z + 1 < nz) f(e, id(x, y, z + 1));
        }
      }
    }
  }

 private:
  std::array<int, 3> dims_;
};

BoxMesh build_box_mesh(int nx, int ny, int nz);

/// Most-cubic factorisation of `elements` (minimum surface area), sorted
/// ascending. Empty when every factorisation exceeds `max_aspect`.
std::optional<std::array<int, 3>> auto_box_dims(std::int64_t elements, double max_aspect = 8.0);

/// Largest-remainder apportionment of `elements` proportional to `weights`.
/// Remainder ties go to the lower rank.
std::vector<std::int64_t> target_counts(std::int64_t elements, std::span<const double> weights);

struct Partition {
  std::vector<std::int32_t> assignment;  // element -> rank
  std::vector<std::int64_t> counts;      // rank -> element count

  std::size_t num_ranks() const { return counts.size(); }
  bool operator==(const Partition&) const = default;
};

/// Recursive coordinate bisection honouring exact per-rank counts.
///
/// The rank range is halved (lower half gets floor(n/2) ranks) and the
/// element set is cut along the longest axis of its bounding box (ties
/// x, then y, then z) so that the lower half receives exactly the sum of
/// its ranks' counts.
Partition partition_rcb(const BoxMesh& mesh, std::span<const std::int64_t> counts);

struct RankMessage {
  std::int32_t neighbor = 0;
  std::int64_t faces = 0;
  std::int64_t points = 0;
};

/// Gather-scatter exchange implied by a partition. Only shared faces count:
/// each face between elements on different ranks moves (N+1)^2 points each
/// way. Edge and vertex sharing is not deduplicated, so volumes are an
/// upper bound.
struct CommPlan {
  std::vector<std::vector<RankMessage>> messages;  // rank -> messages sorted by neighbor
  std::vector<std::int64_t> exchanged_points;      // rank -> points sent
  std::int64_t inter_rank_faces = 0;
  std::int64_t points_per_face = 0;

  std::size_t num_ranks() const { return messages.size(); }
  std::int64_t total_exchanged_points() const;
  /// Points moved from rank a to rank b (0 when not neighbours).
  std::int64_t points_between(std::int32_t a, std::int32_t b) const;
};

CommPlan comm_plan(const BoxMesh& mesh, const Partition& partition, int poly_order);

/// Independent recount of the exchange from element adjacency: every pair
/// of ranks that share faces must move exactly faces * (N+1)^2 points each
/// way, and no other pair may exchange anything.
bool unit_depth_holds(const BoxMesh& mesh, const Partition& partition, const CommPlan& plan,
                      int poly_order);

struct PartitionStats {
  double imbalance = 1.0;  // max over ranks of count / continuous target
  std::int64_t max_count = 0;
  std::int64_t min_count = 0;
};

PartitionStats partition_stats(const Partition& partition, std::span<const double> weights);

void write_partition_csv(std::ostream& out, const Partition& partition);
void write_comm_csv(std::ostream& out, const CommPlan& plan);

}  // namespace msa
