#include <doctest.h>

#include <stdexcept>

#include "msaplan/perfsim.hpp"
#include "oracles.hpp"

using namespace msa;

namespace {

RankLayout two_class_layout(std::size_t fast, std::size_t slow) {
  RankLayout l;
  l.classes = {{"fast", {10.0, 0.0}, kUnbounded}, {"slow", {1.0, 0.0}, kUnbounded}};
  for (std::size_t r = 0; r < fast + slow; ++r) {
    l.rank_class.push_back(r < fast ? 0 : 1);
    l.rank_node.push_back(r);
    l.node_io_bw.push_back(0.0);
  }
  return l;
}

}  // namespace

TEST_CASE("performance curve") {
  const PerfCurve flat{100.0, 0.0};
  CHECK(flat.rate(1.0) == 100.0);
  const PerfCurve c{100.0, 50.0};
  CHECK(c.rate(50.0) == doctest::Approx(50.0));
  CHECK(c.rate(150.0) == doctest::Approx(75.0));
  CHECK(estimate_ta(150, c) == doctest::Approx(150.0 / 75.0));
  CHECK(estimate_ta(0, c) == 0.0);
  CHECK(estimate_ta(100, flat) == doctest::Approx(1.0));
}

TEST_CASE("alpha-beta communication time") {
  const BoxMesh m(2, 2, 1);
  const auto p = partition_rcb(m, std::vector<std::int64_t>{1, 1, 1, 1});
  const auto plan = comm_plan(m, p, 1);  // 4 points per face
  const NetworkParams net{1e-3, 1e-6, 10.0};
  for (std::size_t r = 0; r < 4; ++r) {
    REQUIRE(plan.messages[r].size() == 2);
    CHECK(estimate_tc(plan, r, net) == doctest::Approx(10.0 * 2.0 * (1e-3 + 4.0 * 1e-6)));
  }
  CHECK_THROWS_AS(estimate_tc(plan, 4, net), std::out_of_range);
}

TEST_CASE("zero network cost and flat curves reproduce the model") {
  const BoxMesh m(8, 6, 1);
  const auto layout = two_class_layout(2, 4);
  const std::vector<DeviceClass> classes{{"fast", 10.0, kUnbounded, 0, 0, 2}, {"slow", 1.0, kUnbounded, 0, 0, 4}};
  const auto a = solve_allocation(48.0, classes);
  const std::vector<std::int64_t> counts{20, 20, 2, 2, 2, 2};
  const auto p = partition_rcb(m, counts);
  const auto plan = comm_plan(m, p, 7);
  const auto est = estimate_timestep(p, plan, layout, NetworkParams{0, 0, 1}, IoParams{}, 7);
  CHECK(est.total == doctest::Approx(a.t_min));
  CHECK(est.total == doctest::Approx(2.0));
  CHECK(est.max_t_c() == 0.0);
  CHECK(est.domain == OperationDomain::Scaling);
}

TEST_CASE("rank maps must agree") {
  const BoxMesh m(2, 1, 1);
  const auto p = partition_rcb(m, std::vector<std::int64_t>{1, 1});
  const auto plan = comm_plan(m, p, 1);
  CHECK_THROWS_AS(estimate_timestep(p, plan, two_class_layout(1, 2), {}, {}, 1), std::invalid_argument);
}

TEST_CASE("io phase per node") {
  Partition p;
  p.assignment = {0, 0, 0, 0, 0, 1};
  p.counts = {4, 1, 1};
  const std::vector<std::size_t> rank_node{0, 1, 1};
  IoParams io;
  io.enabled = true;
  io.bytes_per_point = 8.0;
  io.node_io_bw = 2.0;
  const auto rep = io_phase(p, rank_node, io, 10);
  CHECK(rep.node_elements == std::vector<std::int64_t>{4, 2});
  CHECK(rep.node_seconds[0] == doctest::Approx(4 * 1000 * 8.0 / 2e9));
  CHECK(rep.imbalance == doctest::Approx(2.0));

  const std::vector<double> bw{4.0, 0.0};
  CHECK(io_phase(p, rank_node, io, 10, bw).imbalance == doctest::Approx(1.0));

  io.enabled = false;
  CHECK_THROWS_AS(io_phase(p, rank_node, io, 10), std::invalid_argument);
}

TEST_CASE("io time spreads over the output interval") {
  const BoxMesh m(4, 1, 1);
  const auto p = partition_rcb(m, std::vector<std::int64_t>{2, 2});
  const auto plan = comm_plan(m, p, 1);
  auto layout = two_class_layout(1, 1);
  IoParams io;
  io.enabled = true;
  io.bytes_per_point = 1e9;
  io.node_io_bw = 1.0;
  io.output_every = 4;
  const auto est = estimate_timestep(p, plan, layout, NetworkParams{0, 0, 1}, io, 1);
  CHECK(est.t_io[0] == doctest::Approx(0.5));
  CHECK(est.max_t_io() == doctest::Approx(0.5));
}

TEST_CASE("ci95 uses the population deviation") {
  const std::vector<double> s{1, 1, 3, 3};
  const auto i = ci95(s);
  CHECK(i.mean == 2.0);
  CHECK(i.stddev == 1.0);
  CHECK(i.half_width == 1.96);
  const std::vector<double> same(100, 4.25);
  CHECK(ci95(same).half_width == 0.0);
  CHECK_THROWS_AS(ci95(std::vector<double>{1.0}), std::invalid_argument);

  const std::vector<double> xs{0.3, 1.7, 2.2, 9.1, 4.4};
  const auto [mean, sd] = oracle::mean_sd(xs);
  CHECK(ci95(xs).mean == doctest::Approx(mean));
  CHECK(ci95(xs).stddev == doctest::Approx(sd));
}

TEST_CASE("jittered samples are reproducible") {
  TimestepEstimate e;
  e.total = 2.0;
  const auto a = jittered_samples(e, 500, 0.05, 42);
  CHECK(a == jittered_samples(e, 500, 0.05, 42));
  CHECK(a != jittered_samples(e, 500, 0.05, 43));
  const auto band = ci95(a);
  CHECK(band.mean == doctest::Approx(2.0).epsilon(0.01));
  CHECK(band.stddev == doctest::Approx(0.1).epsilon(0.15));
  CHECK(jittered_samples(e, 10, 0.0, 1) == std::vector<double>(10, 2.0));
  CHECK_THROWS_AS(jittered_samples(e, 10, -0.1, 1), std::invalid_argument);
}
