#include <doctest.h>

#include <stdexcept>

#include <random>

#include "msaplan/model.hpp"
#include "oracles.hpp"

using namespace msa;

namespace {

DeviceClass cls(std::string name, double p, double cap, std::int64_t count) {
  DeviceClass c;
  c.name = std::move(name);
  c.p_opt = p;
  c.c_max = cap;
  c.count = count;
  return c;
}

}  // namespace

TEST_CASE("grid points are E * N^3") {
  CHECK(grid_points(Workload(36480, 7)) == 12512640);
  CHECK(grid_points(Workload(262144, 7)) == 89915392);
  CHECK(grid_points(Workload(2097152, 7)) == 719323136);
  CHECK(grid_points(Workload(10, 1)) == 10);
  CHECK(total_cost(Workload(36480, 7)) == 36480.0);
}

TEST_CASE("workload rejects empty or order-zero cases") {
  CHECK_THROWS_AS(Workload(0, 7), std::invalid_argument);
  CHECK_THROWS_AS(Workload(10, 0), std::invalid_argument);
  CHECK_THROWS_AS(Workload(10, 7, -1.0), std::invalid_argument);
}

TEST_CASE("capacity from memory") {
  CHECK(capacity_from_memory(32.0, 0.001) == 32000.0);
  CHECK(capacity_from_memory(40.0, 0.001) == 40000.0);
  CHECK(capacity_from_memory(30.0, 0.001) == 30000.0);
  CHECK(capacity_from_memory(1.0, 0.3) == 3.0);
  CHECK_THROWS_AS(capacity_from_memory(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("device class validation") {
  CHECK_NOTHROW(cls("a", 1.0, kUnbounded, 1).validate());
  CHECK_THROWS_AS(cls("a", 0.0, 1.0, 1).validate(), std::invalid_argument);
  CHECK_THROWS_AS(cls("a", 1.0, 0.0, 1).validate(), std::invalid_argument);
  CHECK_THROWS_AS(cls("a", 1.0, 1.0, 0).validate(), std::invalid_argument);
}

TEST_CASE("unconstrained split is proportional to aggregate performance") {
  const std::vector<DeviceClass> c{cls("gpu", 10.0, kUnbounded, 2), cls("cpu", 1.0, kUnbounded, 5)};
  const auto a = solve_allocation(250.0, c);
  REQUIRE(a.feasible);
  CHECK(a.t_min == doctest::Approx(10.0));
  CHECK(tmin_unconstrained(250.0, c) == doctest::Approx(10.0));
  CHECK(a.per_class_cost[0] == doctest::Approx(200.0));
  CHECK(a.per_class_cost[1] == doctest::Approx(50.0));
  CHECK(a.per_device_cost[0] == doctest::Approx(100.0));
  CHECK(a.per_device_cost[1] == doctest::Approx(10.0));
  CHECK(a.saturated_classes().empty());
}

TEST_CASE("capacity pins the fast class and pushes the rest down") {
  // 5x faster device holding at most 50 elements next to an unbounded one.
  const std::vector<DeviceClass> one{cls("fast", 5.0, 50.0, 1), cls("slow", 1.0, kUnbounded, 1)};
  const auto a = solve_allocation(110.0, one);
  CHECK(a.t_min == doctest::Approx(60.0));
  CHECK(a.per_class_cost[0] == doctest::Approx(50.0));
  CHECK(a.saturated_classes() == std::vector<std::size_t>{0});

  auto two = one;
  two[0].count = 2;
  CHECK(solve_allocation(110.0, two).t_min == doctest::Approx(10.0));
}

TEST_CASE("water-filling pins in cascade") {
  const std::vector<DeviceClass> c{cls("a", 100.0, 10.0, 1), cls("b", 10.0, 30.0, 1), cls("c", 1.0, kUnbounded, 1)};
  const auto a = solve_allocation(100.0, c);
  REQUIRE(a.feasible);
  // a pinned at 10, b pinned at 30, c carries 60.
  CHECK(a.per_class_cost[0] == doctest::Approx(10.0));
  CHECK(a.per_class_cost[1] == doctest::Approx(30.0));
  CHECK(a.per_class_cost[2] == doctest::Approx(60.0));
  CHECK(a.t_min == doctest::Approx(60.0));
  CHECK(a.t_min == doctest::Approx(oracle::tmin_bisection(100.0, c)));
}

TEST_CASE("insufficient capacity is infeasible") {
  const std::vector<DeviceClass> c{cls("a", 1.0, 10.0, 2), cls("b", 1.0, 5.0, 1)};
  const auto a = solve_allocation(26.0, c);
  CHECK_FALSE(a.feasible);
  CHECK(a.per_class_cost.empty());
  CHECK(std::isinf(a.t_min));
  CHECK(solve_allocation(25.0, c).feasible);
}

TEST_CASE("zero cost needs no time") {
  const std::vector<DeviceClass> c{cls("a", 1.0, 10.0, 1)};
  const auto a = solve_allocation(0.0, c);
  CHECK(a.feasible);
  CHECK(a.t_min == 0.0);
}

TEST_CASE("solver agrees with bisection oracle on random instances") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> p(0.5, 50.0);
  std::uniform_real_distribution<double> cap(1.0, 100.0);
  std::uniform_int_distribution<int> n(1, 4);
  std::uniform_int_distribution<int> cnt(1, 8);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<DeviceClass> c;
    const int k = n(rng);
    for (int i = 0; i < k; ++i) c.push_back(cls("c", p(rng), rng() % 3 == 0 ? kUnbounded : cap(rng), cnt(rng)));
    double total = 0.0;
    for (const auto& x : c) total += x.aggregate_capacity();
    const double cost = std::isinf(total) ? 500.0 : total * 0.9;
    const auto a = solve_allocation(cost, c);
    REQUIRE(a.feasible);
    CHECK(a.t_min == doctest::Approx(oracle::tmin_bisection(cost, c)).epsilon(1e-9));
    double sum = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      sum += a.per_class_cost[i];
      CHECK(a.per_class_cost[i] <= c[i].aggregate_capacity() * (1 + 1e-12));
    }
    CHECK(sum == doctest::Approx(cost).epsilon(1e-12));
  }
}

TEST_CASE("brute force finds the same optimum on a coarse grid") {
  const std::vector<DeviceClass> c{cls("fast", 5.0, 50.0, 1), cls("slow", 1.0, kUnbounded, 1)};
  const auto b = brute_force_allocation(110.0, c, 110);
  CHECK(b.t_min == doctest::Approx(60.0));
  CHECK_THROWS_AS(brute_force_allocation(1.0, c, 5), std::invalid_argument);
  const std::vector<DeviceClass> five(5, cls("x", 1.0, kUnbounded, 1));
  CHECK_THROWS_AS(brute_force_allocation(1.0, five, 100), std::invalid_argument);
}

TEST_CASE("allocation time ignores capacity") {
  const std::vector<DeviceClass> c{cls("a", 2.0, 1.0, 2), cls("b", 1.0, 1.0, 1)};
  const std::vector<double> split{8.0, 3.0};
  CHECK(allocation_time(split, c) == doctest::Approx(3.0));
}

TEST_CASE("memory feasibility uses installed memory") {
  auto gpu = cls("booster", 1.0, 32000.0, 48);
  gpu.mem_per_device = 32.0;
  const std::vector<DeviceClass> c{gpu};
  const auto f = feasibility(Workload(2097152, 7), c);
  CHECK_FALSE(f.feasible);
  CHECK(f.required_gb == doctest::Approx(2097.152));
  CHECK(f.available_gb == 1536.0);
}

TEST_CASE("operation domains") {
  CHECK(classify_domain(1.0, 1.0, 10.0, 100.0) == OperationDomain::Communication);
  CHECK(classify_domain(1.0, 2.0, 90.0, 100.0) == OperationDomain::Communication);
  CHECK(classify_domain(2.0, 1.0, 10.0, 100.0) == OperationDomain::Scaling);
  CHECK(classify_domain(2.0, 1.0, 50.0, 100.0) == OperationDomain::ExtremeScaling);
  CHECK(classify_domain(2.0, 1.0, 30.0, 100.0, 0.25) == OperationDomain::ExtremeScaling);
  CHECK_THROWS_AS(classify_domain(1.0, 1.0, 1.0, 0.0), std::invalid_argument);
  CHECK(to_string(OperationDomain::ExtremeScaling) == "extreme-scaling");
}

TEST_CASE("calibration keeps the best per-device throughput") {
  const std::vector<CalibrationRun> runs{{1, 1000, 0.01}, {4, 1000, 0.005}, {2, 4000, 0.02}};
  CHECK(calibrate_popt(runs) == doctest::Approx(100000.0));
  CHECK_THROWS_AS(calibrate_popt(std::vector<CalibrationRun>{}), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_popt(std::vector<CalibrationRun>{{0, 1, 1.0}}), std::invalid_argument);
}
