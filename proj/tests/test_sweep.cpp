#include <doctest.h>

#include <stdexcept>

#include <sstream>

#include "msaplan/sweep.hpp"

using namespace msa;

namespace {

MachineSpec toy_machine() {
  MachineSpec m;
  m.name = "toy";
  ModuleSpec cpu;
  cpu.name = "cpu";
  cpu.kind = ModuleKind::Cpu;
  cpu.nodes = 16;
  cpu.count = 16;
  cpu.cores_per_node = 2;
  cpu.p_opt = 100.0;
  cpu.mem_per_device_gb = 1.0;
  ModuleSpec gpu;
  gpu.name = "gpu";
  gpu.kind = ModuleKind::Gpu;
  gpu.nodes = 16;
  gpu.count = 16;
  gpu.p_opt = 800.0;
  gpu.mem_per_device_gb = 0.02;  // 20 elements
  m.modules = {cpu, gpu};
  m.host_network = m.device_network = NetworkParams{0.0, 0.0, 1.0};
  return m;
}

SimOptions no_comm() {
  SimOptions o;
  o.network = NetworkParams{0.0, 0.0, 1.0};
  return o;
}

}  // namespace

TEST_CASE("even mix") {
  const auto m = toy_machine();
  const std::vector<std::size_t> both{0, 1};
  const auto mix = even_mix(m, both, 8);
  REQUIRE(mix.size() == 2);
  CHECK(mix[0].devices == 4);
  CHECK(mix[1].devices == 4);
  CHECK_THROWS_AS(even_mix(m, both, 7), std::invalid_argument);
  CHECK_THROWS_AS(even_mix(m, std::vector<std::size_t>{}, 2), std::invalid_argument);
}

TEST_CASE("zero-communication sweep scales perfectly") {
  const auto m = toy_machine();
  const BoxMesh mesh(8, 4, 2);
  const Workload w(64, 3);
  const std::vector<std::size_t> cpu{0};
  const std::vector<std::int64_t> counts{1, 2, 4, 8};
  const auto t = sweep_strong_scaling(mesh, w, m, cpu, counts, std::nullopt, no_comm());
  REQUIRE(t.rows.size() == 4);
  for (const auto& r : t.rows) {
    CHECK(r.feasible);
    CHECK(r.parallel_efficiency == doctest::Approx(1.0));
    CHECK(r.t_total == doctest::Approx(r.model_tmin));
    CHECK(r.linear_ref == doctest::Approx(r.t_total));
    CHECK(r.cpu_cores == 2 * r.devices);
    CHECK(r.gpu_devices == 0);
  }
  CHECK(t.rows[3].speedup == doctest::Approx(8.0));
  CHECK_THROWS_AS(sweep_strong_scaling(mesh, w, m, cpu, std::vector<std::int64_t>{2, 1}, std::nullopt, no_comm()),
                  std::invalid_argument);
}

TEST_CASE("capacity makes small mixes infeasible") {
  const auto m = toy_machine();
  const BoxMesh mesh(8, 4, 2);
  const Workload w(64, 3);
  const std::vector<std::size_t> gpu{1};
  const std::vector<std::int64_t> counts{2, 4};
  const auto t = sweep_strong_scaling(mesh, w, m, gpu, counts, std::nullopt, no_comm());
  CHECK_FALSE(t.rows[0].feasible);
  CHECK(t.rows[0].domain == "infeasible");
  CHECK(t.rows[1].feasible);
  CHECK(t.rows[1].speedup == doctest::Approx(1.0));
}

TEST_CASE("simulation never beats the model") {
  auto m = toy_machine();
  m.host_network = NetworkParams{1e-4, 1e-7, 5.0};
  SimOptions o;
  o.network = m.host_network;
  const BoxMesh mesh(8, 4, 2);
  const Workload w(64, 3);
  const std::vector<std::size_t> both{0, 1};
  const std::vector<std::int64_t> counts{2, 4, 8};
  for (const auto& r : sweep_strong_scaling(mesh, w, m, both, counts, std::nullopt, o).rows) {
    if (r.feasible) CHECK(r.t_total >= r.model_tmin * (1 - 1e-12));
  }
}

TEST_CASE("fixed weights over capacity are infeasible") {
  const auto m = toy_machine();
  const BoxMesh mesh(8, 4, 2);
  const Workload w(64, 3);
  const Mix mix{{0, 4}, {1, 2}};
  // GPU ranks hold 20 elements at most: weight 8 gives 8/24 * 64 = 21.3.
  CHECK_FALSE(evaluate_mix(mesh, w, m, mix, 8.0, no_comm()).feasible);
  const auto ok = evaluate_mix(mesh, w, m, mix, 4.0, no_comm());
  REQUIRE(ok.feasible);
  CHECK(ok.partition.counts[8] == 16);
  CHECK(ok.partition.counts[0] == 4);

  const std::vector<double> grid{1.0, 2.0, 4.0, 5.0, 8.0};
  const auto s = search_weight(mesh, w, m, mix, grid, no_comm());
  CHECK(s.found);
  // 4 and 5 both leave four elements on the busiest core; ties go to the lower weight.
  CHECK(s.table[2].total == s.table[3].total);
  CHECK(s.best_weight == 4.0);
  CHECK(s.table[3].feasible);
  CHECK_FALSE(s.table[4].feasible);
  CHECK_THROWS_AS(search_weight(mesh, w, m, mix, std::vector<double>{}, no_comm()), std::invalid_argument);
}

TEST_CASE("scaling csv schema") {
  ScalingTable t;
  ScalingRow r;
  r.devices = 2;
  r.gpu_devices = 1;
  r.cpu_cores = 24;
  r.elements_per_gpu = 100.0;
  r.elements_per_core = 5.0;
  r.t_total = 0.5;
  r.speedup = 1.0;
  r.parallel_efficiency = 1.0;
  r.model_tmin = 0.25;
  r.linear_ref = 0.5;
  r.domain = "scaling";
  t.rows.push_back(r);
  std::ostringstream out;
  write_scaling_csv(out, t);
  CHECK(out.str() ==
        "devices,gpu_devices,cpu_cores,elements_per_gpu,elements_per_core,t_a_max,t_c_max,t_io_max,t_total,"
        "speedup,parallel_efficiency,model_tmin,domain\n"
        "2,1,24,100.0,5.0,0.000000e+00,0.000000e+00,0.000000e+00,5.000000e-01,1.0000,1.0000,2.500000e-01,scaling\n");
  std::ostringstream with_ref;
  write_scaling_csv(with_ref, t, true);
  CHECK(with_ref.str().substr(0, with_ref.str().find('\n')) == std::string(kScalingCsvHeader) + ",linear_ref");
}
