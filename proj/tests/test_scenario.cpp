#include <doctest.h>

#include <filesystem>

#include "msaplan/scenario.hpp"

using namespace msa;

namespace {

const std::filesystem::path kScenarios = std::filesystem::path(MSAPLAN_SOURCE_DIR) / "scenarios";

ScenarioError::Kind error_kind(std::string_view text) {
  try {
    parse_scenario(text);
  } catch (const ScenarioError& e) {
    return e.kind();
  }
  FAIL("expected a ScenarioError");
  return ScenarioError::Kind::Parse;
}

}  // namespace

TEST_CASE("preset references load the preset values") {
  const auto s = parse_scenario("machine.preset = \"deep\"\ncase.preset = \"rbc\"\n");
  CHECK(s.machine == *find_machine_preset("deep"));
  CHECK(s.case_spec == *find_case_preset("rbc"));
  CHECK(s.network == s.machine.host_network);
  CHECK(s.network_variant == NetworkVariant::Host);
  CHECK(s.io == s.machine.io);
  CHECK(s.machine.modules[*s.machine.find("booster")].count == 75);
  CHECK(s.machine.modules[*s.machine.find("cluster")].cores_per_node == 24);
  CHECK(s == scenario_from_presets("deep", "rbc"));
}

TEST_CASE("empty documents are parse errors") {
  CHECK(error_kind("") == ScenarioError::Kind::Parse);
  CHECK(error_kind("# only a comment\n\n") == ScenarioError::Kind::Parse);
}

TEST_CASE("overrides are visible after loading") {
  const auto s = parse_scenario(R"(
[machine]
preset = "juwels"
network.host.gs_rounds_per_step = 40

[case]
preset = "tgv"
elements = 4096

[network]
variant = "device"
alpha = 2.5e-6   # slower latency

[run]
counts = [1, 2, 4]
seed = 18446744073709551615
)");
  CHECK(s.network.alpha == 2.5e-6);
  CHECK(s.network.beta == s.machine.device_network.beta);
  CHECK(s.network_variant == NetworkVariant::Device);
  CHECK(s.machine.host_network.gs_rounds_per_step == 40.0);
  CHECK(s.case_spec.workload.elements() == 4096);
  CHECK_FALSE(s.case_spec.mesh_dims.has_value());
  CHECK(s.run.counts == std::vector<std::int64_t>{1, 2, 4});
  CHECK(s.run.seed == 18446744073709551615ull);
}

TEST_CASE("parse errors carry line and column") {
  try {
    parse_scenario("machine.preset = \"deep\"\ncase.preset = \"tgv\"\nmachine.preset = \"deep\"\n", "x.toml");
    FAIL("duplicate key accepted");
  } catch (const ScenarioError& e) {
    CHECK(e.kind() == ScenarioError::Kind::Parse);
    CHECK(e.line() == 3);
    CHECK(e.column() == 1);
    CHECK(std::string(e.what()).find("x.toml:3:1") == 0);
  }
  try {
    parse_scenario("[case]\npreset = \"tgv\n");
    FAIL("unterminated string accepted");
  } catch (const ScenarioError& e) {
    CHECK(e.line() == 2);
  }
  CHECK(error_kind("[case\n") == ScenarioError::Kind::Parse);
  CHECK(error_kind("case.elements = 12abc\n") == ScenarioError::Kind::Parse);
  CHECK(error_kind("case.elements 12\n") == ScenarioError::Kind::Parse);
}

TEST_CASE("unknown keys and presets are rejected") {
  CHECK(error_kind("machine.preset = \"deep\"\ncase.preset = \"tgv\"\nrun.colour = 1\n") ==
        ScenarioError::Kind::Validation);
  CHECK(error_kind("machine.preset = \"deep\"\ncase.preset = \"tgv\"\n[gpu]\nx = 1\n") ==
        ScenarioError::Kind::Validation);
  CHECK(error_kind("machine.preset = \"summit\"\ncase.preset = \"tgv\"\n") == ScenarioError::Kind::UnknownPreset);
  CHECK(error_kind("machine.preset = \"deep\"\ncase.preset = \"jet\"\n") == ScenarioError::Kind::UnknownPreset);
  CHECK(error_kind("machine.preset = \"deep\"\ncase.preset = \"tgv\"\ncase.elements = \"many\"\n") ==
        ScenarioError::Kind::Validation);
}

TEST_CASE("validation names the broken field") {
  auto s = scenario_from_presets("deep", "tgv");
  CHECK(validate(s).empty());
  s.network.alpha = -1e-6;
  auto v = validate(s);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == "network.alpha ≥ 0");

  s = scenario_from_presets("deep", "tgv");
  s.machine.modules[0].count = 3;
  v = validate(s);
  REQUIRE(v.size() == 1);
  CHECK(v[0].field == "machine.module.cluster.count");

  s = scenario_from_presets("deep", "tgv");
  s.run.counts = {4, 2};
  s.run.devices = {{"booster", 100}};
  CHECK(validate(s).size() == 2);

  CHECK(error_kind("machine.preset = \"deep\"\ncase.preset = \"tgv\"\nnetwork.alpha = -1\n") ==
        ScenarioError::Kind::Validation);
}

TEST_CASE("module counts default to nodes times devices per node") {
  const auto s = parse_scenario(R"(
machine.name = "mini"
machine.module.g.kind = "gpu"
machine.module.g.nodes = 3
machine.module.g.devices_per_node = 4
machine.module.g.p_opt = 1e5
machine.module.g.mem_per_device_gb = 16
case.name = "c"
case.elements = 8
)");
  CHECK(s.machine.modules.at(0).count == 12);
  CHECK(s.machine.modules.at(0).kind == ModuleKind::Gpu);
  CHECK(s.case_spec.workload.poly_order() == 7);
}

TEST_CASE("serialize round-trips") {
  std::vector<Scenario> inputs;
  for (const auto& m : builtin_machines()) {
    for (const auto& c : builtin_cases()) inputs.push_back(scenario_from_presets(m.name, c.name));
  }
  for (const auto& entry : std::filesystem::directory_iterator(kScenarios)) {
    if (entry.path().extension() == ".toml") inputs.push_back(load_scenario(entry.path()));
  }
  auto odd = scenario_from_presets("lumi-g", "pipe");
  odd.machine.name = "quote\"and\\slash";
  odd.network.alpha = 1.0 / 3.0;
  odd.run.weight = 0.1;
  odd.run.weight_grid = {1e-3, 7.0, 1e21};
  odd.run.devices = {{"lumi-g", 17}};
  odd.run.capacity = CapacityMode::Theoretical;
  odd.io.enabled = true;
  inputs.push_back(odd);

  REQUIRE(inputs.size() >= 9);
  for (const auto& s : inputs) {
    const auto text = serialize(s);
    const auto back = parse_scenario(text);
    CHECK(back == s);
    CHECK(serialize(back) == text);
  }
}

TEST_CASE("run resolution") {
  auto s = scenario_from_presets("deep", "tgv");
  CHECK(resolve_modules(s) == std::vector<std::size_t>{0, 1});
  CHECK(resolve_mix(s) == Mix{{0, 50}, {1, 75}});
  s.run.modules = {"booster", "cluster"};
  s.run.count = 32;
  CHECK(resolve_mix(s) == Mix{{1, 16}, {0, 16}});
  s.run.devices = {{"booster", 48}};
  CHECK(resolve_mix(s) == Mix{{1, 48}});
  s.run.capacity = CapacityMode::Theoretical;
  CHECK(sim_options(s).capacity == CapacityMode::Theoretical);
  CHECK(sim_options(s).network == s.network);
}

TEST_CASE("shipped scenarios load") {
  const auto s = load_scenario(kScenarios / "deep_pipe_io.toml");
  CHECK(s.io.enabled);
  CHECK(s.io.output_every == 10);
  CHECK(s.run.weight == 100.0);
  CHECK(s.case_spec.mesh_dims == std::array{30, 32, 38});
  CHECK_THROWS_AS(load_scenario(kScenarios / "missing.toml"), ScenarioError);
}
