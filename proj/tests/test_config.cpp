#include <doctest.h>

#include "schrocurve/config.hpp"

#include <filesystem>
#include <fstream>

using namespace schrocurve;
using nlohmann::json;

namespace {

RunConfig nondefault() {
  RunConfig c;
  c.problem.metric = MetricSpec{"gauss_bump", 0.25, {0.6, 0.8}};
  c.problem.m0 = PotentialSpec{"harmonic_window", 0.5, 4.0};
  c.problem.m1 = MagneticSpec{"shear", 0.1};
  c.problem.gamma = NonlinearitySpec{"power", 0.5, -0.25, 3};
  c.problem.sigma = NonlinearitySpec{"linear", 0.2, 0.0, 1};
  c.problem.u0 = InitialSpec{"gaussian", 0.7, 1.3, -0.5, 2.0};
  c.discretization = {2, 64, 8.0, 5e-3, 0.5};
  c.noise.type = "atoms";
  c.noise.atoms = {AtomSpec{{0.5, 0.0}, 0.25}, AtomSpec{{-0.5, 0.0}, 0.25}};
  c.noise.J = 2;
  c.solver.z = 1;
  c.solver.zeta = 2;
  c.solver.scheme = "em";
  c.monte_carlo.paths = 9;
  c.monte_carlo.seed = 123456789012345ULL;
  c.output.directory = "somewhere";
  c.output.save_times = {0.0, 0.25};
  return c;
}

std::string field_of(const json& j) {
  try {
    config_from_json(j);
  } catch (const config_error& e) {
    return e.field;
  }
  return "";
}

}  // namespace

TEST_CASE("config echo is idempotent") {
  for (const RunConfig& c : {RunConfig{}, nondefault()}) {
    const json once = to_json(c);
    const json twice = to_json(config_from_json(once));
    CHECK(once == twice);
    CHECK(to_json(parse_config(once.dump(), false)) == once);
  }
}

TEST_CASE("missing fields take defaults") {
  const RunConfig c = config_from_json(json::object());
  CHECK(to_json(c) == to_json(RunConfig{}));
  CHECK_FALSE(c.monte_carlo.seed.has_value());
}

TEST_CASE("schema errors name the field") {
  CHECK(field_of({{"problem", {{"metrc", {{"family", "flat"}}}}}}) == "problem.metrc");
  CHECK(field_of({{"discretization", {{"n", "many"}}}}) == "discretization.n");
  CHECK(field_of({{"discretization", {{"n", -4}}}}) == "discretization.n");
  CHECK(field_of({{"solver", {{"tol", true}}}}) == "solver.tol");
  CHECK(field_of({{"surprise", 1}}) == "surprise");
  CHECK(field_of({{"noise", 3}}) == "noise");
}

TEST_CASE("semantic validation") {
  auto bad = [](auto&& edit) {
    RunConfig c;
    edit(c);
    CHECK_THROWS_AS(validate(c), config_error);
  };
  bad([](RunConfig& c) { c.discretization.n = 0; });
  bad([](RunConfig& c) { c.discretization.d = 3; });
  bad([](RunConfig& c) { c.discretization.dt = 0.0; });
  bad([](RunConfig& c) { c.problem.metric.family = "sphere"; });
  bad([](RunConfig& c) { c.problem.gamma.kind = "cubic"; });
  bad([](RunConfig& c) { c.noise.type = "white"; });
  bad([](RunConfig& c) { c.solver.scheme = "rk4"; });
  CHECK_NOTHROW(validate(RunConfig{}));
  CHECK_NOTHROW(validate(nondefault()));
}

TEST_CASE("TOML and JSON give the same config") {
  const std::string toml_text = R"(
[problem]
metric = { family = "rational_decay", eps = 0.2, direction = [1.0, 0.0] }
gamma = { kind = "power", re = 0.3, im = 0.0, n = 3 }

[discretization]
n = 128
dt = 0.01

[noise]
type = "uniform_density"
radius = 1.5

[[noise.atoms]]
xi = [0.25]
weight = 0.5

[monte_carlo]
seed = 42
)";
  const json j = {{"problem",
                   {{"metric", {{"family", "rational_decay"}, {"eps", 0.2}, {"direction", {1.0, 0.0}}}},
                    {"gamma", {{"kind", "power"}, {"re", 0.3}, {"im", 0.0}, {"n", 3}}}}},
                  {"discretization", {{"n", 128}, {"dt", 0.01}}},
                  {"noise", {{"type", "uniform_density"}, {"radius", 1.5}, {"atoms", {{{"xi", {0.25}}, {"weight", 0.5}}}}}},
                  {"monte_carlo", {{"seed", 42}}}};
  const RunConfig from_toml = parse_config(toml_text, true);
  CHECK(to_json(from_toml) == to_json(config_from_json(j)));
  CHECK(from_toml.monte_carlo.seed == 42u);

  const auto dir = std::filesystem::temp_directory_path() / "schrocurve_test_config";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "c.toml") << toml_text;
  std::ofstream(dir / "c.json") << j.dump();
  CHECK(to_json(load_config(dir / "c.toml")) == to_json(load_config(dir / "c.json")));
  std::ofstream(dir / "broken.toml") << "[problem\n";
  CHECK_THROWS(load_config(dir / "broken.toml"));
  CHECK_THROWS(load_config(dir / "absent.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("resolve fills only the seed") {
  RunConfig c;
  const RunConfig r = resolve(c);
  REQUIRE(r.monte_carlo.seed.has_value());
  json a = to_json(r), b = to_json(c);
  a["monte_carlo"].erase("seed");
  b["monte_carlo"].erase("seed");
  CHECK(a == b);
  c.monte_carlo.seed = 5;
  CHECK(resolve(c).monte_carlo.seed == 5u);
}
