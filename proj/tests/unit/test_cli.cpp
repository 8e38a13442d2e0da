#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ffstab/errors.hpp"
#include "ffstab/experiment.hpp"

using namespace ffstab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ffstab-test-" + name);
  fs::remove_all(dir);
  return dir;
}

const char* kSmall = R"({
  "model": "orbital",
  "lengths": [8, 10],
  "D": 2,
  "eps_grid": {"start": 0.0, "stop": 0.02, "steps": 3},
  "constants": {"C": 1.0},
  "higher_gaps": {"nu": 1.0, "mu": 2.0}
})";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config parsing") {
    const ExperimentConfig c = parse_config(kSmall);
    CHECK(c.model == "orbital");
    CHECK(c.lengths == std::vector<int>{8, 10});
    CHECK(c.D == std::vector<int>{2});
    REQUIRE(c.C.has_value());
    CHECK(*c.C == 1.0);
    const auto grid = c.eps.values();
    REQUIRE(grid.size() == 4);
    CHECK(grid.front() == 0.0);
    CHECK(grid.back() == doctest::Approx(0.02));

    CHECK(parse_config(R"({"D": [2, 3]})").D == std::vector<int>{2, 3});
    CHECK(parse_config("{}").model == "orbital");
  }

  TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config(R"({"eps_grid": {"start": 0.01}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"model": "ising"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"model": "file"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"lengths": [5], "D": 2})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"higher_gaps": {"nu": 2, "mu": 1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"lengths": "eight"})"), ConfigError);
    try {
      parse_config(R"({"perturbation": {"A": 1, "strength": 2}})");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("perturbation.strength") != std::string::npos);
    }
    try {
      parse_config("{\n  \"model\": \"orbital\",\n  \"lengths\": [8,\n}");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
  }

  TEST_CASE("gapsweep writes a deterministic table") {
    const ExperimentConfig cfg = parse_config(kSmall);
    std::ostringstream log;
    const fs::path a = scratch("gap-a"), b = scratch("gap-b");
    RunOptions o1;
    o1.out_dir = a.string();
    RunOptions o2;
    o2.out_dir = b.string();
    o2.jobs = 2;
    CHECK(run("gapsweep", cfg, o1, log) == 0);
    CHECK(run("gapsweep", cfg, o2, log) == 0);
    CHECK(first_line(a / "gapsweep.csv") ==
          "model,length,D,seed,eps,gamma,sp0_min,sp0_max,sp0_diam,sp1_min,bound,vacuous");
    CHECK(slurp(a / "gapsweep.csv") == slurp(b / "gapsweep.csv"));
    CHECK(fs::exists(a / "summary.txt"));
    std::ifstream in(a / "gapsweep.csv");
    int rows = -1;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 2 * 4);
  }

  TEST_CASE("validate and bounds on the AKLT chain") {
    ExperimentConfig cfg = parse_config(R"({"model": "aklt", "lengths": [5, 6], "D": 1, "perturbation": {"max_radius": 1}, "constants": {"C": 0.5}})");
    std::ostringstream log;
    const fs::path out = scratch("aklt");
    RunOptions o;
    o.out_dir = out.string();
    CHECK(run("validate", cfg, o, log) == 0);
    CHECK(first_line(out / "validate.csv") ==
          "model,length,a,b,ground_energy,kernel_dim,min_nonzero,frustration_free");
    CHECK(run("bounds", cfg, o, log) == 0);
    const std::string js = slurp(out / "constants.json");
    CHECK(js.find("eps_star") != std::string::npos);
  }

  TEST_CASE("unknown subcommand") {
    std::ostringstream log;
    RunOptions o;
    o.out_dir = scratch("bad").string();
    CHECK_THROWS(run("frobnicate", parse_config("{}"), o, log));
  }
}
