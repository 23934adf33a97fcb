#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "openhall/cli.hpp"
#include "openhall/errors.hpp"
#include "openhall/run_config.hpp"

using namespace openhall;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "openhall");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const char* kRashba = R"(
model = "rashba_dresselhaus"
lambda = 23
beta = 10
h0 = 5
dissipator = "spin_lowering"
gamma = 0.1
)";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config parser") {
    const Config c = Config::parse("a = 1\n[t]\nb = \"x\" # c\nlist = [1, [2, 3],\n 4]\nflag = true\n");
    CHECK(c.number("a") == 1.0);
    CHECK(c.string("t.b") == "x");
    CHECK(c.boolean_or("t.flag", false));
    CHECK(c.keys_under("t").size() == 3);
    CHECK_THROWS_AS(Config::parse("a = \n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("a = 1\na = 2\n"), ConfigError);
    CHECK_THROWS_AS(c.number("t.b"), ConfigError);
  }

  TEST_CASE("model and dissipator from config") {
    const Config c = Config::parse(kRashba);
    const Model m = parse_model_config(c);
    CHECK(model_name(m) == "rashba_dresselhaus");
    CHECK(std::holds_alternative<SpinLowering>(parse_dissipator_config(c, 2).kind));
    Config bad = c;
    bad.erase("beta");
    CHECK_THROWS_WITH_AS(parse_model_config(bad), doctest::Contains("beta"), ConfigError);
    Config lifted = c;
    lifted.set("lift", Config::parse("v = \"spin_one\"").at("v"));
    CHECK(band_count(parse_model_config(lifted)) == 3);
    CHECK_THROWS_AS(parse_dissipator_config(c, 3), ConfigError);
  }

  TEST_CASE("sweep axes") {
    Config c = Config::parse(std::string(kRashba) + "[sweep]\nbeta = [10, 30, 5]\n");
    const auto axes = parse_sweep_config(c);
    REQUIRE(axes.size() == 1);
    CHECK(axes[0].values().back() == 30.0);
    CHECK(axes[0].values()[1] == 15.0);
    c = Config::parse(std::string(kRashba) + "[sweep]\nmass = [1, 2, 3]\n");
    CHECK_THROWS_AS(parse_sweep_config(c), ConfigError);
  }

  TEST_CASE("hall prints json with convergence metadata") {
    const Run r = run({"hall", "--set", "model=\"rashba_dresselhaus\"", "--set", "lambda=23", "--set", "beta=10",
                       "--set", "h0=5", "--set", "dissipator=\"spin_lowering\"", "--set", "gamma=0.1"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["sigma0"].get<double>() == doctest::Approx(0.34657359).epsilon(1e-6));
    CHECK(j["converged"].get<bool>());
    CHECK(j["method"] == "two_band_spin");
  }

  TEST_CASE("exit codes") {
    CHECK(run({"hall", "--config", "/nonexistent/run.toml"}).code == cli::kConfigFailure);
    CHECK(run({"hall", "--set", "model=\"nope\""}).code == cli::kConfigFailure);
    CHECK(run({"frobnicate"}).code == cli::kConfigFailure);
    CHECK(cli::exit_code_for(ConvergenceError("x")) == cli::kConvergenceFailure);
    CHECK(cli::exit_code_for(ResolutionError("x", 0.1)) == cli::kConvergenceFailure);
    CHECK(cli::exit_code_for(DegeneratePoint("x")) == cli::kValidationFailure);
  }

  TEST_CASE("convergence failure exits with 3") {
    const Run r = run({"hall", "--set", "model=\"rashba_dresselhaus\"", "--set", "lambda=23", "--set", "beta=23.0001",
                       "--set", "h0=5", "--set", "dissipator=\"spin_lowering\"", "--set", "gamma=0.1", "--set",
                       "grid.max_levels=2", "--set", "grid.tolerance=1e-9"});
    CHECK(r.code == cli::kConvergenceFailure);
    CHECK(r.err.find("no convergence") != std::string::npos);
  }

  TEST_CASE("validate passes and notices the s3 mutation") {
    CHECK(run({"validate", "--set", "validate.points=4"}).code == 0);
    const Run bad = run({"validate", "--set", "validate.points=4", "--set", "validate.flip_s3=true"});
    CHECK(bad.code == cli::kValidationFailure);
    CHECK(bad.out.find(",false,") != std::string::npos);
  }

  TEST_CASE("sweep rows come out in order") {
    const Run r = run({"sweep", "--threads", "3", "--set", "model=\"rashba_dresselhaus\"", "--set", "lambda=23",
                       "--set", "beta=10", "--set", "h0=5", "--set", "dissipator=\"spin_lowering\"", "--set",
                       "gamma=0.1", "--set", "sweep.beta=[10, 30, 3]"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(in, line))
      if (!line.empty() && line[0] != '#') rows.push_back(line);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].rfind("beta,sigma0", 0) == 0);
    CHECK(rows[1].rfind("10,", 0) == 0);
    CHECK(rows[3].rfind("30,", 0) == 0);
    CHECK(rows[3].find(",-1,") != std::string::npos);
  }
}
