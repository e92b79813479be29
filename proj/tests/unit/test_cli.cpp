#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "fpk/cli.hpp"
#include "fpk/config.hpp"
#include "fpk/errors.hpp"

namespace fs = std::filesystem;
using namespace fpk;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("fpk_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name, const std::string& content) const {
    const fs::path p = dir / name;
    std::ofstream(p) << content;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

struct Run {
  int code;
  std::string out, err;
};

Run fpk_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("minimal config resolves with defaults") {
  const auto b = load_field(parse_json(R"({"dim": 2, "catalog": "bm"})"));
  CHECK(b.resolved.at("params").at("diffusion") == 1.0);
  CHECK(b.resolved.at("claimed").size() == 3);
  // The resolved form loads back to the same thing.
  CHECK(load_field(b.resolved).resolved == b.resolved);
}

TEST_CASE("config schema errors carry a JSON pointer") {
  auto pointer_of = [](const std::string& text) {
    try {
      load_field(parse_json(text));
    } catch (const ConfigError& e) {
      return e.pointer();
    }
    return std::string("<no error>");
  };
  CHECK(pointer_of(R"({"dim": 1, "catalog": "bm"})") == "/dim");
  CHECK(pointer_of(R"({"dim": 2, "dim": 3, "catalog": "bm"})") == "/dim");
  CHECK(pointer_of(R"({"dim": 2, "catalog": "ou", "params": {"rate": 1, "rate": 2}})") == "/params/rate");
  CHECK(pointer_of(R"({"dim": 2, "catalog": "bm", "colour": "red"})") == "/colour");
  CHECK(pointer_of(R"({"dim": 2, "A": {"a11": "1", "a21": "0", "a22": "x9"}, "G": ["0", "0"]})") == "/A/a22");
  CHECK(pointer_of(R"({"dim": 2, "catalog": "bm", "p": 1.5})") == "/p");
  CHECK_THROWS_AS(parse_json("{\"dim\": 2,"), ConfigError);
  CHECK_THROWS_AS(sim_config_from_json(parse_json(R"({"x0": [0, 0], "dt": 0})")), ConfigError);
  CHECK_THROWS_AS(sim_config_from_json(parse_json(R"({"T": 1})")), ConfigError);
}

TEST_CASE("exit codes") {
  Scratch s;
  const auto ou = s.file("ou.json", R"({"dim": 2, "catalog": "ou"})");
  const auto cubic = s.file("cubic.json", R"({"dim": 2, "catalog": "cubic_blowup"})");
  const auto one = s.file("one.json", R"({"dim": 1, "catalog": "bm"})");
  const auto dup = s.file("dup.json", R"({"dim": 2, "dim": 2, "catalog": "bm"})");

  CHECK(fpk_run({"check", "--config", ou, "--conditions", "h2", "--M", "1", "--N0", "2"}).code == cli::kExitPass);
  CHECK(fpk_run({"check", "--config", cubic, "--conditions", "h2"}).code == cli::kExitFail);

  const auto unknown = fpk_run({"frobnicate"});
  CHECK(unknown.code == cli::kExitUsage);
  CHECK(unknown.err.find("Usage") != std::string::npos);
  CHECK(fpk_run({}).code == cli::kExitUsage);
  CHECK(fpk_run({"check", "--config", one}).code == cli::kExitUsage);
  CHECK(fpk_run({"check", "--config", dup}).code == cli::kExitUsage);
  CHECK(fpk_run({"check", "--config", s.path("missing.json")}).code == cli::kExitUsage);
  CHECK(fpk_run({"check", "--config", ou, "--bogus"}).code == cli::kExitUsage);

  CHECK(fpk_run({"factor", "--config", ou, "--point", "1,0"}).code == cli::kExitPass);
  const auto indefinite = s.file("indef.json", R"({"dim": 2, "A": {"a11": "1", "a21": "2", "a22": "1"}, "G": ["0", "0"]})");
  CHECK(fpk_run({"factor", "--config", indefinite, "--point", "0,0"}).code == cli::kExitFail);
}

TEST_CASE("reports are JSON with per-test verdicts") {
  Scratch s;
  const auto ou = s.file("ou.json", R"({"dim": 2, "catalog": "ou"})");
  const auto simcfg = s.file("sim.json", R"({"x0": [1, 0], "T": 1, "dt": 0.01, "n_paths": 2000, "seed": 3})");
  const auto r = fpk_run({"verify", "--config", ou, "--sim", simcfg, "--tests", "fp,martingale"});
  CHECK(r.code == cli::kExitPass);
  const Json j = parse_json(r.out);
  CHECK(j.at("verdict") == "PASS");
  CHECK(j.at("verdicts").contains("fp"));
  CHECK(j.at("resolved").at("sim").at("seed") == 3);
}

TEST_CASE("manifest replay is byte-identical across thread counts") {
  Scratch s;
  const auto demo = s.file("demo.json", R"({"dim": 2, "catalog": "dim2_demo"})");
  const auto simcfg = s.file("sim.json", R"({"x0": [0.5, 0], "T": 0.5, "dt": 0.01, "n_paths": 999, "seed": 17})");
  REQUIRE(fpk_run({"simulate", "--config", demo, "--sim", simcfg, "--threads", "1", "--report", s.path("r1.json"),
                   "--out", s.path("p1.csv"), "--refine-levels", "3", "--manifest-out", s.path("m.json")})
              .code == cli::kExitPass);
  for (const char* threads : {"2", "5"}) {
    REQUIRE(fpk_run({"simulate", "--manifest", s.path("m.json"), "--threads", threads, "--report",
                     s.path("r2.json"), "--out", s.path("p2.csv")})
                .code == cli::kExitPass);
    CHECK(slurp(s.path("r1.json")) == slurp(s.path("r2.json")));
    CHECK(slurp(s.path("p1.csv")) == slurp(s.path("p2.csv")));
  }
  const Json m = load_json(s.path("m.json"));
  CHECK(m.at("seed") == 17);
  CHECK(m.at("outputs").at("particles") == s.path("p1.csv"));
  CHECK(fpk_run({"verify", "--manifest", s.path("m.json")}).code == cli::kExitUsage);
}
