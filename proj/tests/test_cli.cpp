#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fastwave/cli.hpp"
#include "fastwave/wav.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace fastwave;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("malformed arguments") {
  CHECK(run({}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  const Run r = run({"generate", "--config"});
  CHECK(r.code == 2);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(run({"compare", "--a", "x.wav"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("reduced config") {
  const ModelConfig r = reduced_config(ModelConfig{});
  CHECK(r.num_blocks == 2);
  CHECK(r.layers_per_block == 5);
  CHECK(r.channels == 8);
  ModelConfig tiny;
  tiny.num_blocks = 1;
  tiny.layers_per_block = 2;
  tiny.channels = 3;
  CHECK(reduced_config(tiny) == tiny);
}

TEST_CASE("verify passes") {
  oracle::TempDir dir;
  ModelConfig c;
  c.num_blocks = 1;
  c.layers_per_block = 3;
  c.channels = 4;
  save_config(dir / "c.json", c);
  const Run r = run({"verify", "--config", (dir / "c.json").string(), "--seed", "3"});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(run({"verify"}).code == 0);
}

TEST_CASE("generate, report and compare") {
  oracle::TempDir dir;
  ModelConfig c;
  c.num_blocks = 1;
  c.layers_per_block = 4;
  c.channels = 8;
  c.sample_rate = 8000;
  const auto cfg = (dir / "c.json").string();
  const auto w = (dir / "w.bin").string();
  save_config(cfg, c);
  REQUIRE(run({"init", "--config", cfg, "--seed", "7", "--out", w}).code == 0);

  const auto a = (dir / "a.wav").string();
  const auto b = (dir / "b.wav").string();
  const auto rep = (dir / "r.json").string();
  REQUIRE(run({"generate", "--config", cfg, "--weights", w, "--seconds", "0.05", "--out", a, "--report", rep}).code == 0);
  REQUIRE(run({"generate", "--config", cfg, "--weights", w, "--seconds", "0.05", "--out", b}).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(read_wav(a).samples.size() == 400);

  const auto j = nlohmann::json::parse(slurp(rep));
  CHECK(j["samples_generated"] == 400);
  CHECK(j["number_mode"] == "real");
  CHECK(j["throughput_hz"].get<double>() ==
        doctest::Approx(400 / j["wall_time"].get<double>()).epsilon(1e-12));
  CHECK(j["parallelism"].size() == 4);
  CHECK(j["parallelism"][0]["num_parallel_in"] == 1);
  CHECK(j["parallelism"][1]["num_parallel_out"] == 8);
  CHECK(j["weights_sha256"].get<std::string>().size() == 64);
  CHECK(j["config_sha256"].get<std::string>().size() == 64);

  const Run self = run({"compare", "--a", a, "--b", a, "--stft", "256,64"});
  CHECK(self.code == 0);
  CHECK(self.out.find("mse 0\n") != std::string::npos);
  CHECK(self.out.find("lsd 0\n") != std::string::npos);

  const auto f = (dir / "f.wav").string();
  REQUIRE(run({"generate", "--config", cfg, "--weights", w, "--seconds", "0.05", "--mode", "fixed<27,8>", "--out", f})
              .code == 0);
  CHECK(run({"compare", "--a", a, "--b", f, "--stft", "256,64", "--window", "rect"}).code == 0);
  CHECK(run({"compare", "--a", a, "--b", f, "--stft", "300,64"}).code == 1);
  CHECK(run({"compare", "--a", a, "--b", f, "--stft", "abc"}).code == 1);

  // Runtime failures exit 1 with a diagnostic.
  const Run missing = run({"generate", "--config", cfg, "--weights", (dir / "none.bin").string(), "--seconds", "1",
                           "--out", a});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("error") != std::string::npos);
  CHECK(run({"generate", "--config", cfg, "--weights", w, "--seconds", "1", "--mode", "fixed<99,8>", "--out", a}).code ==
        1);
}

TEST_CASE("number_mode from config") {
  oracle::TempDir dir;
  std::ofstream(dir / "c.json") << R"({"num_blocks":1,"layers_per_block":2,"channels":2,"number_mode":"fixed<20,6>"})";
  const auto cfg = (dir / "c.json").string();
  const auto w = (dir / "w.bin").string();
  REQUIRE(run({"init", "--config", cfg, "--out", w}).code == 0);
  REQUIRE(run({"generate", "--config", cfg, "--weights", w, "--seconds", "0.001", "--out",
               (dir / "a.wav").string(), "--report", (dir / "r.json").string()})
              .code == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "r.json"))["number_mode"] == "fixed<20,6>");
}

TEST_CASE("explore") {
  oracle::TempDir dir;
  save_config(dir / "c.json", ModelConfig{});
  const Run r = run({"explore", "--config", (dir / "c.json").string(), "--pout-list", "1,8", "--pin-list", "1,4"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("1,10,128,128,8,4,16384,560,1024,1120") != std::string::npos);
  CHECK(r.out.find("fc,fc,256,128,") != std::string::npos);
  std::size_t lines = 0;
  for (char ch : r.out) lines += ch == '\n';
  CHECK(lines == 1 + 29 * 4);
  CHECK(run({"explore", "--config", (dir / "c.json").string(), "--pin-list", "3"}).code == 1);

  CHECK(run({"explore", "--config", (dir / "c.json").string(), "--out", (dir / "e.csv").string()}).code == 0);
  CHECK(std::filesystem::file_size(dir / "e.csv") > 0);
}

}  // TEST_SUITE
