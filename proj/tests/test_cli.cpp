#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mvem/cli.hpp"
#include "mvem/config.hpp"
#include "mvem/io.hpp"

using namespace mvem;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("mvem_cli_" + std::string(::testing::UnitTest::GetInstance()
                                           ->current_test_info()
                                           ->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  std::string dir(const std::string& name) const { return (root_ / name).string(); }
  void write(const std::string& name, const std::string& text) const {
    std::ofstream(root_ / name) << text;
  }

  fs::path root_;
};

}  // namespace

TEST_F(CliTest, SimulateTwiceIsByteIdentical) {
  for (const char* out : {"a", "b"}) {
    const auto r = cli({"simulate", "--model", "linear_mf", "--N", "1024", "--M", "1024",
                        "--T", "1", "--seed", "7", "--record-stride", "64", "--out",
                        dir(out), "--binary"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(read_file(dir("a") + "/paths.csv"), read_file(dir("b") + "/paths.csv"));
  EXPECT_EQ(read_file(dir("a") + "/paths.bin"), read_file(dir("b") + "/paths.bin"));
  EXPECT_EQ(read_file(dir("a") + "/paths.bin").substr(0, 8), "MVEMPATH");
}

TEST_F(CliTest, YamadaCheck) {
  const auto r = cli({"yamada-check", "--gamma", "7.389", "--eps", "0.1", "--out", dir("y")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = read_file(dir("y") + "/results.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "x,v,v_prime,v_double_prime,lower_bound,upper_bound,curvature_bound");
  const auto summary = nlohmann::json::parse(read_file(dir("y") + "/summary.json"));
  EXPECT_EQ(summary["schema_version"], kSchemaVersion);
  EXPECT_TRUE(summary["result"]["pass"].get<bool>());
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  write("syntax.json", "{\n  \"seed\": 1,\n  \"sweep\": {\"M\": }\n}\n");
  auto r = cli({"simulate", "--config", dir("syntax.json"), "--out", dir("o")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;

  write("unknown.json", R"({"sweep": {"M": 1024, "bogus": 1}})");
  r = cli({"simulate", "--config", dir("unknown.json"), "--out", dir("o")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("sweep.bogus"), std::string::npos) << r.err;

  write("pow2.json", R"({"sweep": {"M": 1000}})");
  r = cli({"simulate", "--config", dir("pow2.json"), "--out", dir("o")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("sweep.M"), std::string::npos) << r.err;

  write("type.json", R"({"seed": "seven"})");
  r = cli({"simulate", "--config", dir("type.json"), "--out", dir("o")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("seed"), std::string::npos) << r.err;

  write("param.json", R"({"model": {"family": "linear_mf", "params": {"q": 1}}})");
  r = cli({"simulate", "--config", dir("param.json"), "--out", dir("o")});
  EXPECT_EQ(r.code, 2);

  EXPECT_EQ(cli({"simulate", "--M", "1000", "--out", dir("o")}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  EXPECT_EQ(cli({"simulate", "--config", dir("missing.json")}).code, 2);
  EXPECT_EQ(cli({"accept", "--budget", "huge", "--out", dir("o")}).code, 2);
}

TEST_F(CliTest, ConfigRoundTripReproducesResults) {
  auto r = cli({"sweep-dt", "--model", "holder_diffusion_1d", "--N", "64", "--M", "512",
                "--factors", "4,8,16", "--R", "2", "--seed", "11", "--out", dir("first")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto summary = nlohmann::json::parse(read_file(dir("first") + "/summary.json"));
  auto echoed = summary["config"];
  echoed["out"] = dir("second");
  write("echo.json", echoed.dump(2));
  r = cli({"sweep-dt", "--config", dir("echo.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file(dir("first") + "/results.csv"),
            read_file(dir("second") + "/results.csv"));
  const auto again = nlohmann::json::parse(read_file(dir("second") + "/summary.json"));
  EXPECT_EQ(again["result"]["aggregates"], summary["result"]["aggregates"]);
}

TEST_F(CliTest, EffectiveConfigIsAcceptedVerbatim) {
  RunConfig c;
  c.subcommand = "picard";
  c.params = {{"a", -2.0}};
  c.yamada.gamma = 3.0;
  c.sweep.n_extra = 7;
  const auto doc = config_to_json(c);
  const RunConfig back = config_from_json(doc);
  EXPECT_EQ(config_to_json(back), doc);
}

TEST_F(CliTest, SweepOutputsAndSvg) {
  const auto r = cli({"sweep-n", "--N-list", "16,32,64", "--M", "256", "--factor", "4",
                      "--factor-ref", "4", "--R", "2", "--out", dir("n")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string svg = read_file(dir("n") + "/chaos.svg");
  EXPECT_EQ(svg.find("<?xml"), 0u);
  EXPECT_NE(svg.find("slope"), std::string::npos);
  EXPECT_EQ(svg.find("href"), std::string::npos);
  const auto summary = nlohmann::json::parse(read_file(dir("n") + "/summary.json"));
  EXPECT_EQ(summary["config"]["sweep"]["n_extra"], nullptr);
  for (const auto& entry : fs::directory_iterator(dir("n"))) {
    const auto name = entry.path().filename().string();
    EXPECT_TRUE(name == "results.csv" || name == "summary.json" || name == "chaos.svg")
        << "unexpected file " << name;
  }
}

TEST_F(CliTest, OtherSubcommandsRun) {
  EXPECT_EQ(cli({"glivenko", "--N-list", "16,32,64", "--R", "4", "--initial", "uniform:0:1",
                 "--out", dir("g")})
                .code,
            0);
  EXPECT_EQ(cli({"glivenko", "--N-list", "16,32", "--R", "2", "--initial", "point:1",
                 "--out", dir("gp")})
                .code,
            0);
  EXPECT_EQ(cli({"picard", "--N", "128", "--M", "64", "--k-max", "4", "--out", dir("p")}).code,
            0);
  const auto v = cli({"validate-model", "--model", "bounded_holder_multid", "--param", "d=3",
                      "--n-pairs", "100", "--out", dir("v")});
  EXPECT_EQ(v.code, 0) << v.err;
  EXPECT_NE(read_file(dir("v") + "/results.csv").find("sigma_min_singular"), std::string::npos);
}

TEST_F(CliTest, AcceptQuickSubsetAndForcedFailure) {
  auto r = cli({"accept", "--budget", "quick", "--only", "9,10", "--out", dir("ok")});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  const auto summary = nlohmann::json::parse(read_file(dir("ok") + "/summary.json"));
  EXPECT_EQ(summary["schema_version"], kSchemaVersion);
  EXPECT_EQ(summary["result"]["criteria"].size(), 2u);
  EXPECT_TRUE(summary["result"]["pass"].get<bool>());

  r = cli({"accept", "--budget", "quick", "--only", "6", "--zero-tolerance", "6", "--out",
           dir("forced")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("[FAIL] 6 linear_gaussian_oracle"), std::string::npos) << r.out;
}

TEST_F(CliTest, HelpExitsZero) { EXPECT_EQ(cli({"--help"}).code, 0); }
