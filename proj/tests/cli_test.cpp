#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "radtrack/io.hpp"

namespace radtrack::cli {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "radtrack");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("radtrack_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

  fs::path dir_;
};

TEST_F(CliTest, SimulateWritesReplayAndGroundTruth) {
  const auto r = run_cli({"simulate", "--crossing", "10", "--seed", "3", "--out", path("a")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(path("a.replay.jsonl")), 40u);
  EXPECT_EQ(line_count(path("a.gt.jsonl")), 40u);
}

TEST_F(CliTest, SimulateIsByteIdenticalForSameSeed) {
  write("scn.json", R"({"seed": 9, "crossing": {"depth_gap": 10}})");
  ASSERT_EQ(run_cli({"simulate", "--config", path("scn.json"), "--out", path("a")}).code, 0);
  ASSERT_EQ(run_cli({"simulate", "--config", path("scn.json"), "--out", path("b")}).code, 0);
  EXPECT_EQ(slurp(path("a.replay.jsonl")), slurp(path("b.replay.jsonl")));
  EXPECT_EQ(slurp(path("a.gt.jsonl")), slurp(path("b.gt.jsonl")));
}

TEST_F(CliTest, MalformedConfigLeavesNoOutput) {
  write("bad.json", R"({"seed": 1, "objects": [{"class": 0}]})");
  const auto r = run_cli({"simulate", "--config", path("bad.json"), "--out", path("x")});
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(r.err.empty());
  write("broken.json", "{ not json");
  EXPECT_NE(run_cli({"simulate", "--config", path("broken.json"), "--out", path("x")}).code, 0);
  for (const auto& e : fs::directory_iterator(dir_)) EXPECT_EQ(e.path().extension(), ".json") << e.path();
}

TEST_F(CliTest, ConfigDirectoryFromEnvironment) {
  write("scn.json", R"({"seed": 2, "crossing": {"depth_gap": 5}, "num_frames": 7})");
  ::setenv(kConfigDirEnv, dir_.c_str(), 1);
  const auto r = run_cli({"simulate", "--config", "scn.json", "--out", path("e")});
  ::unsetenv(kConfigDirEnv);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(path("e.replay.jsonl")), 7u);
}

TEST_F(CliTest, NoiselessSingleObjectKeepsOneId) {
  write("one.json", R"({"seed": 1, "objects": [{"class": 0, "position": [20, 3, 1], "velocity": [0, -1]}],
                        "radar": {"points_per_object": 2}})");
  ASSERT_EQ(run_cli({"simulate", "--config", path("one.json"), "--out", path("s")}).code, 0);
  const auto r = run_cli({"track", "--replay", path("s.replay.jsonl"), "--out", path("res.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("median_ms="), std::string::npos);
  EXPECT_NE(r.err.find("p99_ms="), std::string::npos);
  const auto res = io::read_results_file(path("res.jsonl"));
  ASSERT_EQ(res.size(), 40u);
  for (const auto& f : res) {
    ASSERT_EQ(f.tracks.size(), 1u);
    EXPECT_EQ(f.tracks[0].id, 1u);
    EXPECT_TRUE(f.tracks[0].fused);
  }
  const auto e = run_cli({"evaluate", "--results", path("res.jsonl"), "--gt", path("s.gt.jsonl")});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NE(e.out.find("overall"), std::string::npos);
  EXPECT_NE(e.out.find("1.000"), std::string::npos);
}

TEST_F(CliTest, PixelOnlyFlagsMatchConfigFile) {
  ASSERT_EQ(run_cli({"simulate", "--crossing", "10", "--seed", "5", "--out", path("c")}).code, 0);
  ASSERT_EQ(run_cli({"track", "--replay", path("c.replay.jsonl"), "--out", path("f.jsonl"), "--beta", "0",
                     "--delta", "0"})
                .code,
            0);
  write("pix.json", R"({"beta": 0, "delta": 0})");
  ASSERT_EQ(run_cli({"track", "--replay", path("c.replay.jsonl"), "--out", path("g.jsonl"), "--config",
                     path("pix.json")})
                .code,
            0);
  EXPECT_EQ(slurp(path("f.jsonl")), slurp(path("g.jsonl")));
  ASSERT_EQ(run_cli({"track", "--replay", path("c.replay.jsonl"), "--out", path("h.jsonl")}).code, 0);
  EXPECT_NE(slurp(path("f.jsonl")), slurp(path("h.jsonl")));
}

TEST_F(CliTest, EmptyReplayGivesEmptyResults) {
  write("empty.jsonl", "");
  const auto r = run_cli({"track", "--replay", path("empty.jsonl"), "--out", path("out.jsonl")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(path("out.jsonl")));
  EXPECT_EQ(fs::file_size(path("out.jsonl")), 0u);
}

TEST_F(CliTest, TrackParseFailureNamesLine) {
  write("bad.jsonl", "{\"frame_index\":0,\"detections\":[],\"radar\":[]}\n{oops\n");
  const auto r = run_cli({"track", "--replay", path("bad.jsonl"), "--out", path("out.jsonl")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(path("out.jsonl")));
}

TEST_F(CliTest, EvaluateClassFilterAndMisalignment) {
  write("gt.jsonl",
        "{\"frame_index\":0,\"objects\":[{\"id\":1,\"x\":10,\"y\":0,\"class\":0},{\"id\":2,\"x\":20,\"y\":0,\"class\":4},"
        "{\"id\":3,\"x\":30,\"y\":0,\"class\":1}]}\n");
  write("res.jsonl",
        "{\"frame_index\":0,\"tracks\":[{\"id\":1,\"u\":0,\"v\":0,\"depth\":1,\"class\":0,\"confidence\":1,\"x\":10,\"y\":0},"
        "{\"id\":2,\"u\":0,\"v\":0,\"depth\":1,\"class\":4,\"confidence\":1,\"x\":20,\"y\":0},"
        "{\"id\":3,\"u\":0,\"v\":0,\"depth\":1,\"class\":1,\"confidence\":1,\"x\":30,\"y\":0}]}\n");
  auto r = run_cli({"evaluate", "--results", path("res.jsonl"), "--gt", path("gt.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("truck"), std::string::npos);
  r = run_cli({"evaluate", "--results", path("res.jsonl"), "--gt", path("gt.jsonl"), "--classes", "car,pedestrian",
               "--json", path("rep.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("car"), std::string::npos);
  EXPECT_NE(r.out.find("pedestrian"), std::string::npos);
  EXPECT_EQ(r.out.find("truck"), std::string::npos);
  const auto rep = io::read_json_file(path("rep.json"));
  EXPECT_EQ(rep["classes"].size(), 2u);
  EXPECT_EQ(rep["overall"]["amota"], 1.0);

  write("gt2.jsonl", "{\"frame_index\":0,\"objects\":[]}\n{\"frame_index\":1,\"objects\":[]}\n");
  write("res2.jsonl", "{\"frame_index\":0,\"tracks\":[]}\n{\"frame_index\":5,\"tracks\":[]}\n");
  r = run_cli({"evaluate", "--results", path("res2.jsonl"), "--gt", path("gt2.jsonl")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("5"), std::string::npos) << r.err;
  EXPECT_NE(run_cli({"evaluate", "--results", path("res.jsonl"), "--gt", path("gt.jsonl"), "--classes", "blimp"}).code, 0);
}

TEST_F(CliTest, SweepSingleRowMatchesEvaluate) {
  ASSERT_EQ(run_cli({"simulate", "--crossing", "10", "--seed", "2", "--out", path("c")}).code, 0);
  const auto sw = run_cli({"sweep", "--replay", path("c.replay.jsonl"), "--gt", path("c.gt.jsonl"), "--out",
                           path("sw.jsonl")});
  ASSERT_EQ(sw.code, 0) << sw.err;
  ASSERT_EQ(line_count(path("sw.jsonl")), 1u);
  ASSERT_EQ(run_cli({"track", "--replay", path("c.replay.jsonl"), "--out", path("r.jsonl")}).code, 0);
  ASSERT_EQ(run_cli({"evaluate", "--results", path("r.jsonl"), "--gt", path("c.gt.jsonl"), "--json", path("e.json")})
                .code,
            0);
  const auto row = io::json::parse(slurp(path("sw.jsonl")));
  const auto ev = io::read_json_file(path("e.json"));
  EXPECT_EQ(row["amota"], ev["overall"]["amota"]);
  EXPECT_EQ(row["ids"], ev["overall"]["ids"]);
  EXPECT_GE(row["cost_gap"].get<double>(), -1e-9);
}

TEST_F(CliTest, SweepDeduplicatesAndRanksDepthWeightsFirst) {
  ASSERT_EQ(run_cli({"simulate", "--crossing", "10", "--seed", "6", "--out", path("c")}).code, 0);
  const auto sw = run_cli({"sweep", "--replay", path("c.replay.jsonl"), "--gt", path("c.gt.jsonl"), "--beta",
                           "0,0.04,0.04", "--delta", "0,0.25", "--threads", "2", "--out", path("sw.jsonl")});
  ASSERT_EQ(sw.code, 0) << sw.err;
  EXPECT_EQ(line_count(path("sw.jsonl")), 4u);
  std::ifstream in(path("sw.jsonl"));
  std::vector<io::json> rows;
  for (std::string line; std::getline(in, line);) rows.push_back(io::json::parse(line));
  double best_beta0 = 0.0, worst_beta = 1.0;
  for (const auto& r : rows) {
    const double a = r["amota"].get<double>();
    if (r["beta"].get<double>() > 0) worst_beta = std::min(worst_beta, a);
    else best_beta0 = std::max(best_beta0, a);
  }
  EXPECT_GE(worst_beta, best_beta0);
  EXPECT_EQ(rows.back()["beta"].get<double>(), 0.0);
  EXPECT_EQ(rows.back()["delta"].get<double>(), 0.0);
  EXPECT_LT(rows.back()["amota"].get<double>(), rows.front()["amota"].get<double>());
  const auto again = run_cli({"sweep", "--replay", path("c.replay.jsonl"), "--gt", path("c.gt.jsonl"), "--beta",
                              "0,0.04", "--delta", "0,0.25", "--threads", "1"});
  EXPECT_EQ(again.out, sw.out);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(run_cli({"track", "--replay", "x"}).code, 2);
  EXPECT_EQ(run_cli({"simulate", "--out", path("z")}).code, 1);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

}  // namespace
}  // namespace radtrack::cli
