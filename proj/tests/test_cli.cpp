#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "pcmsel/cli.hpp"

using namespace pcmsel;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "pcmsel");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliZoo : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testutil::TempDir("cli_zoo");
    const auto r = invoke({"gen-synthetic", "--out-dir", dir_->path().string(), "--models", "12", "--samples", "300",
                           "--classes", "3", "--dim", "6", "--seed", "7"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() { delete dir_; }
  static std::string manifest() { return (dir_->path() / "manifest.json").string(); }
  static std::string truth() { return (dir_->path() / "truth.json").string(); }
  static std::string path(const std::string& name) { return (dir_->path() / name).string(); }
  static testutil::TempDir* dir_;
};

testutil::TempDir* CliZoo::dir_ = nullptr;

}  // namespace

TEST(Cli, NoCommandIsUsageError) { EXPECT_EQ(invoke({}).code, 2); }

TEST(Cli, HelpExitsZero) { EXPECT_EQ(invoke({"--help"}).code, 0); }

TEST(Cli, MissingManifestIsDataError) {
  const auto r = invoke({"score", "--manifest", "/nonexistent/manifest.json"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("/nonexistent/manifest.json"), std::string::npos);
}

TEST(Cli, BadFormatIsUsageError) {
  EXPECT_EQ(invoke({"score", "--manifest", "m.json", "--format", "xml"}).code, 2);
}

TEST_F(CliZoo, DefaultScoreReportsAllNineMethods) {
  const auto r = invoke({"score", "--manifest", manifest(), "--probe-size", "150", "--repeats", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["schema_version"], 1);
  EXPECT_EQ(doc["kind"], "selection_run");
  EXPECT_EQ(doc["methods"].size(), 9u);
  EXPECT_EQ(doc["method_order"], nlohmann::json(all_method_ids()));
  EXPECT_EQ(doc["config"]["probe_size"], 150);
  for (const auto& [id, m] : doc["methods"].items()) {
    EXPECT_EQ(m["ranking"].size(), 12u) << id;
    EXPECT_EQ(m["scores"].size(), 12u) << id;
  }
}

TEST_F(CliZoo, SingleMethodAndDeterministicReports) {
  const std::vector<std::string> args = {"score", "--manifest", manifest(), "--methods", "hscore", "--probe-size",
                                         "100", "--repeats", "3"};
  const auto a = invoke(args);
  const auto b = invoke(args);
  ASSERT_EQ(a.code, 0) << a.err;
  auto da = nlohmann::json::parse(a.out);
  auto db = nlohmann::json::parse(b.out);
  EXPECT_EQ(da["methods"].size(), 1u);
  // Reports match apart from timing fields.
  for (auto* d : {&da, &db}) {
    (*d)["methods"]["hscore"]["seconds"] = 0;
    for (auto& s : (*d)["methods"]["hscore"]["scores"]) s["seconds"] = 0;
  }
  EXPECT_EQ(da, db);
}

TEST_F(CliZoo, UnknownMethodListsValidIds) {
  const auto r = invoke({"score", "--manifest", manifest(), "--methods", "hscore,logme"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("knn1"), std::string::npos);
  EXPECT_NE(r.err.find("data"), std::string::npos);
}

TEST_F(CliZoo, ProbeLargerThanDataFails) {
  EXPECT_EQ(invoke({"score", "--manifest", manifest(), "--probe-size", "301"}).code, 3);
}

TEST_F(CliZoo, ScoreThenEvaluateTable) {
  const auto report = path("run.json");
  ASSERT_EQ(invoke({"score", "--manifest", manifest(), "--probe-size", "150", "--repeats", "1", "--out", report}).code, 0);
  EXPECT_TRUE(std::filesystem::exists(report));
  const auto r = invoke({"evaluate", "--run", report, "--truth", truth(), "--k", "1,5,10", "--format", "table"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* s : {"NDCG@1", "NDCG@5", "NDCG@10", "Rel@10", "hscore", "size", "Proxy-based (mean)",
                        "Distribution-based (best)"})
    EXPECT_NE(r.out.find(s), std::string::npos) << s;
  const auto json = nlohmann::json::parse(invoke({"evaluate", "--run", report, "--truth", truth()}).out);
  EXPECT_EQ(json["k"], nlohmann::json({1, 5, 10}));
  EXPECT_TRUE(json["groups"].contains("Proxy-based (best)"));
}

TEST_F(CliZoo, EvaluateMissingTruthEntryNamesModel) {
  const auto report = path("run_missing.json");
  ASSERT_EQ(invoke({"score", "--manifest", manifest(), "--methods", "size", "--out", report}).code, 0);
  auto t = load_truth(truth());
  t.entries.erase("synth-004");
  save_truth(t, path("partial_truth.json"));
  const auto r = invoke({"evaluate", "--run", report, "--truth", path("partial_truth.json")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("synth-004"), std::string::npos);
}

// Scores equal to the truth table rank perfectly.
TEST_F(CliZoo, PerfectScoresGiveAllOnes) {
  const auto t = load_truth(truth());
  const auto m = load_manifest(manifest());
  SelectionRun run;
  run.task_id = m.task_id;
  run.methods = {"perfect"};
  MethodResult mr;
  for (const auto& rec : m.models) {
    const double v = t.accuracy(rec.model_id);
    mr.scores.push_back({rec.model_id, "perfect", v, {v}, 0.0, 0});
  }
  mr.ranking = rank_models(mr.scores, m, m.size());
  run.per_method["perfect"] = mr;
  write_file_atomic(path("perfect.json"), run_to_json(run).dump());
  const auto r = invoke({"evaluate", "--run", path("perfect.json"), "--truth", truth()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  for (const auto& [k, v] : doc["methods"]["perfect"]["ndcg"].items()) EXPECT_DOUBLE_EQ(v.get<double>(), 1.0);
  for (const auto& [k, v] : doc["methods"]["perfect"]["rel"].items()) EXPECT_DOUBLE_EQ(v.get<double>(), 1.0);
}

TEST_F(CliZoo, SweepBudgetSingleSizeMatchesScoreAndEvaluate) {
  const auto sweep = invoke({"sweep-budget", "--manifest", manifest(), "--truth", truth(), "--methods", "knn1,hscore",
                             "--probe-sizes", "120", "--repeats", "2"});
  ASSERT_EQ(sweep.code, 0) << sweep.err;
  const auto doc = nlohmann::json::parse(sweep.out);
  EXPECT_EQ(doc["kind"], "budget_sweep");
  ASSERT_EQ(doc["grid"].size(), 1u);

  const auto report = path("run_120.json");
  ASSERT_EQ(invoke({"score", "--manifest", manifest(), "--methods", "knn1,hscore", "--probe-size", "120",
                    "--repeats", "2", "--out", report})
                .code,
            0);
  const auto eval = nlohmann::json::parse(invoke({"evaluate", "--run", report, "--truth", truth(), "--k", "5"}).out);
  for (const char* m : {"knn1", "hscore"}) {
    EXPECT_EQ(doc["grid"][0]["methods"][m]["ndcg"]["5"], eval["methods"][m]["ndcg"]["5"]);
    EXPECT_EQ(doc["grid"][0]["methods"][m]["rel"]["5"], eval["methods"][m]["rel"]["5"]);
    EXPECT_GE(doc["grid"][0]["methods"][m]["seconds"].get<double>(), 0.0);
  }
}

TEST_F(CliZoo, SweepBudgetGridAndOversize) {
  const auto r = invoke({"sweep-budget", "--manifest", manifest(), "--truth", truth(), "--methods", "parc",
                         "--probe-sizes", "60,120,240", "--repeats", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["grid"].size(), 3u);
  EXPECT_NE(invoke({"sweep-budget", "--manifest", manifest(), "--truth", truth(), "--probe-sizes", "100,5000"}).code,
            0);
  EXPECT_EQ(invoke({"sweep-budget", "--manifest", manifest(), "--truth", truth(), "--probe-sizes", "10,x"}).code, 2);
}

TEST_F(CliZoo, SweepZooBlocks) {
  const auto r = invoke({"sweep-zoo", "--manifest", manifest(), "--truth", truth(), "--methods", "linear,size",
                         "--zoo-sizes", "10,12", "--probe-size", "150", "--repeats", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["kind"], "zoo_sweep");
  ASSERT_EQ(doc["blocks"].size(), 2u);
  EXPECT_EQ(doc["blocks"][0]["zoo_size"], 10);
  EXPECT_EQ(doc["blocks"][1]["k"], nlohmann::json({1, 5, 10}));
  EXPECT_EQ(invoke({"sweep-zoo", "--manifest", manifest(), "--truth", truth(), "--zoo-sizes", "10,30"}).code, 2);
}

TEST(Cli, GenSyntheticRejectsBadSpec) {
  testutil::TempDir dir("cli_bad_spec");
  EXPECT_EQ(invoke({"gen-synthetic", "--out-dir", dir.path().string(), "--models", "1"}).code, 2);
  EXPECT_EQ(invoke({"gen-synthetic", "--out-dir", dir.path().string(), "--metadata", "sideways"}).code, 2);
}
