#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "biopatch/cli.hpp"
#include "biopatch/evalkit.hpp"
#include "biopatch/io.hpp"
#include "reference.hpp"

using namespace biopatch;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

// Small population and one rephrasing per fact keep the corpus fast to build.
void small_corpus(const fs::path& root) {
  ASSERT_EQ(run({"gen-people", "--seed", "3", "--n", "300", "--out", (root / "people").string()}).code, 0);
  ASSERT_EQ(run({"build-corpus", "--people-dir", (root / "people").string(), "--known-count", "1",
                 "--aux-count", "1", "--test-counts", "1", "--out", (root / "corpus").string()})
                .code,
            0);
}

}  // namespace

TEST(Cli, GenPeopleOutputs) {
  ref::TempDir dir("cli-gen");
  const auto r = run({"gen-people", "--seed", "1", "--n", "30", "--out", dir.path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_jsonl(dir.path / "people.jsonl").size(), 30u);
  const auto pools = read_json(dir.path / "pools.json");
  EXPECT_EQ(pools["known"].size(), 10u);
  EXPECT_EQ(pools["unknown"].size(), 10u);
}

TEST(Cli, UsageAndIoErrors) {
  EXPECT_EQ(run({"gen-people", "--bogus", "1"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"--version"}).out, "1.0.0\n");
  ref::TempDir dir("cli-err");
  const auto r = run({"build-corpus", "--people-dir", (dir.path / "missing").string(), "--out",
                      (dir.path / "c").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("\"level\":\"error\""), std::string::npos);
  EXPECT_FALSE(fs::exists(dir.path / "c"));
}

TEST(Cli, BadVariantLeavesNoManifest) {
  ref::TempDir dir("cli-sched");
  small_corpus(dir.path);
  write(dir.path / "v.json", R"({"name":"bad","replaced":"B_QA","unknown_fraction":33})");
  const auto out = dir.path / "m.json";
  const auto r = run({"schedule", "--variant", (dir.path / "v.json").string(), "--corpus",
                      (dir.path / "corpus").string(), "--out", out.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(fs::exists(out));
  write(dir.path / "ok.json", R"({"name":"ok","replaced":"B_QA","unknown_fraction":100,"strategy":"RemoveKnown"})");
  const auto ok = run({"schedule", "--variant", (dir.path / "ok.json").string(), "--corpus",
                       (dir.path / "corpus").string(), "--out", out.string()});
  ASSERT_EQ(ok.code, 0) << ok.err;
  const auto m = read_json(out);
  EXPECT_EQ(m["entries"].size(), 3 * m["budget"].get<std::size_t>());
}

TEST(Cli, ConfigOverridesFlags) {
  ref::TempDir dir("cli-config");
  write(dir.path / "cfg.json", R"({"seed":9,"population":12,"paths":{"people":"out"}})");
  const auto r = run({"gen-people", "--seed", "1", "--n", "30", "--out", (dir.path / "ignored").string(),
                      "--config", (dir.path / "cfg.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(fs::exists(dir.path / "ignored"));
  EXPECT_EQ(read_jsonl(dir.path / "out" / "people.jsonl").size(), 12u);
  EXPECT_EQ(read_json(dir.path / "out" / "pools.json")["seed"], 9);
  write(dir.path / "bad.json", R"({"sed":9})");
  EXPECT_EQ(run({"gen-people", "--config", (dir.path / "bad.json").string()}).code, 1);
}

TEST(Cli, DeterministicCorpus) {
  ref::TempDir a("cli-det-a"), b("cli-det-b");
  small_corpus(a.path);
  small_corpus(b.path);
  for (const char* f : {"cpt.jsonl", "sft.jsonl", "test.jsonl", "splits.json"})
    EXPECT_EQ(digest_file(a.path / "corpus" / f), digest_file(b.path / "corpus" / f)) << f;
}

TEST(Cli, ReportFromScoreFiles) {
  ref::TempDir dir("cli-report");
  auto report = [&](const std::string& id, const char* replaced, std::array<double, 5> acc) {
    json j = {{"id", id}, {"per_test", json::object()}};
    const char* tests[] = {"B_QA", "D_QA", "M_QA", "U_QA", "wiki"};
    for (int i = 0; i < 5; ++i) j["per_test"][tests[i]] = acc[static_cast<std::size_t>(i)];
    if (replaced) j["variant"] = {{"name", id}, {"replaced", replaced}, {"unknown_fraction", 100}};
    write(dir.path / (id + ".json"), dump_pretty(j));
    return (dir.path / (id + ".json")).string();
  };
  const auto base = report("base", nullptr, {0.549, 0.609, 0.546, 0.464, 0.199});
  const std::vector<std::string> args = {
      "report", "--baseline", base, "--grouping", "qa", "--out", (dir.path / "out").string(), "--variants",
      report("b", "B_QA", {0.200, 0.591, 0.555, 0.466, 0.195}),
      report("d", "D_QA", {0.539, 0.225, 0.531, 0.464, 0.188}),
      report("m", "M_QA", {0.545, 0.596, 0.255, 0.456, 0.183}),
      report("u", "U_QA", {0.531, 0.606, 0.546, 0.252, 0.157})};
  const auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = read_json(dir.path / "out" / "report.json");
  EXPECT_EQ(j["groups"].size(), 3u);
  EXPECT_NEAR(j["groups"]["STQA"]["mean_delta_pct"].get<double>(), -56.40, 0.2);
  EXPECT_TRUE(fs::exists(dir.path / "out" / "report.csv"));
}

TEST(Cli, ScoreFromPredictions) {
  ref::TempDir dir("cli-score");
  small_corpus(dir.path);
  std::string preds;
  for (const auto& s : read_jsonl(dir.path / "corpus" / "test.jsonl"))
    preds += dump_compact({{"sample_id", s["id"]}, {"output", s["answer"]}}) + "\n";
  write(dir.path / "pred.jsonl", preds);
  const auto r = run({"score", "--test", (dir.path / "corpus").string(), "--pred", (dir.path / "pred.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  // QA outputs equal their gold; reasoning outputs lack the marker.
  EXPECT_DOUBLE_EQ(j["per_test"]["B_QA"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(j["per_test"]["B_SR"].get<double>(), 0.0);
}
