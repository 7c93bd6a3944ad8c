#include <gtest/gtest.h>

#include <fstream>
#include <functional>
#include <sstream>
#include <unistd.h>

#include "memcl/error.hpp"
#include "memcl/metrics.hpp"
#include "memcl/report.hpp"

using namespace memcl;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& tag) {
  auto p = fs::temp_directory_path() / ("memcl-report-" + std::to_string(::getpid()) + "-" + tag);
  fs::remove_all(p);
  return p;
}

RunConfig tiny_config() {
  RunConfig c;
  c.worlds = {WorldKind::cleanplace};
  c.conditions = {Condition::agg};
  c.representations = {Representation::raw, Representation::insight};
  c.train_n = 10;
  c.test_n = 8;
  c.runs = 1;
  c.workers = 2;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

ErrorCode code_of(const std::function<void()>& f, std::string* what = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (what) *what = e.what();
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::parse_error;
}

}  // namespace

TEST(LoadConfig, EmptyObjectGivesDefaults) {
  const auto c = load_config_text("{}");
  EXPECT_EQ(c.train_n, 200);
  EXPECT_EQ(c.test_n, 100);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.step_interval, 4);
  EXPECT_EQ(c.runs, 2);
  EXPECT_EQ(c.top_k.agg, 1u);
  EXPECT_EQ(c.top_k.ind, 3u);
  EXPECT_DOUBLE_EQ(c.bm25.k1, 1.2);
  EXPECT_DOUBLE_EQ(c.bm25.b, 0.75);
}

TEST(LoadConfig, Overrides) {
  EXPECT_EQ(load_config_text("{}", {"seed=7"}).seed, 7u);
  const auto c = load_config_text(R"({"train_n": 50})", {"top_k.ind=5", "world=gridfind"});
  EXPECT_EQ(c.train_n, 50);
  EXPECT_EQ(c.top_k.ind, 5u);
  EXPECT_EQ(c.worlds, std::vector<WorldKind>{WorldKind::gridfind});
  EXPECT_EQ(code_of([] { load_config_text("{}", {"seed"}); }), ErrorCode::validation_error);
}

TEST(LoadConfig, InvalidValuesNameTheField) {
  std::string what;
  EXPECT_EQ(code_of([] { load_config_text(R"({"step_interval": 0})"); }, &what),
            ErrorCode::validation_error);
  EXPECT_NE(what.find("step_interval"), std::string::npos);
  EXPECT_EQ(code_of([] { load_config_text("{}", {"step_interval=0"}); }),
            ErrorCode::validation_error);
  EXPECT_EQ(code_of([] { load_config_text(R"({"bm25": {"k3": 1}})"); }, &what),
            ErrorCode::validation_error);
  EXPECT_NE(what.find("bm25.k3"), std::string::npos);
  EXPECT_EQ(code_of([] { load_config_text("{not json"); }), ErrorCode::parse_error);
}

TEST(LoadConfig, ShippedDefaultConfigMatchesDefaults) {
  const auto c = load_config(fs::path(MEMCL_FIXTURE_DIR) / ".." / ".." / "configs" / "default.json");
  EXPECT_EQ(config_hash(c), config_hash(RunConfig{}));
}

class ReportTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    art_ = new RunArtifacts(run_matrix(tiny_config(), scratch_dir("suite")));
  }
  static void TearDownTestSuite() {
    fs::remove_all(art_->dir.parent_path().parent_path());
    delete art_;
  }
  // Fresh copy a test may damage.
  static fs::path copy_of(const std::string& tag) {
    const auto dst = scratch_dir(tag);
    fs::create_directories(dst);
    fs::copy(art_->dir, dst, fs::copy_options::recursive);
    return dst;
  }
  static RunArtifacts* art_;
};

RunArtifacts* ReportTest::art_ = nullptr;

TEST_F(ReportTest, EmitTwiceIdentical) {
  const auto loaded = load_artifacts(art_->dir);
  const auto a = scratch_dir("emit-a"), b = scratch_dir("emit-b");
  const auto names = emit_report(loaded, a);
  emit_report(loaded, b);
  ASSERT_EQ(names.size(), 8u);
  for (const auto& n : names) EXPECT_EQ(slurp(a / n), slurp(b / n)) << n;
  EXPECT_TRUE(compare_trees(a, b).pass);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_F(ReportTest, FwtTableLayout) {
  const auto csv = fwt_table_csv(compute_metrics(load_artifacts(art_->dir)));
  std::istringstream in(csv);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  // Header plus two sequences for each of the two arms.
  ASSERT_EQ(lines.size(), 1u + 2u * 2u);
  EXPECT_EQ(lines[0].rfind("env,cond_repr,sequence,", 0), 0u);
  EXPECT_NE(lines[1].find("A→B"), std::string::npos);
  EXPECT_NE(lines[2].find("B→A"), std::string::npos);
}

TEST_F(ReportTest, MissingProbeIsIncomplete) {
  // In memory: drop the probe phase from one cross run.
  auto loaded = load_artifacts(art_->dir);
  for (auto& run : loaded.runs)
    if (run.run_type == "cross_BA")
      std::erase_if(run.phases, [](const PhaseLog& p) { return p.name == "probe_B"; });
  std::string what;
  EXPECT_EQ(code_of([&] { compute_metrics(loaded); }, &what), ErrorCode::incomplete_artifacts);
  EXPECT_NE(what.find("probe:B→A"), std::string::npos) << what;

  // On disk: the loader reports the same label.
  const auto dir = copy_of("noprobe");
  fs::remove_all(dir / "cleanplace-raw-agg" / "rep0" / "cross_BA" / "probe_B");
  EXPECT_EQ(code_of([&] { load_artifacts(dir); }, &what), ErrorCode::incomplete_artifacts);
  EXPECT_NE(what.find("probe:B→A"), std::string::npos) << what;
  fs::remove_all(dir);
}

TEST_F(ReportTest, ReplayPassesUntouched) {
  const auto dir = copy_of("untouched");
  emit_report(load_artifacts(dir), dir / "report");
  const auto v = replay(dir, 2);
  EXPECT_TRUE(v.pass) << v.first_divergence;
  EXPECT_GT(v.files_compared, 50u);
  fs::remove_all(dir);
}

TEST_F(ReportTest, ReplayFailsAtFlippedOutcome) {
  const auto dir = copy_of("flipped");
  const auto target = dir / "cleanplace-insight-agg" / "rep0" / "scratch_B" / "eval_B" / "eval.json";
  auto text = slurp(target);
  const auto pos = text.find("\"success\"");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 9, "\"failure\"");
  spit(target, text);
  std::size_t line = 1;
  for (std::size_t i = 0; i < pos; ++i) line += text[i] == '\n';

  const auto v = replay(dir, 2);
  EXPECT_FALSE(v.pass);
  EXPECT_EQ(v.first_divergence, "cleanplace-insight-agg/rep0/scratch_B/eval_B/eval.json");
  EXPECT_EQ(v.line, line);
  EXPECT_NE(v.expected.find("failure"), std::string::npos);
  EXPECT_NE(v.actual.find("success"), std::string::npos);
  fs::remove_all(dir);
}

TEST_F(ReportTest, ReplayAfterPoolRestorePasses) {
  const auto dir = copy_of("restored");
  int pools = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.path().filename() != "pool.jsonl") continue;
    spit(e.path(), pool_snapshot(pool_restore(slurp(e.path()))));
    ++pools;
  }
  EXPECT_GT(pools, 0);
  EXPECT_TRUE(replay(dir, 1).pass);
  fs::remove_all(dir);
}

TEST_F(ReportTest, ReplayRejectsUnusableDirectory) {
  EXPECT_EQ(code_of([] { replay(scratch_dir("nothing-here")); }), ErrorCode::artifact_corrupt);
  const auto dir = copy_of("badconfig");
  spit(dir / "config.json", "{ broken");
  EXPECT_EQ(code_of([&] { replay(dir); }), ErrorCode::artifact_corrupt);
  fs::remove_all(dir);
}
