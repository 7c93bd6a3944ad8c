#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <unistd.h>

#include "memcl/error.hpp"
#include "memcl/protocol.hpp"
#include "memcl/report.hpp"

using namespace memcl;
namespace fs = std::filesystem;

namespace {

RunConfig small_config() {
  RunConfig c;
  c.worlds = {WorldKind::gridfind};
  c.conditions = {Condition::agg, Condition::ind};
  c.representations = {Representation::insight};
  c.train_n = 20;
  c.test_n = 12;
  c.runs = 2;
  c.workers = 2;
  return c;
}

fs::path scratch_dir(const std::string& tag) {
  auto p = fs::temp_directory_path() / ("memcl-proto-" + std::to_string(::getpid()) + "-" + tag);
  fs::remove_all(p);
  return p;
}

const RunArtifacts& small_run() {
  static const RunArtifacts art = run_matrix(small_config(), scratch_dir("shared"));
  return art;
}

}  // namespace

TEST(Config, DefaultArms) {
  RunConfig c;
  const auto arms = c.arms();
  ASSERT_EQ(arms.size(), 8u);
  std::set<std::string> names;
  for (const auto& a : arms) names.insert(a.name());
  EXPECT_TRUE(names.count("cleanplace-raw-agg"));
  EXPECT_TRUE(names.count("gridfind-insight-step"));
  EXPECT_FALSE(names.count("cleanplace-raw-ind"));
}

TEST(Config, ValidateNamesField) {
  RunConfig c;
  c.step_interval = 0;
  try {
    validate(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config_invalid);
    EXPECT_NE(std::string(e.what()).find("step_interval"), std::string::npos);
  }
  RunConfig d;
  d.representations = {Representation::raw};
  d.conditions = {Condition::ind};
  EXPECT_THROW(validate(d), Error);
  RunConfig e;
  e.abstractor = "llm";
  EXPECT_THROW(validate(e), Error);
}

TEST(Config, JsonRoundTrip) {
  RunConfig c = small_config();
  c.seed = 99;
  c.top_k.ind = 5;
  const auto back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
}

TEST(Config, HashIgnoresWorkers) {
  RunConfig a, b;
  b.workers = 1;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 43;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Config, UnknownAndMistypedKeys) {
  try {
    config_from_json(R"({"top_k": {"agg": 1, "bogus": 2}})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::validation_error);
    EXPECT_NE(std::string(e.what()).find("top_k.bogus"), std::string::npos);
  }
  EXPECT_THROW(config_from_json(R"({"train_n": "many"})"), Error);
  EXPECT_THROW(config_from_json(R"({"world": ["mars"]})"), Error);
  EXPECT_EQ(config_from_json(R"({"world": "gridfind"})").worlds,
            std::vector<WorldKind>{WorldKind::gridfind});
}

TEST(Matrix, EvaluationBlocksPerRep) {
  const auto& art = small_run();
  EXPECT_EQ(art.runs.size(), 2u * 2u * 6u);
  for (const auto& arm : art.config.arms()) {
    for (int r = 0; r < 2; ++r) {
      int evals = 0, probes = 0;
      for (const auto* rt : kRunTypes) {
        const auto* run = art.find(arm, r, rt);
        ASSERT_NE(run, nullptr) << arm.name() << " " << rt;
        for (const auto& p : run->phases) {
          evals += p.eval.has_value() && p.name.rfind("eval_", 0) == 0;
          probes += p.name.rfind("probe_", 0) == 0;
        }
      }
      // 2 baselines + 2 scratch + 2 cross-run later-task evaluations, plus
      // the earlier-task evaluation inside each cross run.
      EXPECT_EQ(evals, 8);
      EXPECT_EQ(probes, 2);
    }
  }
}

TEST(Matrix, CrossPoolHoldsBothPhases) {
  const auto& art = small_run();
  const auto arm = art.config.arms().front();
  const auto* run = art.find(arm, 0, "cross_AB");
  ASSERT_NE(run, nullptr);
  const auto pool = pool_restore([&] {
    std::ifstream in(art.dir / run->relative_dir() / "train_B" / "pool.jsonl");
    return std::string(std::istreambuf_iterator<char>(in), {});
  }());
  std::set<std::string> episodes;
  std::set<std::string> tasks;
  for (const auto& u : pool.units()) {
    episodes.insert(u.source_episode);
    tasks.insert(u.source_task);
  }
  EXPECT_EQ(episodes.size(), 2u * 20u);
  EXPECT_EQ(tasks, (std::set<std::string>{"A", "B"}));
}

TEST(Matrix, RerunIsByteIdenticalAcrossWorkerCounts) {
  auto c = small_config();
  c.workers = 1;
  const auto again = run_matrix(c, scratch_dir("rerun"));
  EXPECT_EQ(again.config_hash, small_run().config_hash);
  const auto v = compare_trees(small_run().dir, again.dir);
  EXPECT_TRUE(v.pass) << v.first_divergence << ":" << v.line;
  EXPECT_GT(v.files_compared, 100u);
}

TEST(Matrix, LoadArtifactsRoundTrip) {
  const auto& art = small_run();
  const auto loaded = load_artifacts(art.dir);
  ASSERT_EQ(loaded.runs.size(), art.runs.size());
  const auto arm = art.config.arms().back();
  const auto* a = art.find(arm, 1, "cross_BA");
  const auto* b = loaded.find(arm, 1, "cross_BA");
  ASSERT_TRUE(a && b);
  ASSERT_EQ(a->phases.size(), b->phases.size());
  for (std::size_t i = 0; i < a->phases.size(); ++i) {
    EXPECT_EQ(a->phases[i].name, b->phases[i].name);
    EXPECT_EQ(a->phases[i].retrievals.size(), b->phases[i].retrievals.size());
    if (a->phases[i].eval) EXPECT_EQ(a->phases[i].eval->outcomes, b->phases[i].eval->outcomes);
  }
}

TEST(Matrix, MissingPhaseIsIncomplete) {
  auto c = small_config();
  c.runs = 1;
  c.conditions = {Condition::ind};
  const auto art = run_matrix(c, scratch_dir("incomplete"));
  fs::remove_all(art.dir / "gridfind-insight-ind" / "rep0" / "cross_BA" / "probe_B");
  try {
    load_artifacts(art.dir);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::incomplete_artifacts);
  }
}

TEST(Probe, EmptyPoolEqualsBaseline) {
  const auto tests = generate_tasks(WorldKind::cleanplace, Family::B, 30, 42);
  RunConfig c;
  const auto params = c.episode_params(Condition::ind);
  const auto probe = eval_probe(new_pool(Condition::ind, Representation::insight), tests,
                                Condition::ind, params, 42);
  for (std::size_t i = 0; i < tests.size(); ++i) {
    const auto base = run_episode(tests[i], std::nullopt, Condition::ind, params, 42);
    EXPECT_EQ(probe.outcomes[i].outcome, base.outcome) << tests[i].id;
  }
}

TEST(Probe, ReadOnlyAndRepeatable) {
  auto pool = new_pool(Condition::ind, Representation::insight);
  pool.insert_episode("find the red ball",
                      std::vector<Insight>{{"Scan each room systematically before moving on.",
                                            "when the goal is out of view"}},
                      {"B", "e", Outcome::success});
  const auto before = pool_snapshot(pool);
  const auto tests = generate_tasks(WorldKind::gridfind, Family::B, 30, 42);
  RunConfig c;
  const auto a = eval_probe(pool, tests, Condition::ind, c.episode_params(Condition::ind), 42);
  const auto b = eval_probe(pool, tests, Condition::ind, c.episode_params(Condition::ind), 42);
  EXPECT_EQ(pool_snapshot(pool), before);
  EXPECT_EQ(a.outcomes, b.outcomes);
  for (std::size_t i = 0; i < a.episodes.size(); ++i) EXPECT_EQ(a.episodes[i], b.episodes[i]);
}
