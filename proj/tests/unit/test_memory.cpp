#include <gtest/gtest.h>

#include <random>

#include "memcl/error.hpp"
#include "memcl/memory.hpp"

using namespace memcl;

namespace {

std::vector<Insight> three_insights() {
  return {{"Search receptacles one by one.", "when the mug is not visible"},
          {"Clean it at the sinkbasin.", "after picking up a mug"},
          {"Carry it straight to the fridge.", "when holding the mug"}};
}

Provenance prov(std::string task = "A", std::string ep = "e0") {
  return {std::move(task), std::move(ep), Outcome::success};
}

}  // namespace

TEST(Pool, NewPoolIsEmpty) {
  for (auto c : {Condition::agg, Condition::ind, Condition::step}) {
    auto p = new_pool(c, Representation::insight);
    EXPECT_TRUE(p.empty());
    EXPECT_EQ(p.condition(), c);
  }
}

TEST(Pool, RawPoolRejectsInsights) {
  auto p = new_pool(Condition::agg, Representation::raw);
  auto r = p.insert_episode("put a mug in fridge", three_insights(), prov());
  EXPECT_EQ(r.status, InsertStatus::empty_payload);
  EXPECT_TRUE(p.empty());

  MemoryUnit u{"u000001", "k", "v", UnitKind::insight_bundle, "A", "e", 1, Outcome::success};
  EXPECT_THROW(p.append_unit(u), Error);
  u.kind = UnitKind::raw_trajectory;
  p.append_unit(u);
  EXPECT_EQ(p.size(), 1u);
}

TEST(Pool, AggBundlesInsightsIntoOneUnit) {
  auto p = new_pool(Condition::agg, Representation::insight);
  auto r = p.insert_episode("put a clean mug in fridge", three_insights(), prov());
  ASSERT_EQ(r.status, InsertStatus::ok);
  ASSERT_EQ(p.size(), 1u);
  const auto& u = p.units()[0];
  EXPECT_EQ(u.kind, UnitKind::insight_bundle);
  EXPECT_EQ(u.key_text, "put a clean mug in fridge");
  EXPECT_EQ(split_bundle(u.value_text).size(), 3u);
}

TEST(Pool, IndStoresOneUnitPerInsight) {
  for (auto c : {Condition::ind, Condition::step}) {
    auto p = new_pool(c, Representation::insight);
    auto r = p.insert_episode("put a clean mug in fridge", three_insights(), prov());
    ASSERT_EQ(r.ids.size(), 3u);
    ASSERT_EQ(p.size(), 3u);
    EXPECT_EQ(p.units()[1].key_text, "after picking up a mug");
    EXPECT_EQ(p.units()[1].value_text, "Clean it at the sinkbasin.");
    EXPECT_EQ(p.units()[2].insert_seq, 3u);
  }
}

TEST(Pool, EmptyInsightListSignalsEmptyPayload) {
  auto p = new_pool(Condition::ind, Representation::insight);
  auto r = p.insert_episode("x", std::vector<Insight>{}, prov());
  EXPECT_EQ(r.status, InsertStatus::empty_payload);
  EXPECT_TRUE(r.ids.empty());
  EXPECT_TRUE(p.empty());
}

TEST(Pool, IdsAreSequentialAndFindable) {
  auto p = new_pool(Condition::ind, Representation::insight);
  p.insert_episode("a", three_insights(), prov());
  p.insert_episode("b", three_insights(), prov("B", "e1"));
  EXPECT_EQ(p.units().back().id, "u000006");
  ASSERT_NE(p.find("u000004"), nullptr);
  EXPECT_EQ(p.find("u000004")->source_task, "B");
  EXPECT_EQ(p.find("u999999"), nullptr);
}

TEST(Pool, AppendRejectsBrokenInvariants) {
  auto p = new_pool(Condition::ind, Representation::insight);
  MemoryUnit u{"u000002", "k", "v", UnitKind::insight_single, "A", "e", 2, Outcome::success};
  p.append_unit(u);
  auto dup = u;
  dup.insert_seq = 3;
  EXPECT_THROW(p.append_unit(dup), Error);
  auto old = u;
  old.id = "u000001";
  old.insert_seq = 1;
  EXPECT_THROW(p.append_unit(old), Error);
  auto empty = u;
  empty.id = "u000009";
  empty.insert_seq = 9;
  empty.value_text.clear();
  EXPECT_THROW(p.append_unit(empty), Error);
}

TEST(Snapshot, EmptyPoolIsHeaderOnly) {
  auto text = pool_snapshot(new_pool(Condition::agg, Representation::raw));
  EXPECT_EQ(text, "{\"condition\":\"agg\",\"representation\":\"raw\",\"unit_count\":0}\n");
}

TEST(Snapshot, UnitsInInsertionOrder) {
  auto p = new_pool(Condition::ind, Representation::insight);
  p.insert_episode("a", three_insights(), prov());
  auto text = pool_snapshot(p);
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_NE(lines[1].find("u000001"), std::string::npos);
  EXPECT_NE(lines[3].find("u000003"), std::string::npos);
}

TEST(Snapshot, RandomizedRoundTripIsByteIdentical) {
  std::mt19937_64 rng(1234);
  const char* words[] = {"mug", "clean", "the", "fridge", "door", "\"quoted\"", "tab\there",
                         "ünïcode", "scan", "key"};
  auto phrase = [&](int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += std::string(i ? " " : "") + words[rng() % 10];
    return s;
  };
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = static_cast<Condition>(rng() % 3);
    const auto r = (rng() % 2 || c != Condition::agg) ? Representation::insight
                                                      : Representation::raw;
    auto p = new_pool(c, r);
    const int episodes = static_cast<int>(rng() % 8);
    for (int e = 0; e < episodes; ++e) {
      Provenance pv{rng() % 2 ? "A" : "B", "ep" + std::to_string(e),
                    rng() % 2 ? Outcome::success : Outcome::failure};
      if (r == Representation::raw) {
        p.insert_episode(phrase(4), RawPayload{phrase(3), phrase(6) + "\n" + phrase(5)}, pv);
      } else {
        std::vector<Insight> ins;
        for (int i = 0, n = 1 + static_cast<int>(rng() % 4); i < n; ++i)
          ins.push_back({phrase(5), phrase(3)});
        p.insert_episode(phrase(4), ins, pv);
      }
    }
    const auto first = pool_snapshot(p);
    const auto restored = pool_restore(first);
    EXPECT_EQ(restored, p);
    EXPECT_EQ(pool_snapshot(restored), first);
  }
}

TEST(Snapshot, RestoreRejectsCountMismatch) {
  auto p = new_pool(Condition::ind, Representation::insight);
  p.insert_episode("a", three_insights(), prov());
  auto text = pool_snapshot(p);
  text.replace(text.find("\"unit_count\":3"), 14, "\"unit_count\":4");
  EXPECT_THROW(pool_restore(text), Error);
  EXPECT_THROW(pool_restore(""), Error);
}

TEST(Bundle, SplitInvertsRender) {
  auto ins = three_insights();
  auto parts = split_bundle(render_bundle(ins));
  ASSERT_EQ(parts.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(parts[i], ins[i].body);
}
