#include <gtest/gtest.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <set>

#include "memcl/error.hpp"
#include "memcl/retrieval.hpp"

using namespace memcl;

namespace {

// Independent scorer: re-tokenizes every key and recomputes corpus stats from
// scratch for each query, no index involved.
std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char ch : s) {
    if (std::isalnum(ch)) {
      cur += static_cast<char>(std::tolower(ch));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::pair<std::size_t, double>> brute_force(const ExperiencePool& pool,
                                                        const std::string& query, std::size_t k,
                                                        double k1, double b) {
  std::vector<std::vector<std::string>> docs;
  for (const auto& u : pool.units()) docs.push_back(split_words(u.key_text));
  const double n = static_cast<double>(docs.size());
  double avg = 0;
  for (const auto& d : docs) avg += static_cast<double>(d.size());
  avg = n > 0 ? avg / n : 0;
  const auto qw = split_words(query);
  const std::set<std::string> terms(qw.begin(), qw.end());
  std::vector<std::pair<std::size_t, double>> scored;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    double s = 0;
    for (const auto& t : terms) {
      const double tf = static_cast<double>(std::count(docs[i].begin(), docs[i].end(), t));
      if (tf == 0) continue;
      double df = 0;
      for (const auto& d : docs) df += std::find(d.begin(), d.end(), t) != d.end();
      const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
      const double len = static_cast<double>(docs[i].size());
      s += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avg));
    }
    if (s > 0) scored.emplace_back(i, s);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

ExperiencePool pool_from_keys(const std::vector<std::string>& keys) {
  auto p = new_pool(Condition::ind, Representation::insight);
  std::uint64_t seq = 0;
  for (const auto& k : keys) {
    ++seq;
    char id[16];
    std::snprintf(id, sizeof id, "u%06llu", static_cast<unsigned long long>(seq));
    p.append_unit({id, k, "v" + std::to_string(seq), UnitKind::insight_single, "A", "e", seq,
                   Outcome::success});
  }
  return p;
}

}  // namespace

TEST(Tokenize, Examples) {
  EXPECT_EQ(tokenize("put a clean bowl in fridge"),
            (std::vector<std::string>{"put", "a", "clean", "bowl", "in", "fridge"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_EQ(tokenize("go-to  door_3!"), (std::vector<std::string>{"go", "to", "door", "3"}));
  EXPECT_EQ(tokenize("Open The DOOR"), (std::vector<std::string>{"open", "the", "door"}));
}

TEST(Bm25, SingleDocHandValue) {
  auto pool = pool_from_keys({"find ball"});
  Bm25Index idx;
  idx.sync(pool);
  const auto terms = query_terms("ball");
  // |d| = avgdl, so the length factor is 1 and the score is ln(4/3) = 0.28768.
  const double expected = std::log(1.0 + 0.5 / 1.5) * (1 * 2.2) / (1 + 1.2);
  EXPECT_NEAR(bm25_score(terms, pool.units()[0], idx, {}), 0.28768, 1e-4);
  EXPECT_NEAR(bm25_score(terms, pool.units()[0], idx, {}), expected, 1e-12);
}

TEST(Bm25, NoOverlapScoresZero) {
  auto pool = pool_from_keys({"find ball", "open door"});
  Bm25Index idx;
  idx.sync(pool);
  EXPECT_EQ(bm25_score(query_terms("clean mug"), pool.units()[0], idx, {}), 0.0);
}

TEST(Bm25, ParamsValidated) {
  EXPECT_THROW(validate(Bm25Params{-0.1, 0.75}), Error);
  EXPECT_THROW(validate(Bm25Params{1.2, 1.5}), Error);
  EXPECT_NO_THROW(validate(Bm25Params{}));
}

TEST(Retrieve, EmptyPoolReturnsNothing) {
  auto pool = pool_from_keys({});
  Bm25Index idx;
  idx.sync(pool);
  EXPECT_TRUE(retrieve(pool, idx, {"anything", "e", 0}, 3, {}).returned_unit_ids.empty());
}

TEST(Retrieve, ZeroScoresExcluded) {
  auto pool = pool_from_keys({"open door", "find ball", "pick key"});
  Bm25Index idx;
  idx.sync(pool);
  auto ev = retrieve(pool, idx, {"where is the ball", "e", 0}, 3, {});
  ASSERT_EQ(ev.returned_unit_ids.size(), 1u);
  EXPECT_EQ(ev.returned_unit_ids[0], "u000002");
}

TEST(Retrieve, TiesGoToOlderUnit) {
  auto pool = pool_from_keys({"scan room", "scan room", "scan room"});
  Bm25Index idx;
  idx.sync(pool);
  auto ev = retrieve(pool, idx, {"scan", "e", 0}, 2, {});
  EXPECT_EQ(ev.returned_unit_ids, (std::vector<std::string>{"u000001", "u000002"}));
  EXPECT_EQ(ev.scores[0], ev.scores[1]);
}

TEST(Retrieve, RandomizedMatchesBruteForce) {
  std::mt19937_64 rng(20240611);
  const std::vector<std::string> vocab = {"go",   "to",  "the",   "door", "open", "scan", "room",
                                          "ball", "key", "box",   "red",  "blue", "find", "pick",
                                          "up",   "a",   "clean", "mug",  "put",  "in"};
  auto phrase = [&](int lo, int hi) {
    const int n = lo + static_cast<int>(rng() % (hi - lo + 1));
    std::string s;
    for (int i = 0; i < n; ++i) s += (i ? " " : "") + vocab[rng() % vocab.size()];
    return s;
  };
  int cases = 0;
  for (int trial = 0; trial < 1200; ++trial) {
    std::vector<std::string> keys;
    for (int i = 0, n = static_cast<int>(rng() % 51); i < n; ++i) keys.push_back(phrase(1, 10));
    auto pool = pool_from_keys(keys);
    Bm25Index idx;
    idx.sync(pool);
    const auto q = phrase(1, 6);
    const std::size_t k = 1 + rng() % 5;
    const Bm25Params params{0.5 + (rng() % 100) / 50.0, (rng() % 101) / 100.0};
    const auto got = retrieve(pool, idx, {q, "e", 0}, k, params);
    const auto want = brute_force(pool, q, k, params.k1, params.b);
    ASSERT_EQ(got.returned_unit_ids.size(), want.size()) << "trial " << trial << " q=" << q;
    for (std::size_t i = 0; i < want.size(); ++i) {
      EXPECT_NEAR(got.scores[i], want[i].second, 1e-9) << "trial " << trial;
      // Near-equal scores can differ in the last bits between the two
      // summation orders; only demand identical ids when the gap is real.
      const bool tie_zone =
          (i > 0 && std::abs(want[i].second - want[i - 1].second) < 1e-9) ||
          (i + 1 < want.size() && std::abs(want[i].second - want[i + 1].second) < 1e-9);
      if (!tie_zone) EXPECT_EQ(got.returned_unit_ids[i], pool.units()[want[i].first].id);
    }
    ++cases;
  }
  EXPECT_GE(cases, 1000);
}

TEST(Retrieve, IncrementalSyncMatchesFreshIndex) {
  auto pool = pool_from_keys({"open the door", "scan the room", "find the ball"});
  Bm25Index inc;
  inc.sync(pool);
  pool.append_unit({"u000004", "the red key", "v", UnitKind::insight_single, "A", "e", 4,
                    Outcome::success});
  inc.sync(pool);
  Bm25Index fresh;
  fresh.sync(pool);
  const Query q{"the red door", "e", 0};
  const auto a = retrieve(pool, inc, q, 4, {});
  const auto b = retrieve(pool, fresh, q, 4, {});
  EXPECT_EQ(a.returned_unit_ids, b.returned_unit_ids);
  EXPECT_EQ(a.scores, b.scores);
}

TEST(Scheduler, Examples) {
  EXPECT_TRUE(should_requery(Condition::step, 4, 4));
  EXPECT_FALSE(should_requery(Condition::step, 4, 5));
  EXPECT_FALSE(should_requery(Condition::ind, 4, 4));
  EXPECT_FALSE(should_requery(Condition::agg, 4, 8));
  EXPECT_THROW(should_requery(Condition::step, 0, 4), Error);
}

TEST(StepQuery, Rendering) {
  auto q0 = build_step_query("find the red ball", {}, "e1", 0);
  EXPECT_EQ(q0.text, "find the red ball");
  std::vector<TraceLine> w = {{"go to door 1", "You arrive."}, {"toggle door 1", "It opens."}};
  auto q2 = build_step_query("find the red ball", w, "e1", 4);
  EXPECT_EQ(q2.text, "find the red ball\ngo to door 1 => You arrive.\ntoggle door 1 => It opens.");
  EXPECT_EQ(q2.step, 4);
  EXPECT_EQ(build_step_query("find the red ball", w, "e1", 4).text, q2.text);
}

TEST(EventLog, RoundTrip) {
  RetrievalEvent e{{"find the key", "ep-1", 8}, {"u000003", "u000001"}, {1.5, 0.25}};
  auto back = event_from_jsonl(event_to_jsonl(e));
  EXPECT_EQ(back.query.text, e.query.text);
  EXPECT_EQ(back.query.episode_id, "ep-1");
  EXPECT_EQ(back.query.step, 8);
  EXPECT_EQ(back.returned_unit_ids, e.returned_unit_ids);
  EXPECT_EQ(back.scores, e.scores);
}
