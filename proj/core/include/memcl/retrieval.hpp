#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "memcl/memory.hpp"

namespace memcl {

/// Lowercases and splits on runs of non-alphanumeric ASCII characters.
std::vector<std::string> tokenize(std::string_view text);

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

void validate(const Bm25Params& params);

struct Query {
  std::string text;
  std::string episode_id;
  int step = 0;  // 0 = before the first action
};

struct RetrievalEvent {
  Query query;
  std::vector<std::string> returned_unit_ids;
  std::vector<double> scores;
};

/// Corpus statistics over unit key tokens, kept incrementally alongside a
/// pool. Postings are stored per term so scoring touches only matching units.
class Bm25Index {
 public:
  /// Indexes any pool units not yet seen. Units are only ever appended, so
  /// the index stays valid as long as it is fed the same pool.
  void sync(const ExperiencePool& pool);
  void add(const MemoryUnit& unit);

  std::size_t doc_count() const noexcept { return doc_lengths_.size(); }
  std::size_t doc_freq(const std::string& term) const;
  double avg_doc_length() const noexcept;
  std::size_t doc_length(std::size_t doc) const { return doc_lengths_.at(doc); }
  double idf(const std::string& term) const;

  /// Scores every unit with non-zero overlap; index i is insertion position.
  std::vector<std::pair<std::size_t, double>> score_all(std::span<const std::string> query_terms,
                                                        const Bm25Params& params) const;

  /// Score of one indexed unit against a query.
  double score(std::span<const std::string> query_terms, std::size_t doc,
               const Bm25Params& params) const;

 private:
  struct Posting {
    std::size_t doc;
    int tf;
  };
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  std::vector<std::size_t> doc_lengths_;
  std::vector<std::unordered_map<std::string, int>> term_freqs_;
  std::size_t total_length_ = 0;
};

/// Unique query terms in a fixed (sorted) order; every scorer sums over them
/// in this order so equal documents get bit-identical scores.
std::vector<std::string> query_terms(std::string_view text);

/// Okapi BM25 of one unit, computed from stats that already include it.
double bm25_score(std::span<const std::string> query_tokens, const MemoryUnit& unit,
                  const Bm25Index& stats, const Bm25Params& params);

/// Top-k units by score, ties to the older unit, zero scores dropped.
/// `index` must have been synced with `pool`.
RetrievalEvent retrieve(const ExperiencePool& pool, const Bm25Index& index, const Query& query,
                        std::size_t k, const Bm25Params& params);

/// Step-level re-query predicate; step 0 retrieval is the caller's job.
bool should_requery(Condition condition, int interval, int step);

struct TraceLine {
  std::string action;
  std::string observation;
};

/// Instruction followed by one "action => observation" line per window step.
Query build_step_query(std::string_view instruction, std::span<const TraceLine> recent_window,
                       std::string episode_id, int step);

/// Retrieval log line; scores are rounded to 6 decimals.
std::string event_to_jsonl(const RetrievalEvent& event);
RetrievalEvent event_from_jsonl(std::string_view line);

}  // namespace memcl
