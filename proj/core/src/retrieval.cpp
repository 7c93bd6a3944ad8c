#include "memcl/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "json.hpp"
#include "memcl/error.hpp"

namespace memcl {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

void validate(const Bm25Params& params) {
  if (!(params.k1 > 0.0)) throw Error(ErrorCode::validation_error, "bm25.k1 must be positive");
  if (!(params.b >= 0.0 && params.b <= 1.0))
    throw Error(ErrorCode::validation_error, "bm25.b must lie in [0,1]");
}

std::vector<std::string> query_terms(std::string_view text) {
  auto tokens = tokenize(text);
  std::set<std::string> unique(tokens.begin(), tokens.end());
  return {unique.begin(), unique.end()};
}

namespace {

double term_weight(double idf, int tf, double doc_len, double avgdl, const Bm25Params& p) {
  const double norm = avgdl > 0.0 ? doc_len / avgdl : 1.0;
  return idf * (tf * (p.k1 + 1.0)) / (tf + p.k1 * (1.0 - p.b + p.b * norm));
}

std::vector<std::string> sorted_unique(std::span<const std::string> tokens) {
  std::set<std::string> unique(tokens.begin(), tokens.end());
  return {unique.begin(), unique.end()};
}

}  // namespace

void Bm25Index::sync(const ExperiencePool& pool) {
  const auto& units = pool.units();
  for (std::size_t i = doc_lengths_.size(); i < units.size(); ++i) add(units[i]);
}

void Bm25Index::add(const MemoryUnit& unit) {
  const std::size_t doc = doc_lengths_.size();
  const auto tokens = tokenize(unit.key_text);
  std::unordered_map<std::string, int> tf;
  for (const auto& t : tokens) ++tf[t];
  // Postings are appended in doc order, so each list stays sorted.
  for (const auto& [term, count] : tf) postings_[term].push_back({doc, count});
  doc_lengths_.push_back(tokens.size());
  term_freqs_.push_back(std::move(tf));
  total_length_ += tokens.size();
}

std::size_t Bm25Index::doc_freq(const std::string& term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? 0 : it->second.size();
}

double Bm25Index::avg_doc_length() const noexcept {
  return doc_lengths_.empty() ? 0.0
                              : static_cast<double>(total_length_) / doc_lengths_.size();
}

double Bm25Index::idf(const std::string& term) const {
  const double n = static_cast<double>(doc_count());
  const double df = static_cast<double>(doc_freq(term));
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

std::vector<std::pair<std::size_t, double>> Bm25Index::score_all(
    std::span<const std::string> query_terms, const Bm25Params& params) const {
  std::vector<double> acc(doc_lengths_.size(), 0.0);
  std::vector<char> touched(doc_lengths_.size(), 0);
  const double avgdl = avg_doc_length();
  for (const auto& term : query_terms) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double w = idf(term);
    for (const auto& p : it->second) {
      acc[p.doc] += term_weight(w, p.tf, static_cast<double>(doc_lengths_[p.doc]), avgdl, params);
      touched[p.doc] = 1;
    }
  }
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t d = 0; d < acc.size(); ++d)
    if (touched[d]) out.emplace_back(d, acc[d]);
  return out;
}

double Bm25Index::score(std::span<const std::string> query_terms, std::size_t doc,
                        const Bm25Params& params) const {
  const auto& tf = term_freqs_.at(doc);
  const double avgdl = avg_doc_length();
  double total = 0.0;
  for (const auto& term : query_terms) {
    auto it = tf.find(term);
    if (it == tf.end()) continue;
    total += term_weight(idf(term), it->second, static_cast<double>(doc_lengths_[doc]), avgdl,
                         params);
  }
  return total;
}

double bm25_score(std::span<const std::string> query_tokens, const MemoryUnit& unit,
                  const Bm25Index& stats, const Bm25Params& params) {
  const auto terms = sorted_unique(query_tokens);
  const auto doc_tokens = tokenize(unit.key_text);
  std::unordered_map<std::string, int> tf;
  for (const auto& t : doc_tokens) ++tf[t];
  const double avgdl = stats.avg_doc_length();
  double total = 0.0;
  for (const auto& term : terms) {
    auto it = tf.find(term);
    if (it == tf.end()) continue;
    total += term_weight(stats.idf(term), it->second, static_cast<double>(doc_tokens.size()),
                         avgdl, params);
  }
  return total;
}

RetrievalEvent retrieve(const ExperiencePool& pool, const Bm25Index& index, const Query& query,
                        std::size_t k, const Bm25Params& params) {
  if (k == 0) throw Error(ErrorCode::validation_error, "retrieve requires k >= 1");
  if (index.doc_count() != pool.size())
    throw Error(ErrorCode::validation_error, "retrieval index out of sync with pool");
  RetrievalEvent event;
  event.query = query;
  if (pool.empty()) return event;

  const auto terms = query_terms(query.text);
  auto scored = index.score_all(terms, params);
  std::erase_if(scored, [](const auto& s) { return !(s.second > 0.0); });
  // Insertion position orders by insert_seq, so the positional tie-break is
  // the older-first rule.
  auto better = [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  };
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), better);
  const auto& units = pool.units();
  for (std::size_t i = 0; i < take; ++i) {
    event.returned_unit_ids.push_back(units[scored[i].first].id);
    event.scores.push_back(scored[i].second);
  }
  return event;
}

bool should_requery(Condition condition, int interval, int step) {
  if (interval < 1) throw Error(ErrorCode::validation_error, "step interval must be >= 1");
  if (step < 1) throw Error(ErrorCode::validation_error, "should_requery expects step >= 1");
  return condition == Condition::step && step % interval == 0;
}

Query build_step_query(std::string_view instruction, std::span<const TraceLine> recent_window,
                       std::string episode_id, int step) {
  Query q;
  q.text = std::string(instruction);
  for (const auto& line : recent_window) {
    q.text += '\n';
    q.text += line.action;
    q.text += " => ";
    q.text += line.observation;
  }
  q.episode_id = std::move(episode_id);
  q.step = step;
  return q;
}

namespace {

double round6(double x) { return std::round(x * 1e6) / 1e6; }

}  // namespace

std::string event_to_jsonl(const RetrievalEvent& event) {
  nlohmann::ordered_json j;
  j["episode_id"] = event.query.episode_id;
  j["step"] = event.query.step;
  j["query"] = event.query.text;
  j["returned_unit_ids"] = event.returned_unit_ids;
  auto scores = nlohmann::ordered_json::array();
  for (double s : event.scores) scores.push_back(round6(s));
  j["scores"] = scores;
  return j.dump();
}

RetrievalEvent event_from_jsonl(std::string_view line) {
  try {
    auto j = nlohmann::json::parse(line);
    RetrievalEvent e;
    e.query.episode_id = j.at("episode_id").get<std::string>();
    e.query.step = j.at("step").get<int>();
    e.query.text = j.at("query").get<std::string>();
    e.returned_unit_ids = j.at("returned_unit_ids").get<std::vector<std::string>>();
    e.scores = j.at("scores").get<std::vector<double>>();
    if (e.scores.size() != e.returned_unit_ids.size())
      throw Error(ErrorCode::parse_error, "retrieval event ids/scores length mismatch");
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::parse_error, std::string("retrieval event: ") + ex.what());
  }
}

}  // namespace memcl
