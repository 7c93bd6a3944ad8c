#include "memcl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "memcl/error.hpp"

namespace memcl {

std::vector<SparseVector> tfidf_vectors(const std::vector<std::string>& texts) {
  std::vector<std::map<std::string, int>> tfs;
  std::map<std::string, int> df;
  tfs.reserve(texts.size());
  for (const auto& t : texts) {
    std::map<std::string, int> tf;
    for (auto& tok : tokenize(t)) ++tf[tok];
    for (const auto& [term, _] : tf) ++df[term];
    tfs.push_back(std::move(tf));
  }
  const double n = static_cast<double>(texts.size());
  std::vector<SparseVector> out;
  out.reserve(texts.size());
  for (const auto& tf : tfs) {
    SparseVector v;
    double norm = 0.0;
    for (const auto& [term, count] : tf) {
      const double w = count * std::log(n / df[term]);
      if (w == 0.0) continue;
      v[term] = w;
      norm += w * w;
    }
    norm = std::sqrt(norm);
    for (auto& [_, w] : v) w /= norm;
    out.push_back(std::move(v));
  }
  return out;
}

double cosine(const SparseVector& a, const SparseVector& b) {
  if (a.empty() || b.empty()) return a.empty() && b.empty() ? 1.0 : 0.0;
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  double dot = 0.0;
  for (const auto& [term, w] : small) {
    auto it = large.find(term);
    if (it != large.end()) dot += w * it->second;
  }
  return dot;
}

double mean_pairwise_diversity(const std::vector<SparseVector>& vectors) {
  const std::size_t n = vectors.size();
  if (n < 2) throw Error(ErrorCode::too_few_items, "diversity needs at least two items");
  // For unit vectors the pairwise dot products sum to (|sum v|^2 - count)/2,
  // which keeps this linear in the number of items. Empty vectors are
  // similar only to each other.
  std::unordered_map<std::string, double> sum;
  std::size_t nonempty = 0;
  double self = 0.0;
  for (const auto& v : vectors) {
    if (v.empty()) continue;
    ++nonempty;
    for (const auto& [term, w] : v) {
      sum[term] += w;
      self += w * w;
    }
  }
  double sq = 0.0;
  for (const auto& [_, s] : sum) sq += s * s;
  const double empty = static_cast<double>(n - nonempty);
  const double pair_sum = (sq - self) / 2.0 + empty * (empty - 1.0) / 2.0;
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  const double d = 1.0 - pair_sum / pairs;
  return std::clamp(d, 0.0, 1.0);
}

Coverage retrieval_coverage(const std::vector<RetrievalEvent>& log) {
  Coverage c;
  std::set<std::string> seen;
  for (const auto& e : log) {
    for (const auto& id : e.returned_unit_ids) seen.insert(id);
    c.total += e.returned_unit_ids.size();
  }
  if (c.total == 0) throw Error(ErrorCode::empty_log, "retrieval log returned no units");
  c.unique = seen.size();
  c.fraction = static_cast<double>(c.unique) / static_cast<double>(c.total);
  return c;
}

double top1_concentration(const std::vector<RetrievalEvent>& log) {
  std::map<std::string, std::size_t> counts;
  std::size_t events = 0;
  for (const auto& e : log) {
    if (e.returned_unit_ids.empty()) continue;
    ++counts[e.returned_unit_ids.front()];
    ++events;
  }
  if (events == 0) throw Error(ErrorCode::empty_log, "no retrieval event returned a unit");
  std::size_t modal = 0;
  for (const auto& [_, c] : counts) modal = std::max(modal, c);
  return static_cast<double>(modal) / static_cast<double>(events);
}

DiversityReport diversity_report(const ExperiencePool& pool,
                                 const std::vector<RetrievalEvent>& log) {
  std::vector<std::string> values;
  for (const auto& e : log) {
    for (const auto& id : e.returned_unit_ids) {
      const auto* u = pool.find(id);
      if (u == nullptr) throw Error(ErrorCode::dangling_unit_id, "unit " + id + " not in pool");
      values.push_back(u->value_text);
    }
  }
  DiversityReport r;
  const auto cov = retrieval_coverage(log);
  r.unique_retrieved = cov.unique;
  r.total_retrievals = cov.total;
  r.coverage = cov.fraction;
  r.top1_concentration = top1_concentration(log);

  std::vector<std::string> keys;
  for (const auto& u : pool.units()) keys.push_back(u.key_text);
  try {
    r.key_diversity = mean_pairwise_diversity(tfidf_vectors(keys));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::too_few_items) throw;
    r.notes.push_back(std::string("key_diversity: ") + to_string(e.code()));
  }
  try {
    r.context_diversity = mean_pairwise_diversity(tfidf_vectors(values));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::too_few_items) throw;
    r.notes.push_back(std::string("context_diversity: ") + to_string(e.code()));
  }
  return r;
}

double source_fraction(const ExperiencePool& pool, const std::vector<RetrievalEvent>& log,
                       std::string_view source_task) {
  std::size_t total = 0, hits = 0;
  for (const auto& e : log) {
    for (const auto& id : e.returned_unit_ids) {
      const auto* u = pool.find(id);
      if (u == nullptr) throw Error(ErrorCode::dangling_unit_id, "unit " + id + " not in pool");
      ++total;
      hits += u->source_task == source_task;
    }
  }
  if (total == 0) throw Error(ErrorCode::empty_log, "retrieval log returned no units");
  return static_cast<double>(hits) / static_cast<double>(total);
}

namespace {

ExperiencePool load_pool(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::incomplete_artifacts, "missing pool snapshot " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return pool_restore(ss.str());
}

}  // namespace

std::vector<DiversityPanel> diagnose(const RunArtifacts& art) {
  std::vector<DiversityPanel> panels;
  for (const auto& arm : art.config.arms()) {
    for (int r = 0; r < art.config.runs; ++r) {
      for (const std::string task : {"A", "B"}) {
        const auto* run = art.find(arm, r, "scratch_" + task);
        const auto* phase = run ? run->phase("eval_" + task) : nullptr;
        if (phase == nullptr)
          throw Error(ErrorCode::incomplete_artifacts, "scratch:" + task);
        const auto pool = load_pool(art.dir / run->relative_dir() / ("train_" + task) / "pool.jsonl");
        DiversityPanel panel{arm, r, task, std::nullopt};
        try {
          panel.report = diversity_report(pool, phase->retrievals);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::empty_log) throw;
        }
        panels.push_back(std::move(panel));
      }
    }
  }
  return panels;
}

namespace {

using ojson = nlohmann::ordered_json;

ojson opt(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::string num(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

}  // namespace

std::string diversity_to_json(const std::vector<DiversityPanel>& panels) {
  ojson j;
  j["definitions"] = {
      {"diversity", "1 - mean pairwise cosine of L2-normalized tf*ln(N/df) vectors"},
      {"key_diversity", "over every key_text in the pool"},
      {"context_diversity", "over the value_text of every returned slot, repeats included"},
      {"coverage", "unique returned ids / total returned slots"},
      {"top1_concentration", "events whose rank-1 id is the modal rank-1 id / events"},
      {"log", "within-task evaluation retrievals against the end-of-phase pool"}};
  auto arr = ojson::array();
  for (const auto& p : panels) {
    ojson pj;
    pj["arm"] = p.arm.name();
    pj["condition"] = to_string(p.arm.condition);
    pj["representation"] = to_string(p.arm.representation);
    pj["rep"] = p.rep;
    pj["task"] = p.task;
    if (p.report) {
      pj["key_diversity"] = opt(p.report->key_diversity);
      pj["context_diversity"] = opt(p.report->context_diversity);
      pj["coverage"] = p.report->coverage;
      pj["top1_concentration"] = p.report->top1_concentration;
      pj["unique_retrieved"] = p.report->unique_retrieved;
      pj["total_retrievals"] = p.report->total_retrievals;
      pj["notes"] = p.report->notes;
    } else {
      pj["notes"] = {"EmptyLog"};
    }
    arr.push_back(pj);
  }
  j["panels"] = arr;
  return j.dump(1) + "\n";
}

std::string diversity_csv(const std::vector<DiversityPanel>& panels) {
  std::string out =
      "arm,rep,task,key_diversity,context_diversity,coverage,top1_concentration,unique,total\n";
  for (const auto& p : panels) {
    out += p.arm.name() + "," + std::to_string(p.rep) + "," + p.task + ",";
    if (p.report) {
      out += num(p.report->key_diversity) + "," + num(p.report->context_diversity) + "," +
             num(p.report->coverage) + "," + num(p.report->top1_concentration) + "," +
             std::to_string(p.report->unique_retrieved) + "," +
             std::to_string(p.report->total_retrievals);
    } else {
      out += ",,,,,";
    }
    out += "\n";
  }
  return out;
}

std::string diversity_tsv(const std::vector<DiversityPanel>& panels) {
  std::string out = "arm\trep\ttask\tmeasure\tvalue\n";
  for (const auto& p : panels) {
    if (!p.report) continue;
    const auto prefix = p.arm.name() + "\t" + std::to_string(p.rep) + "\t" + p.task + "\t";
    const std::pair<const char*, std::optional<double>> rows[] = {
        {"key_diversity", p.report->key_diversity},
        {"context_diversity", p.report->context_diversity},
        {"coverage", p.report->coverage},
        {"top1_concentration", p.report->top1_concentration}};
    for (const auto& [name, v] : rows)
      if (v) out += prefix + name + "\t" + num(v) + "\n";
  }
  return out;
}

}  // namespace memcl
