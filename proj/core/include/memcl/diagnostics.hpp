#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "memcl/memory.hpp"
#include "memcl/protocol.hpp"
#include "memcl/retrieval.hpp"

namespace memcl {

/// Term -> weight, L2-normalized. Empty when every term of the text occurs
/// in every text of the collection.
using SparseVector = std::map<std::string, double>;

/// tf * ln(N/df) over tokenize() terms.
std::vector<SparseVector> tfidf_vectors(const std::vector<std::string>& texts);

/// Cosine of two normalized vectors. Two empty vectors count as identical
/// (1); one empty and one not as unrelated (0).
double cosine(const SparseVector& a, const SparseVector& b);

/// 1 - mean pairwise cosine. Throws TooFewItems below two vectors.
double mean_pairwise_diversity(const std::vector<SparseVector>& vectors);

struct Coverage {
  std::size_t unique = 0;
  std::size_t total = 0;
  double fraction = 0.0;
};

/// Distinct returned ids over total returned slots. Throws EmptyLog.
Coverage retrieval_coverage(const std::vector<RetrievalEvent>& log);

/// Share of events whose rank-1 unit is the most common rank-1 unit. Events
/// that returned nothing are skipped. Throws EmptyLog.
double top1_concentration(const std::vector<RetrievalEvent>& log);

struct DiversityReport {
  // Absent when undefined (fewer than two items); `notes` says why.
  std::optional<double> key_diversity;
  std::optional<double> context_diversity;
  double coverage = 0.0;
  double top1_concentration = 0.0;
  std::size_t unique_retrieved = 0;
  std::size_t total_retrievals = 0;
  std::vector<std::string> notes;
};

/// Throws DanglingUnitId if the log references a unit the pool lacks, and
/// EmptyLog for an empty log.
DiversityReport diversity_report(const ExperiencePool& pool,
                                 const std::vector<RetrievalEvent>& log);

/// Fraction of returned slots whose unit came from `source_task`.
double source_fraction(const ExperiencePool& pool, const std::vector<RetrievalEvent>& log,
                       std::string_view source_task);

/// One panel per (arm, task, repetition): the within-task evaluation log
/// scored against the pool it was retrieved from.
struct DiversityPanel {
  Arm arm;
  int rep = 0;
  std::string task;
  std::optional<DiversityReport> report;
};

std::vector<DiversityPanel> diagnose(const RunArtifacts& artifacts);

std::string diversity_to_json(const std::vector<DiversityPanel>& panels);
std::string diversity_csv(const std::vector<DiversityPanel>& panels);
/// x/y series for plotting: one row per panel and measure.
std::string diversity_tsv(const std::vector<DiversityPanel>& panels);

}  // namespace memcl
