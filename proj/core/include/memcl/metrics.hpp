#pragma once

#include <optional>
#include <string>
#include <vector>

#include "memcl/protocol.hpp"

namespace memcl {

/// Successes / total. Throws EmptyOutcomes.
double accuracy(const std::vector<InstanceOutcome>& outcomes);
double accuracy(const std::vector<Outcome>& outcomes);

/// Later-task accuracy after the earlier task minus from-scratch accuracy.
double fwt(double acc_cross_later, double acc_scratch_later);
/// Earlier-task accuracy after the later task minus from-scratch accuracy.
double bwt(double acc_probe_earlier, double acc_scratch_earlier);

struct SubsetPartition {
  std::vector<std::string> baseline_success_ids;
  std::vector<std::string> baseline_fail_ids;
  std::size_t n_s() const noexcept { return baseline_success_ids.size(); }
  std::size_t n_f() const noexcept { return baseline_fail_ids.size(); }
  bool operator==(const SubsetPartition&) const = default;
};

SubsetPartition partition(const std::vector<InstanceOutcome>& baseline);

/// Below this many baseline failures NL is flagged as unreliable.
inline constexpr std::size_t kNlReliableMin = 10;

struct SubsetRates {
  std::size_t rr_successes = 0;  // out of n_s
  std::size_t nl_successes = 0;  // out of n_f
  double rr = 0.0;
  double nl = 0.0;
};

/// RR and NL of `outcomes` on the partition. Throws UndefinedSubset if either
/// side is empty, or ValidationError if an id is not covered.
SubsetRates subset_rates(const SubsetPartition& p, const std::vector<InstanceOutcome>& outcomes);

struct DeltaRrNl {
  double delta_rr = 0.0;
  double delta_nl = 0.0;
  SubsetRates cross;
  SubsetRates scratch;
  bool nl_unreliable = false;
};

DeltaRrNl delta_rr_nl(const SubsetPartition& p, const std::vector<InstanceOutcome>& cross,
                      const std::vector<InstanceOutcome>& scratch);

/// series[i] = successes among the first i+1 outcomes / (i+1).
std::vector<double> cumulative_success(const std::vector<Outcome>& in_order);

struct RrNlSeries {
  std::vector<double> rr;
  std::vector<double> nl;
};

RrNlSeries rr_nl_dynamics(const SubsetPartition& p,
                          const std::vector<std::vector<InstanceOutcome>>& milestone_outcomes);

/// One transfer sequence ("A→B" or "B→A") of one arm, one repetition.
struct SequenceMetrics {
  std::string sequence;
  // Later task.
  double acc_baseline_later = 0.0;
  double acc_scratch_later = 0.0;
  double acc_cross_later = 0.0;
  double fwt = 0.0;
  // Earlier task.
  double acc_scratch_earlier = 0.0;
  double acc_probe_earlier = 0.0;
  double bwt = 0.0;
  // RR/NL on the later task. Absent when a subset is empty.
  std::size_t n_s = 0;
  std::size_t n_f = 0;
  std::optional<DeltaRrNl> later;
  bool nl_unreliable = false;
};

struct ArmMetrics {
  Arm arm;
  // One entry per repetition, then the mean over repetitions.
  std::vector<std::vector<SequenceMetrics>> per_rep;
  std::vector<SequenceMetrics> mean;
  // Baselines are memory-free, so they do not depend on the arm.
  double baseline_a = 0.0;
  double baseline_b = 0.0;
};

struct DynamicsSeries {
  Arm arm;
  int rep = 0;
  std::string run_type;
  std::string phase;
  std::vector<double> cumulative;
  std::optional<RrNlSeries> rr_nl;
};

struct MetricsReport {
  std::vector<ArmMetrics> arms;
  std::vector<DynamicsSeries> dynamics;
};

/// Recomputes everything from the per-instance outcomes in the artifacts.
/// Throws IncompleteArtifacts when a run or phase is missing.
MetricsReport compute_metrics(const RunArtifacts& artifacts);

std::string metrics_to_json(const MetricsReport& report);
/// env, cond/repr, sequence, scratch, cross, FWT, ΔRR, ΔNL (percent, 1 dp).
std::string fwt_table_csv(const MetricsReport& report);
/// env, cond/repr, sequence, scratch, probe, BWT (percent, 1 dp).
std::string bwt_table_csv(const MetricsReport& report);
std::string cumulative_success_tsv(const MetricsReport& report);
std::string rr_nl_dynamics_tsv(const MetricsReport& report);

}  // namespace memcl
