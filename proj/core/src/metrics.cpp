#include "memcl/metrics.hpp"

#include <cstdio>
#include <map>

#include "json.hpp"
#include "memcl/error.hpp"

namespace memcl {

double accuracy(const std::vector<Outcome>& outcomes) {
  if (outcomes.empty()) throw Error(ErrorCode::empty_outcomes, "accuracy of an empty outcome set");
  std::size_t s = 0;
  for (auto o : outcomes) s += o == Outcome::success;
  return static_cast<double>(s) / static_cast<double>(outcomes.size());
}

double accuracy(const std::vector<InstanceOutcome>& outcomes) {
  if (outcomes.empty()) throw Error(ErrorCode::empty_outcomes, "accuracy of an empty outcome set");
  std::size_t s = 0;
  for (const auto& o : outcomes) s += o.outcome == Outcome::success;
  return static_cast<double>(s) / static_cast<double>(outcomes.size());
}

double fwt(double acc_cross_later, double acc_scratch_later) {
  return acc_cross_later - acc_scratch_later;
}

double bwt(double acc_probe_earlier, double acc_scratch_earlier) {
  return acc_probe_earlier - acc_scratch_earlier;
}

SubsetPartition partition(const std::vector<InstanceOutcome>& baseline) {
  SubsetPartition p;
  for (const auto& o : baseline)
    (o.outcome == Outcome::success ? p.baseline_success_ids : p.baseline_fail_ids)
        .push_back(o.instance_id);
  return p;
}

SubsetRates subset_rates(const SubsetPartition& p, const std::vector<InstanceOutcome>& outcomes) {
  if (p.n_s() == 0) throw Error(ErrorCode::undefined_subset, "baseline-success subset is empty");
  if (p.n_f() == 0) throw Error(ErrorCode::undefined_subset, "baseline-fail subset is empty");
  std::map<std::string, Outcome> by_id;
  for (const auto& o : outcomes) by_id[o.instance_id] = o.outcome;
  auto count = [&](const std::vector<std::string>& ids) {
    std::size_t s = 0;
    for (const auto& id : ids) {
      auto it = by_id.find(id);
      if (it == by_id.end())
        throw Error(ErrorCode::validation_error, "outcomes do not cover instance " + id);
      s += it->second == Outcome::success;
    }
    return s;
  };
  SubsetRates r;
  r.rr_successes = count(p.baseline_success_ids);
  r.nl_successes = count(p.baseline_fail_ids);
  r.rr = static_cast<double>(r.rr_successes) / static_cast<double>(p.n_s());
  r.nl = static_cast<double>(r.nl_successes) / static_cast<double>(p.n_f());
  return r;
}

DeltaRrNl delta_rr_nl(const SubsetPartition& p, const std::vector<InstanceOutcome>& cross,
                      const std::vector<InstanceOutcome>& scratch) {
  DeltaRrNl d;
  d.cross = subset_rates(p, cross);
  d.scratch = subset_rates(p, scratch);
  d.delta_rr = d.cross.rr - d.scratch.rr;
  d.delta_nl = d.cross.nl - d.scratch.nl;
  d.nl_unreliable = p.n_f() < kNlReliableMin;
  return d;
}

std::vector<double> cumulative_success(const std::vector<Outcome>& in_order) {
  std::vector<double> out;
  out.reserve(in_order.size());
  std::size_t s = 0;
  for (std::size_t i = 0; i < in_order.size(); ++i) {
    s += in_order[i] == Outcome::success;
    out.push_back(static_cast<double>(s) / static_cast<double>(i + 1));
  }
  return out;
}

RrNlSeries rr_nl_dynamics(const SubsetPartition& p,
                          const std::vector<std::vector<InstanceOutcome>>& milestone_outcomes) {
  RrNlSeries out;
  for (const auto& m : milestone_outcomes) {
    const auto r = subset_rates(p, m);
    out.rr.push_back(r.rr);
    out.nl.push_back(r.nl);
  }
  return out;
}

namespace {

const PhaseLog& need_phase(const RunArtifacts& art, const Arm& arm, int rep,
                           std::string_view run_type, std::string_view phase) {
  const auto* run = art.find(arm, rep, run_type);
  const auto* p = run ? run->phase(phase) : nullptr;
  if (p == nullptr || (!p->training && !p->eval)) {
    std::string label;
    if (run_type.starts_with("cross")) {
      label = std::string(phase.starts_with("probe") ? "probe:" : "cross:") + run_type[6] + "→" +
              run_type[7];
    } else {
      label = std::string(run_type.substr(0, run_type.find('_'))) + ":" +
              std::string(run_type.substr(run_type.find('_') + 1));
    }
    throw Error(ErrorCode::incomplete_artifacts, label);
  }
  return *p;
}

const std::vector<InstanceOutcome>& eval_outcomes(const RunArtifacts& art, const Arm& arm, int rep,
                                                  std::string_view run_type,
                                                  std::string_view phase) {
  return need_phase(art, arm, rep, run_type, phase).eval->outcomes;
}

SequenceMetrics sequence_metrics(const RunArtifacts& art, const Arm& arm, int rep, Family first) {
  const std::string e = std::string(to_string(first));
  const std::string l = first == Family::A ? "B" : "A";
  const std::string cross = "cross_" + e + l;
  SequenceMetrics m;
  m.sequence = e + "→" + l;
  const auto& base = eval_outcomes(art, arm, rep, "baseline_" + l, "eval_" + l);
  const auto& scratch_later = eval_outcomes(art, arm, rep, "scratch_" + l, "eval_" + l);
  const auto& cross_later = eval_outcomes(art, arm, rep, cross, "eval_" + l);
  const auto& scratch_earlier = eval_outcomes(art, arm, rep, "scratch_" + e, "eval_" + e);
  const auto& probe = eval_outcomes(art, arm, rep, cross, "probe_" + e);
  m.acc_baseline_later = accuracy(base);
  m.acc_scratch_later = accuracy(scratch_later);
  m.acc_cross_later = accuracy(cross_later);
  m.fwt = fwt(m.acc_cross_later, m.acc_scratch_later);
  m.acc_scratch_earlier = accuracy(scratch_earlier);
  m.acc_probe_earlier = accuracy(probe);
  m.bwt = bwt(m.acc_probe_earlier, m.acc_scratch_earlier);
  const auto p = partition(base);
  m.n_s = p.n_s();
  m.n_f = p.n_f();
  m.nl_unreliable = m.n_f < kNlReliableMin;
  if (m.n_s > 0 && m.n_f > 0) m.later = delta_rr_nl(p, cross_later, scratch_later);
  return m;
}

SequenceMetrics mean_of(const std::vector<SequenceMetrics>& reps) {
  SequenceMetrics m = reps.front();
  const double n = static_cast<double>(reps.size());
  auto avg = [&](auto field) {
    double s = 0.0;
    for (const auto& r : reps) s += field(r);
    return s / n;
  };
  m.acc_baseline_later = avg([](const SequenceMetrics& r) { return r.acc_baseline_later; });
  m.acc_scratch_later = avg([](const SequenceMetrics& r) { return r.acc_scratch_later; });
  m.acc_cross_later = avg([](const SequenceMetrics& r) { return r.acc_cross_later; });
  m.acc_scratch_earlier = avg([](const SequenceMetrics& r) { return r.acc_scratch_earlier; });
  m.acc_probe_earlier = avg([](const SequenceMetrics& r) { return r.acc_probe_earlier; });
  // Transfer is reported from mean accuracies.
  m.fwt = fwt(m.acc_cross_later, m.acc_scratch_later);
  m.bwt = bwt(m.acc_probe_earlier, m.acc_scratch_earlier);
  bool all = true;
  for (const auto& r : reps) all = all && r.later.has_value();
  if (all) {
    DeltaRrNl d = *reps.front().later;
    d.cross.rr = avg([](const SequenceMetrics& r) { return r.later->cross.rr; });
    d.cross.nl = avg([](const SequenceMetrics& r) { return r.later->cross.nl; });
    d.scratch.rr = avg([](const SequenceMetrics& r) { return r.later->scratch.rr; });
    d.scratch.nl = avg([](const SequenceMetrics& r) { return r.later->scratch.nl; });
    d.cross.rr_successes = d.cross.nl_successes = 0;
    d.scratch.rr_successes = d.scratch.nl_successes = 0;
    d.delta_rr = d.cross.rr - d.scratch.rr;
    d.delta_nl = d.cross.nl - d.scratch.nl;
    m.later = d;
  } else {
    m.later.reset();
  }
  return m;
}

}  // namespace

MetricsReport compute_metrics(const RunArtifacts& art) {
  MetricsReport report;
  const int runs = art.config.runs;
  const int milestones = art.config.milestones;
  for (const auto& arm : art.config.arms()) {
    ArmMetrics am;
    am.arm = arm;
    double ba = 0.0, bb = 0.0;
    for (int r = 0; r < runs; ++r) {
      am.per_rep.push_back({sequence_metrics(art, arm, r, Family::A),
                            sequence_metrics(art, arm, r, Family::B)});
      ba += accuracy(eval_outcomes(art, arm, r, "baseline_A", "eval_A"));
      bb += accuracy(eval_outcomes(art, arm, r, "baseline_B", "eval_B"));
    }
    am.baseline_a = ba / runs;
    am.baseline_b = bb / runs;
    for (std::size_t s = 0; s < 2; ++s) {
      std::vector<SequenceMetrics> reps;
      for (const auto& rep : am.per_rep) reps.push_back(rep[s]);
      am.mean.push_back(mean_of(reps));
    }
    report.arms.push_back(std::move(am));

    for (int r = 0; r < runs; ++r) {
      for (const char* rt : {"scratch_A", "scratch_B", "cross_AB", "cross_BA"}) {
        const auto* run = art.find(arm, r, rt);
        if (run == nullptr) continue;
        for (const auto& phase : run->phases) {
          if (!phase.training) continue;
          DynamicsSeries d;
          d.arm = arm;
          d.rep = r;
          d.run_type = rt;
          d.phase = phase.name;
          std::vector<Outcome> order;
          for (const auto& e : phase.episodes) order.push_back(e.outcome);
          d.cumulative = cumulative_success(order);
          const std::string t(to_string(phase.task));
          const auto p = partition(eval_outcomes(art, arm, r, "baseline_" + t, "eval_" + t));
          if (p.n_s() > 0 && p.n_f() > 0) {
            std::vector<std::vector<InstanceOutcome>> ms;
            for (int k = 1; k <= milestones; ++k) {
              std::string name = "eval_" + t;
              if (k < milestones) name += "_m" + std::to_string(k);
              ms.push_back(eval_outcomes(art, arm, r, rt, name));
            }
            d.rr_nl = rr_nl_dynamics(p, ms);
          }
          report.dynamics.push_back(std::move(d));
        }
      }
    }
  }
  return report;
}

namespace {

using ojson = nlohmann::ordered_json;

ojson rates_json(const SubsetRates& r) { return {{"rr", r.rr}, {"nl", r.nl}}; }

ojson sequence_json(const SequenceMetrics& m) {
  ojson j;
  j["sequence"] = m.sequence;
  j["acc_baseline_later"] = m.acc_baseline_later;
  j["acc_scratch_later"] = m.acc_scratch_later;
  j["acc_cross_later"] = m.acc_cross_later;
  j["fwt"] = m.fwt;
  j["acc_scratch_earlier"] = m.acc_scratch_earlier;
  j["acc_probe_earlier"] = m.acc_probe_earlier;
  j["bwt"] = m.bwt;
  j["n_s"] = m.n_s;
  j["n_f"] = m.n_f;
  j["nl_unreliable"] = m.nl_unreliable;
  if (m.later) {
    j["delta_rr"] = m.later->delta_rr;
    j["delta_nl"] = m.later->delta_nl;
    j["cross"] = rates_json(m.later->cross);
    j["scratch"] = rates_json(m.later->scratch);
  } else {
    j["delta_rr"] = nullptr;
    j["delta_nl"] = nullptr;
  }
  return j;
}

std::string pct(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * x);
  std::string s = buf;
  if (s == "-0.0") s = "0.0";
  return s;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

std::string arm_label(const Arm& a) {
  if (a.representation == Representation::raw) return "raw";
  return std::string(to_string(a.condition)) + "/" + std::string(to_string(a.representation));
}

}  // namespace

std::string metrics_to_json(const MetricsReport& report) {
  ojson j;
  j["definitions"] = {
      {"fwt", "acc(cross, later task) - acc(scratch, later task)"},
      {"bwt", "acc(probe, earlier task) - acc(scratch, earlier task)"},
      {"aggregation", "arithmetic mean of accuracies over repetitions"},
      {"nl_unreliable", "baseline-fail subset smaller than 10"},
      {"evaluation", "read-only pool during evaluation unless eval_write is set"}};
  auto arms = ojson::array();
  for (const auto& a : report.arms) {
    ojson aj;
    aj["arm"] = a.arm.name();
    aj["world"] = to_string(a.arm.world);
    aj["condition"] = to_string(a.arm.condition);
    aj["representation"] = to_string(a.arm.representation);
    aj["baseline_A"] = a.baseline_a;
    aj["baseline_B"] = a.baseline_b;
    auto mean = ojson::array();
    for (const auto& m : a.mean) mean.push_back(sequence_json(m));
    aj["mean"] = mean;
    auto reps = ojson::array();
    for (const auto& rep : a.per_rep) {
      auto rj = ojson::array();
      for (const auto& m : rep) rj.push_back(sequence_json(m));
      reps.push_back(rj);
    }
    aj["per_rep"] = reps;
    arms.push_back(aj);
  }
  j["arms"] = arms;
  return j.dump(1) + "\n";
}

std::string fwt_table_csv(const MetricsReport& report) {
  std::string out = "env,cond_repr,sequence,scratch,cross,FWT,delta_RR,delta_NL,nl_unreliable\n";
  for (const auto& a : report.arms) {
    for (const auto& m : a.mean) {
      out += std::string(to_string(a.arm.world)) + "," + arm_label(a.arm) + "," + m.sequence + "," +
             pct(m.acc_scratch_later) + "," + pct(m.acc_cross_later) + "," + pct(m.fwt) + ",";
      out += m.later ? pct(m.later->delta_rr) + "," + pct(m.later->delta_nl) : std::string(",");
      out += m.nl_unreliable ? ",yes\n" : ",no\n";
    }
  }
  return out;
}

std::string bwt_table_csv(const MetricsReport& report) {
  std::string out = "env,cond_repr,sequence,scratch,probe,BWT\n";
  for (const auto& a : report.arms) {
    for (const auto& m : a.mean) {
      out += std::string(to_string(a.arm.world)) + "," + arm_label(a.arm) + "," + m.sequence + "," +
             pct(m.acc_scratch_earlier) + "," + pct(m.acc_probe_earlier) + "," + pct(m.bwt) + "\n";
    }
  }
  return out;
}

std::string cumulative_success_tsv(const MetricsReport& report) {
  std::string out = "arm\trep\trun_type\tphase\tepisode\tcumulative_success\n";
  for (const auto& d : report.dynamics) {
    for (std::size_t i = 0; i < d.cumulative.size(); ++i) {
      out += d.arm.name() + "\t" + std::to_string(d.rep) + "\t" + d.run_type + "\t" + d.phase +
             "\t" + std::to_string(i + 1) + "\t" + num(d.cumulative[i]) + "\n";
    }
  }
  return out;
}

std::string rr_nl_dynamics_tsv(const MetricsReport& report) {
  std::string out = "arm\trep\trun_type\tphase\tmilestone\tRR\tNL\n";
  for (const auto& d : report.dynamics) {
    if (!d.rr_nl) continue;
    for (std::size_t i = 0; i < d.rr_nl->rr.size(); ++i) {
      out += d.arm.name() + "\t" + std::to_string(d.rep) + "\t" + d.run_type + "\t" + d.phase +
             "\t" + std::to_string(i + 1) + "\t" + num(d.rr_nl->rr[i]) + "\t" +
             num(d.rr_nl->nl[i]) + "\n";
    }
  }
  return out;
}

}  // namespace memcl
