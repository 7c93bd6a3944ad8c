#include "memcl/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "memcl/error.hpp"
#include "memcl/representation.hpp"

namespace memcl {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string Arm::name() const {
  return std::string(to_string(world)) + "-" + std::string(to_string(representation)) + "-" +
         std::string(to_string(condition));
}

std::size_t TopK::for_condition(Condition c) const {
  switch (c) {
    case Condition::agg: return agg;
    case Condition::ind: return ind;
    default: return step;
  }
}

std::vector<Arm> RunConfig::arms() const {
  std::vector<Arm> out;
  for (auto w : worlds)
    for (auto r : representations)
      for (auto c : conditions) {
        if (r == Representation::raw && c != Condition::agg) continue;
        out.push_back({w, c, r});
      }
  return out;
}

EpisodeParams RunConfig::episode_params(Condition c) const {
  EpisodeParams p;
  p.top_k = top_k.for_condition(c);
  p.step_interval = step_interval;
  p.window = window;
  p.max_steps = max_steps;
  p.overlap_threshold = overlap_threshold;
  p.bm25 = bm25;
  return p;
}

void validate(const RunConfig& c) {
  auto bad = [](const std::string& field, const std::string& why) {
    throw Error(ErrorCode::config_invalid, field + ": " + why);
  };
  if (c.worlds.empty()) bad("world", "at least one world is required");
  if (c.conditions.empty()) bad("condition", "at least one condition is required");
  if (c.representations.empty()) bad("representation", "at least one representation is required");
  if (c.arms().empty()) bad("condition", "no admissible (representation, condition) pair");
  if (c.train_n < 1) bad("train_n", "must be >= 1");
  if (c.test_n < 1) bad("test_n", "must be >= 1");
  if (c.step_interval < 1) bad("step_interval", "must be >= 1");
  if (c.runs < 1) bad("runs", "must be >= 1");
  if (c.top_k.agg < 1) bad("top_k.agg", "must be >= 1");
  if (c.top_k.ind < 1) bad("top_k.ind", "must be >= 1");
  if (c.top_k.step < 1) bad("top_k.step", "must be >= 1");
  if (c.window < 1) bad("window", "must be >= 1");
  if (c.max_steps < 1) bad("max_steps", "must be >= 1");
  if (!(c.overlap_threshold >= 0.0 && c.overlap_threshold <= 1.0))
    bad("overlap_threshold", "must lie in [0,1]");
  if (c.milestones < 1 || c.milestones > c.train_n) bad("milestones", "must lie in [1, train_n]");
  if (c.workers < 1) bad("workers", "must be >= 1");
  if (!(c.bm25.k1 > 0.0)) bad("bm25.k1", "must be positive");
  if (!(c.bm25.b >= 0.0 && c.bm25.b <= 1.0)) bad("bm25.b", "must lie in [0,1]");
  if (c.abstractor != "rule" && c.abstractor != "llm" && c.abstractor != "llm_replay")
    bad("abstractor", "must be one of rule, llm, llm_replay");
  if (c.abstractor == "llm" && c.llm.endpoint.empty()) bad("llm.endpoint", "required for llm");
  if (c.abstractor == "llm_replay" && c.llm.log_path.empty())
    bad("llm.log_path", "required for llm_replay");
  if (c.llm.retries < 0) bad("llm.retries", "must be >= 0");
  if (c.llm.backoff_s < 0.0) bad("llm.backoff_s", "must be >= 0");
}

namespace {

template <class T, class F>
ojson names(const std::vector<T>& values, F f) {
  auto a = ojson::array();
  for (const auto& v : values) a.push_back(std::string(f(v)));
  return a;
}

ojson config_json(const RunConfig& c, bool with_workers) {
  ojson j;
  j["world"] = names(c.worlds, [](WorldKind w) { return to_string(w); });
  j["condition"] = names(c.conditions, [](Condition x) { return to_string(x); });
  j["representation"] = names(c.representations, [](Representation x) { return to_string(x); });
  j["train_n"] = c.train_n;
  j["test_n"] = c.test_n;
  j["seed"] = c.seed;
  j["bm25"] = {{"k1", c.bm25.k1}, {"b", c.bm25.b}};
  j["step_interval"] = c.step_interval;
  j["runs"] = c.runs;
  j["top_k"] = {{"agg", c.top_k.agg}, {"ind", c.top_k.ind}, {"step", c.top_k.step}};
  j["window"] = c.window;
  j["max_steps"] = c.max_steps;
  j["overlap_threshold"] = c.overlap_threshold;
  j["milestones"] = c.milestones;
  j["eval_write"] = c.eval_write;
  j["abstractor"] = c.abstractor;
  // Only the name of the credential variable is ever written.
  j["llm"] = {{"endpoint", c.llm.endpoint}, {"path", c.llm.path},     {"model", c.llm.model},
              {"auth_env", c.llm.auth_env}, {"retries", c.llm.retries}, {"backoff_s", c.llm.backoff_s},
              {"log_path", c.llm.log_path}};
  if (with_workers) j["workers"] = c.workers;
  return j;
}

}  // namespace

std::string config_to_json(const RunConfig& config) { return config_json(config, true).dump(2); }

namespace {

[[noreturn]] void invalid_field(const std::string& path, const std::string& why) {
  throw Error(ErrorCode::validation_error, path + ": " + why);
}

void reject_unknown(const nlohmann::json& obj, const std::string& prefix,
                    std::initializer_list<std::string_view> known) {
  if (!obj.is_object()) invalid_field(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (const auto& item : obj.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end())
      invalid_field(prefix + item.key(), "unknown key");
  }
}

template <class T>
void read_field(const nlohmann::json& obj, const char* key, const std::string& path, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    invalid_field(path, "wrong type");
  }
}

template <class T, class Parse>
void read_list(const nlohmann::json& obj, const char* key, Parse parse, std::vector<T>& out) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  out.clear();
  auto one = [&](const nlohmann::json& x) {
    if (!x.is_string()) invalid_field(key, "expected a string or an array of strings");
    try {
      out.push_back(parse(x.get<std::string>()));
    } catch (const Error& e) {
      invalid_field(key, e.what());
    }
  };
  if (v.is_array()) {
    for (const auto& x : v) one(x);
  } else {
    one(v);
  }
}

}  // namespace

RunConfig config_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::parse_error, std::string("config: ") + ex.what());
  }
  reject_unknown(j, "",
                 {"world", "condition", "representation", "train_n", "test_n", "seed", "bm25",
                  "step_interval", "runs", "top_k", "window", "max_steps", "overlap_threshold",
                  "milestones", "eval_write", "abstractor", "llm", "workers"});
  RunConfig c;
  read_list(j, "world", parse_world, c.worlds);
  read_list(j, "condition", parse_condition, c.conditions);
  read_list(j, "representation", parse_representation, c.representations);
  read_field(j, "train_n", "train_n", c.train_n);
  read_field(j, "test_n", "test_n", c.test_n);
  read_field(j, "seed", "seed", c.seed);
  if (j.contains("bm25")) {
    const auto& b = j["bm25"];
    reject_unknown(b, "bm25.", {"k1", "b"});
    read_field(b, "k1", "bm25.k1", c.bm25.k1);
    read_field(b, "b", "bm25.b", c.bm25.b);
  }
  read_field(j, "step_interval", "step_interval", c.step_interval);
  read_field(j, "runs", "runs", c.runs);
  if (j.contains("top_k")) {
    const auto& k = j["top_k"];
    reject_unknown(k, "top_k.", {"agg", "ind", "step"});
    read_field(k, "agg", "top_k.agg", c.top_k.agg);
    read_field(k, "ind", "top_k.ind", c.top_k.ind);
    read_field(k, "step", "top_k.step", c.top_k.step);
  }
  read_field(j, "window", "window", c.window);
  read_field(j, "max_steps", "max_steps", c.max_steps);
  read_field(j, "overlap_threshold", "overlap_threshold", c.overlap_threshold);
  read_field(j, "milestones", "milestones", c.milestones);
  read_field(j, "eval_write", "eval_write", c.eval_write);
  read_field(j, "abstractor", "abstractor", c.abstractor);
  if (j.contains("llm")) {
    const auto& l = j["llm"];
    reject_unknown(l, "llm.",
                   {"endpoint", "path", "model", "auth_env", "retries", "backoff_s", "log_path"});
    read_field(l, "endpoint", "llm.endpoint", c.llm.endpoint);
    read_field(l, "path", "llm.path", c.llm.path);
    read_field(l, "model", "llm.model", c.llm.model);
    read_field(l, "auth_env", "llm.auth_env", c.llm.auth_env);
    read_field(l, "retries", "llm.retries", c.llm.retries);
    read_field(l, "backoff_s", "llm.backoff_s", c.llm.backoff_s);
    read_field(l, "log_path", "llm.log_path", c.llm.log_path);
  }
  read_field(j, "workers", "workers", c.workers);
  return c;
}

std::string config_hash(const RunConfig& config) {
  const auto text = config_json(config, false).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const PhaseLog* RunLog::phase(std::string_view name) const {
  for (const auto& p : phases)
    if (p.name == name) return &p;
  return nullptr;
}

fs::path RunLog::relative_dir() const {
  return fs::path(arm.name()) / ("rep" + std::to_string(rep)) / run_type;
}

const RunLog* RunArtifacts::find(const Arm& arm, int rep, std::string_view run_type) const {
  for (const auto& r : runs)
    if (r.arm == arm && r.rep == rep && r.run_type == run_type) return &r;
  return nullptr;
}

ProbeResult eval_probe(const ExperiencePool& pool, const std::vector<TaskInstance>& test_set,
                       Condition condition, const EpisodeParams& params, std::uint64_t seed) {
  Bm25Index index;
  index.sync(pool);
  ProbeResult out;
  out.episodes.reserve(test_set.size());
  for (const auto& inst : test_set) {
    auto rec = run_episode(inst, PoolView{&pool, &index}, condition, params, seed, inst.id);
    out.outcomes.push_back({inst.id, rec.outcome});
    out.episodes.push_back(std::move(rec));
  }
  return out;
}

namespace {

std::string family_suffix(Family f) { return std::string(to_string(f)); }

// "cross_BA" -> B: the task named right after the underscore runs first.
Family first_family(std::string_view run_type) {
  return run_type[run_type.find('_') + 1] == 'A' ? Family::A : Family::B;
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::artifact_corrupt, "cannot write " + path.string());
  out << text;
}

std::string read_file(const fs::path& path, const std::string& label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::incomplete_artifacts, label);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Sink {
  std::string episodes;
  std::string retrievals;
};

EpisodeSummary summarize(const EpisodeRecord& rec) {
  return {rec.episode_id, rec.instance_id, rec.outcome, rec.trace.size(), rec.executed};
}

void record(PhaseLog& phase, Sink& sink, EpisodeRecord&& rec) {
  sink.episodes += episode_to_jsonl(rec);
  sink.episodes += '\n';
  for (auto& e : rec.retrievals) {
    sink.retrievals += event_to_jsonl(e);
    sink.retrievals += '\n';
  }
  phase.episodes.push_back(summarize(rec));
  for (auto& e : rec.retrievals) phase.retrievals.push_back(std::move(e));
}

std::string eval_to_json(const EvalResult& e, bool eval_write) {
  ojson j;
  j["task"] = family_suffix(e.task);
  j["milestone"] = e.milestone;
  j["milestones"] = e.milestones;
  j["train_episodes_seen"] = e.train_episodes_seen;
  j["pool_snapshot"] = e.pool_snapshot;
  j["pool_units"] = e.pool_units;
  j["eval_write"] = eval_write;
  std::size_t successes = 0;
  auto outcomes = ojson::array();
  for (const auto& o : e.outcomes) {
    successes += o.outcome == Outcome::success;
    outcomes.push_back({{"instance_id", o.instance_id}, {"outcome", to_string(o.outcome)}});
  }
  j["n"] = e.outcomes.size();
  j["successes"] = successes;
  j["outcomes"] = outcomes;
  return j.dump(1) + "\n";
}

EvalResult eval_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  EvalResult e;
  e.task = parse_family(j.at("task").get<std::string>());
  e.milestone = j.at("milestone").get<int>();
  e.milestones = j.at("milestones").get<int>();
  e.train_episodes_seen = j.at("train_episodes_seen").get<std::size_t>();
  e.pool_snapshot = j.at("pool_snapshot").get<std::string>();
  e.pool_units = j.at("pool_units").get<std::size_t>();
  for (const auto& o : j.at("outcomes"))
    e.outcomes.push_back({o.at("instance_id").get<std::string>(),
                          parse_outcome(o.at("outcome").get<std::string>())});
  if (e.outcomes.size() != j.at("n").get<std::size_t>())
    throw Error(ErrorCode::artifact_corrupt, "eval.json outcome count disagrees with n");
  return e;
}

std::string eval_phase_name(Family task, int milestone, int milestones) {
  std::string name = "eval_" + family_suffix(task);
  if (milestone < milestones) name += "_m" + std::to_string(milestone);
  return name;
}

std::string pool_file(int milestone, int milestones) {
  return milestone < milestones ? "pool_m" + std::to_string(milestone) + ".jsonl" : "pool.jsonl";
}

// Phase names a run type produces, in execution order.
std::vector<std::pair<std::string, Family>> expected_phases(std::string_view run_type,
                                                            int milestones) {
  std::vector<std::pair<std::string, Family>> out;
  auto train = [&](Family f) {
    out.emplace_back("train_" + family_suffix(f), f);
    for (int m = 1; m <= milestones; ++m) out.emplace_back(eval_phase_name(f, m, milestones), f);
  };
  const Family first = first_family(run_type);
  if (run_type.starts_with("baseline")) {
    out.emplace_back("eval_" + family_suffix(first), first);
  } else if (run_type.starts_with("scratch")) {
    train(first);
  } else {
    const Family second = first == Family::A ? Family::B : Family::A;
    train(first);
    train(second);
    out.emplace_back("probe_" + family_suffix(first), first);
  }
  return out;
}

// Human label used in IncompleteArtifacts messages, e.g. "probe:B→A".
std::string missing_label(std::string_view run_type, std::string_view phase) {
  if (run_type.starts_with("baseline")) return "baseline:" + std::string(run_type.substr(9));
  if (run_type.starts_with("scratch")) return "scratch:" + std::string(run_type.substr(8));
  const std::string seq = std::string(1, run_type[6]) + "→" + std::string(1, run_type[7]);
  return (phase.starts_with("probe") ? "probe:" : "cross:") + seq;
}

struct RunJob {
  Arm arm;
  int rep;
  std::string run_type;
};

std::unique_ptr<Abstractor> make_abstractor(const RunConfig& config, const SkillSchema& schema,
                                            std::unique_ptr<CompletionClient>& client) {
  if (config.abstractor == "rule") return std::make_unique<RuleAbstractor>(schema);
  if (config.abstractor == "llm")
    client = std::make_unique<HttpCompletionClient>(config.llm);
  else
    client = ReplayCompletionClient::from_file(config.llm.log_path);
  return std::make_unique<LlmAbstractor>(schema, *client);
}

class RunExecutor {
 public:
  RunExecutor(const RunConfig& config, const RunJob& job, const fs::path& run_dir)
      : config_(config),
        job_(job),
        dir_(run_dir),
        schema_(schema_for(job.arm.world)),
        params_(config.episode_params(job.arm.condition)),
        seed_(config.seed + static_cast<std::uint64_t>(job.rep)),
        pool_(job.arm.condition, job.arm.representation) {
    abstractor_ = make_abstractor(config, schema_, client_);
  }

  RunLog execute() {
    RunLog log{job_.arm, job_.rep, job_.run_type, {}};
    const auto& rt = job_.run_type;
    const Family first = first_family(rt);
    const Family second = first == Family::A ? Family::B : Family::A;
    if (rt.starts_with("baseline")) {
      log.phases.push_back(baseline(first));
    } else if (rt.starts_with("scratch")) {
      train(first, log);
    } else {
      train(first, log);
      train(second, log);
      log.phases.push_back(evaluate("probe_" + family_suffix(first), first, config_.milestones,
                                    config_.milestones, last_snapshot_));
    }
    return log;
  }

 private:
  std::vector<TaskInstance> test_set(Family f) const {
    return generate_tasks(job_.arm.world, f, config_.test_n, config_.seed, "test");
  }

  PhaseLog baseline(Family f) {
    PhaseLog phase{"eval_" + family_suffix(f), f, false, {}, {}, 0, std::nullopt};
    Sink sink;
    EvalResult eval{f, 1, 1, 0, "", 0, {}};
    for (const auto& inst : test_set(f)) {
      auto rec = run_episode(inst, std::nullopt, job_.arm.condition, params_, seed_, inst.id);
      eval.outcomes.push_back({inst.id, rec.outcome});
      record(phase, sink, std::move(rec));
    }
    phase.eval = std::move(eval);
    flush(phase, sink);
    return phase;
  }

  void insert(const EpisodeRecord& rec, ExperiencePool& pool, std::string_view task) {
    const auto traj = rec.trajectory();
    const Provenance prov{std::string(task), rec.episode_id, rec.outcome};
    if (pool.representation() == Representation::raw)
      pool.insert_episode(rec.instruction, raw_payload(traj), prov);
    else
      pool.insert_episode(rec.instruction, abstractor_->distill(traj), prov);
  }

  void train(Family f, RunLog& log) {
    const auto train_set =
        generate_tasks(job_.arm.world, f, config_.train_n, seed_, "train");
    PhaseLog phase{"train_" + family_suffix(f), f, true, {}, {}, 0, std::nullopt};
    Sink sink;
    const int m = config_.milestones;
    std::vector<PhaseLog> evals;
    int next_milestone = 1;
    const std::string task = family_suffix(f);
    for (std::size_t i = 0; i < train_set.size(); ++i) {
      const auto& inst = train_set[i];
      auto rec = run_episode(inst, PoolView{&pool_, &index_}, job_.arm.condition, params_, seed_,
                             inst.id);
      insert(rec, pool_, task);
      index_.sync(pool_);
      record(phase, sink, std::move(rec));
      // Milestone k closes after floor(k * n / m) training episodes.
      while (next_milestone < m &&
             i + 1 == static_cast<std::size_t>(next_milestone) * train_set.size() /
                          static_cast<std::size_t>(m)) {
        const auto snap = phase.name + "/" + pool_file(next_milestone, m);
        write_file(dir_ / snap, pool_snapshot(pool_));
        evals.push_back(evaluate(eval_phase_name(f, next_milestone, m), f, next_milestone, m, snap,
                                 i + 1));
        ++next_milestone;
      }
    }
    phase.pool_units = pool_.size();
    last_snapshot_ = phase.name + "/pool.jsonl";
    write_file(dir_ / last_snapshot_, pool_snapshot(pool_));
    flush(phase, sink);
    log.phases.push_back(std::move(phase));
    for (auto& e : evals) log.phases.push_back(std::move(e));
    log.phases.push_back(
        evaluate(eval_phase_name(f, m, m), f, m, m, last_snapshot_, train_set.size()));
  }

  PhaseLog evaluate(const std::string& name, Family f, int milestone, int milestones,
                    const std::string& snapshot, std::size_t seen = 0) {
    PhaseLog phase{name, f, false, {}, {}, pool_.size(), std::nullopt};
    Sink sink;
    EvalResult eval{f, milestone, milestones, seen, "../" + snapshot, pool_.size(), {}};
    // Evaluation never writes to the training pool; with eval_write the
    // episodes accumulate in a throwaway copy instead.
    std::optional<ExperiencePool> scratch;
    std::optional<Bm25Index> scratch_index;
    if (config_.eval_write) {
      scratch = pool_;
      scratch_index.emplace();
      scratch_index->sync(*scratch);
    }
    for (const auto& inst : test_set(f)) {
      const PoolView view = scratch ? PoolView{&*scratch, &*scratch_index} : PoolView{&pool_, &index_};
      auto rec = run_episode(inst, view, job_.arm.condition, params_, seed_, inst.id);
      eval.outcomes.push_back({inst.id, rec.outcome});
      if (scratch) {
        insert(rec, *scratch, family_suffix(f));
        scratch_index->sync(*scratch);
      }
      record(phase, sink, std::move(rec));
    }
    phase.eval = std::move(eval);
    flush(phase, sink);
    return phase;
  }

  void flush(const PhaseLog& phase, const Sink& sink) {
    const auto d = dir_ / phase.name;
    write_file(d / "episodes.jsonl", sink.episodes);
    write_file(d / "retrieval.jsonl", sink.retrievals);
    if (phase.eval) write_file(d / "eval.json", eval_to_json(*phase.eval, config_.eval_write));
  }

  const RunConfig& config_;
  RunJob job_;
  fs::path dir_;
  const SkillSchema& schema_;
  EpisodeParams params_;
  std::uint64_t seed_;
  ExperiencePool pool_;
  Bm25Index index_;
  std::unique_ptr<CompletionClient> client_;
  std::unique_ptr<Abstractor> abstractor_;
  std::string last_snapshot_;
};

}  // namespace

RunArtifacts run_matrix(const RunConfig& config, const fs::path& out_root) {
  validate(config);
  RunArtifacts art;
  art.config = config;
  art.config_hash = config_hash(config);
  art.dir = out_root / "runs" / art.config_hash;
  write_file(art.dir / "config.json", config_json(config, false).dump(2) + "\n");

  std::vector<RunJob> jobs;
  for (const auto& arm : config.arms())
    for (int r = 0; r < config.runs; ++r)
      for (const char* rt : kRunTypes) jobs.push_back({arm, r, rt});

  std::vector<RunLog> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        const auto dir = art.dir / RunLog{jobs[i].arm, jobs[i].rep, jobs[i].run_type, {}}.relative_dir();
        results[i] = RunExecutor(config, jobs[i], dir).execute();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(config.workers), jobs.size());
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  art.runs = std::move(results);
  return art;
}

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    out.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  return out;
}

EpisodeSummary episode_from_jsonl(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  EpisodeSummary s;
  s.episode_id = j.at("episode_id").get<std::string>();
  s.instance_id = j.at("instance_id").get<std::string>();
  s.outcome = parse_outcome(j.at("outcome").get<std::string>());
  s.steps = j.at("steps").get<std::size_t>();
  s.executed = j.at("executed").get<std::vector<std::string>>();
  return s;
}

}  // namespace

RunArtifacts load_artifacts(const fs::path& dir) {
  RunArtifacts art;
  art.dir = dir;
  art.config = config_from_json(read_file(dir / "config.json", "config"));
  validate(art.config);
  art.config_hash = config_hash(art.config);
  for (const auto& arm : art.config.arms()) {
    for (int r = 0; r < art.config.runs; ++r) {
      for (const char* rt : kRunTypes) {
        RunLog log{arm, r, rt, {}};
        const auto run_dir = dir / log.relative_dir();
        for (const auto& [name, fam] : expected_phases(rt, art.config.milestones)) {
          const auto label = missing_label(rt, name);
          const auto pdir = run_dir / name;
          PhaseLog phase{name, fam, name.starts_with("train"), {}, {}, 0, std::nullopt};
          try {
            for (const auto& line : lines_of(read_file(pdir / "episodes.jsonl", label)))
              phase.episodes.push_back(episode_from_jsonl(line));
            for (const auto& line : lines_of(read_file(pdir / "retrieval.jsonl", label)))
              phase.retrievals.push_back(event_from_jsonl(line));
            if (phase.training) {
              phase.pool_units = pool_restore(read_file(pdir / "pool.jsonl", label)).size();
            } else {
              phase.eval = eval_from_json(read_file(pdir / "eval.json", label));
              phase.pool_units = phase.eval->pool_units;
            }
          } catch (const nlohmann::json::exception& ex) {
            throw Error(ErrorCode::artifact_corrupt, (pdir.string() + ": ") + ex.what());
          } catch (const Error& ex) {
            if (ex.code() == ErrorCode::incomplete_artifacts) throw;
            throw Error(ErrorCode::artifact_corrupt, pdir.string() + ": " + ex.what());
          }
          log.phases.push_back(std::move(phase));
        }
        art.runs.push_back(std::move(log));
      }
    }
  }
  return art;
}

}  // namespace memcl
