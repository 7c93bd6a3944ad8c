#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "memcl/diagnostics.hpp"
#include "memcl/error.hpp"
#include "memcl/metrics.hpp"
#include "memcl/protocol.hpp"
#include "memcl/report.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw memcl::Error(memcl::ErrorCode::parse_error, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_run(const std::string& config_path, const std::string& out, std::vector<std::string> sets,
            int workers, bool with_report) {
  memcl::RunConfig config = config_path.empty() ? memcl::load_config_text("{}", sets)
                                                : memcl::load_config(config_path, sets);
  if (workers > 0) config.workers = workers;
  const auto t0 = std::chrono::steady_clock::now();
  const auto art = memcl::run_matrix(config, out);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "artifacts: " << art.dir.string() << "\n";
  std::cout << "runs: " << art.runs.size() << "  wall: " << secs << " s\n";
  if (with_report) {
    const auto loaded = memcl::load_artifacts(art.dir);
    memcl::emit_report(loaded, art.dir / "report");
    std::cout << memcl::fwt_table_csv(memcl::compute_metrics(loaded));
  }
  return 0;
}

int cmd_eval(const std::string& pool_path, const std::string& world, const std::string& task,
             int test_n, std::uint64_t seed) {
  const auto pool = memcl::pool_restore(read_text(pool_path));
  memcl::RunConfig defaults;
  const auto tests = memcl::generate_tasks(memcl::parse_world(world), memcl::parse_family(task),
                                           test_n, seed, "test");
  const auto result = memcl::eval_probe(pool, tests, pool.condition(),
                                        defaults.episode_params(pool.condition()), seed);
  nlohmann::ordered_json j;
  j["pool_units"] = pool.size();
  j["accuracy"] = memcl::accuracy(result.outcomes);
  auto outcomes = nlohmann::ordered_json::array();
  for (const auto& o : result.outcomes)
    outcomes.push_back({{"instance_id", o.instance_id}, {"outcome", memcl::to_string(o.outcome)}});
  j["outcomes"] = outcomes;
  std::cout << j.dump(1) << "\n";
  return 0;
}

int cmd_diagnose(const std::string& dir) {
  const auto art = memcl::load_artifacts(dir);
  std::cout << memcl::diversity_to_json(memcl::diagnose(art));
  return 0;
}

int cmd_report(const std::string& dir, const std::string& out) {
  const auto art = memcl::load_artifacts(dir);
  const fs::path target = out.empty() ? fs::path(dir) / "report" : fs::path(out);
  for (const auto& name : memcl::emit_report(art, target))
    std::cout << (target / name).string() << "\n";
  return 0;
}

int cmd_replay(const std::string& dir, int workers) {
  const auto v = memcl::replay(dir, workers > 0 ? workers : 4);
  if (v.pass) {
    std::cout << "PASS (" << v.files_compared << " files identical)\n";
    return 0;
  }
  std::cout << "FAIL at " << v.first_divergence;
  if (v.line) std::cout << ":" << v.line;
  std::cout << "\n  expected: " << v.expected << "\n  actual:   " << v.actual << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memcl: continual-learning harness for memory-augmented agents"};
  app.require_subcommand(1);

  std::string config_path, out = ".", artifacts, pool_path, world = "cleanplace", task = "A";
  std::vector<std::string> sets;
  int workers = 0, test_n = 100;
  std::uint64_t seed = 42;
  bool with_report = false;

  auto* run = app.add_subcommand("run", "execute the experimental matrix");
  run->add_option("--config", config_path, "JSON config file (defaults when omitted)");
  run->add_option("--out", out, "output root; artifacts go to <out>/runs/<hash>");
  run->add_option("--set", sets, "dotted key=value override, repeatable");
  run->add_option("--workers", workers, "parallel runs (default from config)");
  run->add_flag("--report", with_report, "emit the report after running");

  auto* eval = app.add_subcommand("eval", "probe a pool snapshot on a fresh test set");
  eval->add_option("--pool", pool_path, "pool.jsonl snapshot")->required();
  eval->add_option("--world", world, "cleanplace or gridfind");
  eval->add_option("--task", task, "A or B");
  eval->add_option("--test-n", test_n, "test instances");
  eval->add_option("--seed", seed, "test-set seed");

  auto* diagnose = app.add_subcommand("diagnose", "retrieval diversity report to stdout");
  diagnose->add_option("--artifacts", artifacts, "runs/<hash> directory")->required();

  auto* report = app.add_subcommand("report", "write tables, metrics and plot data");
  report->add_option("--artifacts", artifacts, "runs/<hash> directory")->required();
  report->add_option("--out", out, "output directory (default <artifacts>/report)");

  auto* replay = app.add_subcommand("replay", "re-execute and compare byte for byte");
  replay->add_option("--artifacts", artifacts, "runs/<hash> directory")->required();
  replay->add_option("--workers", workers, "parallel runs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, out, sets, workers, with_report);
    if (*eval) return cmd_eval(pool_path, world, task, test_n, seed);
    if (*diagnose) return cmd_diagnose(artifacts);
    if (*report) return cmd_report(artifacts, report->count("--out") ? out : "");
    if (*replay) return cmd_replay(artifacts, workers);
  } catch (const memcl::Error& e) {
    std::cerr << "error [" << memcl::to_string(e.code()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
