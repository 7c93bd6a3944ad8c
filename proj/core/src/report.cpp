#include "memcl/report.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "json.hpp"
#include "memcl/diagnostics.hpp"
#include "memcl/error.hpp"
#include "memcl/metrics.hpp"

namespace memcl {

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::parse_error, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void apply_override(nlohmann::json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw Error(ErrorCode::validation_error, "override '" + assignment + "' is not key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception&) {
    value = raw;
  }
  nlohmann::json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw Error(ErrorCode::validation_error, path + ": empty key segment");
    if (!node->is_object())
      throw Error(ErrorCode::validation_error, path + ": parent is not an object");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = nlohmann::json::object();
    start = dot + 1;
  }
}

}  // namespace

RunConfig load_config_text(std::string_view json_text, const std::vector<std::string>& overrides) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::parse_error, std::string("config: ") + ex.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::validation_error, "<root>: expected an object");
  for (const auto& o : overrides) apply_override(j, o);
  RunConfig c = config_from_json(j.dump());
  try {
    validate(c);
  } catch (const Error& e) {
    throw Error(ErrorCode::validation_error, e.what());
  }
  return c;
}

RunConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  return load_config_text(slurp(path), overrides);
}

std::vector<std::string> emit_report(const RunArtifacts& artifacts, const fs::path& out_dir) {
  const auto metrics = compute_metrics(artifacts);
  const auto panels = diagnose(artifacts);
  const std::vector<std::pair<std::string, std::string>> files = {
      {"metrics.json", metrics_to_json(metrics)},
      {"fwt_table.csv", fwt_table_csv(metrics)},
      {"bwt_table.csv", bwt_table_csv(metrics)},
      {"diversity.json", diversity_to_json(panels)},
      {"diversity.csv", diversity_csv(panels)},
      {"diversity.tsv", diversity_tsv(panels)},
      {"cumulative_success.tsv", cumulative_success_tsv(metrics)},
      {"rr_nl_dynamics.tsv", rr_nl_dynamics_tsv(metrics)},
  };
  fs::create_directories(out_dir);
  std::vector<std::string> names;
  for (const auto& [name, text] : files) {
    std::ofstream out(out_dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::artifact_corrupt, "cannot write " + (out_dir / name).string());
    out << text;
    names.push_back(name);
  }
  return names;
}

namespace {

std::vector<std::string> relative_files(const fs::path& root) {
  std::vector<std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file()) out.push_back(fs::relative(entry.path(), root).generic_string());
  std::sort(out.begin(), out.end());
  return out;
}

// Fills line/expected/actual for the first differing line of two texts.
void locate_line(const std::string& a, const std::string& b, ReplayVerdict& v) {
  std::istringstream sa(a), sb(b);
  std::string la, lb;
  std::size_t line = 0;
  while (true) {
    const bool ga = static_cast<bool>(std::getline(sa, la));
    const bool gb = static_cast<bool>(std::getline(sb, lb));
    ++line;
    if (!ga && !gb) break;
    if (ga != gb || la != lb) {
      v.line = line;
      v.expected = ga ? la : "<end of file>";
      v.actual = gb ? lb : "<end of file>";
      return;
    }
  }
  // Only trailing bytes differ (for example a missing final newline).
  v.line = line;
  v.expected = "<trailing bytes>";
  v.actual = "<trailing bytes>";
}

}  // namespace

ReplayVerdict compare_trees(const fs::path& expected, const fs::path& actual) {
  ReplayVerdict v;
  const auto want = relative_files(expected);
  const auto got = relative_files(actual);
  std::size_t i = 0, j = 0;
  while (i < want.size() || j < got.size()) {
    if (j >= got.size() || (i < want.size() && want[i] < got[j])) {
      v.first_divergence = want[i];
      v.expected = "<file present>";
      v.actual = "<file missing>";
      return v;
    }
    if (i >= want.size() || got[j] < want[i]) {
      v.first_divergence = got[j];
      v.expected = "<file missing>";
      v.actual = "<file present>";
      return v;
    }
    const auto a = slurp(expected / want[i]);
    const auto b = slurp(actual / got[j]);
    ++v.files_compared;
    if (a != b) {
      v.first_divergence = want[i];
      locate_line(a, b, v);
      return v;
    }
    ++i;
    ++j;
  }
  v.pass = true;
  return v;
}

ReplayVerdict replay(const fs::path& artifact_dir, int workers) {
  if (!fs::is_directory(artifact_dir))
    throw Error(ErrorCode::artifact_corrupt, artifact_dir.string() + " is not a directory");
  RunConfig config;
  try {
    config = load_config(artifact_dir / "config.json");
  } catch (const Error& e) {
    throw Error(ErrorCode::artifact_corrupt, std::string("config.json: ") + e.what());
  }
  config.workers = workers;

  static std::atomic<unsigned> counter{0};
  const auto scratch = fs::temp_directory_path() /
                       ("memcl-replay-" + std::to_string(::getpid()) + "-" +
                        std::to_string(counter++));
  fs::remove_all(scratch);
  ReplayVerdict verdict;
  try {
    const auto fresh = run_matrix(config, scratch);
    if (fs::exists(artifact_dir / "report"))
      emit_report(load_artifacts(fresh.dir), fresh.dir / "report");
    verdict = compare_trees(artifact_dir, fresh.dir);
  } catch (...) {
    fs::remove_all(scratch);
    throw;
  }
  fs::remove_all(scratch);
  return verdict;
}

}  // namespace memcl
