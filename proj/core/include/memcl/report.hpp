#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "memcl/protocol.hpp"

namespace memcl {

/// Reads a JSON config, applies dotted "key=value" overrides, and validates.
/// Values are parsed as JSON when they can be and taken as strings
/// otherwise. Throws ParseError or ValidationError naming the field path.
RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides = {});

/// Same as load_config but from text already in memory.
RunConfig load_config_text(std::string_view json_text,
                           const std::vector<std::string>& overrides = {});

/// Writes metrics.json, fwt_table.csv, bwt_table.csv, diversity.json,
/// diversity.csv and the plot TSVs into `out_dir`. Returns the file names
/// written, in order. Output bytes depend only on the artifacts.
std::vector<std::string> emit_report(const RunArtifacts& artifacts,
                                     const std::filesystem::path& out_dir);

struct ReplayVerdict {
  bool pass = false;
  std::size_t files_compared = 0;
  // Relative path, 1-based line and both lines at the first mismatch.
  std::string first_divergence;
  std::size_t line = 0;
  std::string expected;
  std::string actual;
};

/// Re-executes the pipeline from the directory's config.json and compares
/// every file byte for byte (the report directory too, when present).
/// Throws ArtifactCorrupt when the directory or its config is unusable.
ReplayVerdict replay(const std::filesystem::path& artifact_dir, int workers = 4);

/// Same comparison between two existing trees.
ReplayVerdict compare_trees(const std::filesystem::path& expected,
                            const std::filesystem::path& actual);

}  // namespace memcl
