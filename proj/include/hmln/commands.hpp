#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hmln/config.hpp"
#include "hmln/error.hpp"

namespace hmln {

/// Writes `content` to a sibling temp file, then renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// 0 success, 2 validation failure, 3 input error, 1 internal failure.
int exit_code_for(ErrorKind kind);

/// One-line JSON diagnostic for standard error.
std::string diagnostic(const std::exception& e);

/// Learns one weight vector per test instance. Writes weights.json and trace_<test>.csv.
void cmd_learn(const RunConfig& cfg);

/// Quantifies bias for every test instance. Writes report.json and report.md.
void cmd_explain(const RunConfig& cfg);

struct ValidateOptions {
    bool list = false;
    std::vector<std::string> only;
};

/// Loads any configured inputs and checkpoint, then runs the oracle checks and prints a
/// table. Returns 0 when everything passes, 2 otherwise.
int cmd_validate(const RunConfig& cfg, const ValidateOptions& options, std::ostream& out);

/// Writes corpus.jsonl, embeddings.jsonl, test.jsonl, planted.json and config.json to `dir`.
void cmd_synth(std::uint64_t seed, std::size_t size, const std::filesystem::path& dir);

}  // namespace hmln
