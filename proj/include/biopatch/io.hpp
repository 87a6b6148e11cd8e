#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace biopatch {

using json = nlohmann::json;

std::string read_text(const std::filesystem::path& path);

/// Lines without their terminators; a trailing empty line is dropped.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// One JSON value per non-blank line. Malformed lines raise kParse with the
/// 1-based line number in the message.
std::vector<json> read_jsonl(const std::filesystem::path& path);

json read_json(const std::filesystem::path& path);

/// Compact single-line dump with sorted keys and raw UTF-8.
std::string dump_compact(const json& value);
/// Indented dump used for human-facing documents.
std::string dump_pretty(const json& value);

/// Collects files written by one command. Each file is staged under a
/// temporary name and renamed into place by commit(); if the transaction is
/// destroyed without commit, staged and already-renamed files are removed.
class OutputTransaction {
 public:
  OutputTransaction() = default;
  OutputTransaction(const OutputTransaction&) = delete;
  OutputTransaction& operator=(const OutputTransaction&) = delete;
  ~OutputTransaction();

  void write(const std::filesystem::path& path, std::string_view content);
  void commit();

  const std::vector<std::filesystem::path>& targets() const { return targets_; }

 private:
  std::vector<std::filesystem::path> staged_;
  std::vector<std::filesystem::path> targets_;
  bool committed_ = false;
};

/// 128-bit content digest as 32 hex digits (two independent FNV-1a lanes).
std::string digest_bytes(std::string_view bytes);
std::string digest_file(const std::filesystem::path& path);

/// Worker count: hardware concurrency capped by BIOPATCH_THREADS when set.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) across worker_count() threads. fn must only
/// write to slots owned by index i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace biopatch
