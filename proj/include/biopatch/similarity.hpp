#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biopatch/corpus.hpp"
#include "biopatch/error.hpp"
#include "biopatch/sample.hpp"
#include "biopatch/schedule.hpp"

namespace biopatch {

/// Lowercased ASCII tokens; any whitespace or ASCII punctuation separates
/// tokens. Bytes >= 0x80 stay inside tokens.
std::vector<std::string> tokenize(std::string_view text);

/// Fraction of b's tokens (with multiplicity) that occur in a. kInvalidArgument
/// when b has no tokens.
double context_similarity(std::string_view a, std::string_view b);

/// Mean similarity of `anchor` against each group context. Contexts without
/// tokens are skipped with a warning; kInvalidArgument if nothing remains.
double group_similarity(std::string_view anchor, std::span<const std::string> group,
                        Warnings* warnings = nullptr);

struct TaskSimilarity {
  std::string anchor;
  std::map<TestGroup, double> groups;
  std::map<TestGroup, std::size_t> pairs;
};

/// Similarity between the anchor task's contexts and those of every test
/// group it induces. Contexts of the same test person are compared; wiki
/// contexts are paired with anchor contexts by position.
TaskSimilarity task_similarity(std::span<const Sample> tests, TaskId anchor,
                               const PromptFormat& format = {}, Warnings* warnings = nullptr);

/// Per-group mean over the given anchors (default: all 12 reasoning tasks).
TaskSimilarity mean_task_similarity(std::span<const Sample> tests,
                                    std::span<const TaskId> anchors,
                                    const PromptFormat& format = {},
                                    Warnings* warnings = nullptr);

std::vector<TaskId> reasoning_tasks();

json to_json(const TaskSimilarity& s);

}  // namespace biopatch
