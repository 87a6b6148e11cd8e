#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biopatch/error.hpp"
#include "biopatch/sample.hpp"
#include "biopatch/schedule.hpp"

namespace biopatch {

struct Prediction {
  std::string sample_id;
  std::string output;
};

std::vector<Prediction> read_predictions(const std::filesystem::path& path);

std::string trim(std::string_view s);

struct ParseCounter {
  std::size_t failures = 0;
};

/// SR/CR/NR: text after the last answer marker; QA and anything else: the
/// whole output. Both trimmed. A reasoning output without the marker yields
/// "" and bumps `counter`.
std::string parse_final_answer(std::string_view output, TaskKind kind,
                               ParseCounter* counter = nullptr);

int exact_match(std::string_view pred, std::string_view gold);

enum class Knowledge { kKnown, kUnknown };

std::string_view to_string(Knowledge k);

/// Known iff any of exactly five trials was answered correctly.
Knowledge categorize_knowledge(std::span<const bool> trials);

inline constexpr int kFewShotK = 5;
inline constexpr int kFewShotTrials = 5;

/// `trials` prompts of `k` exemplars each. Exemplars are known QA samples
/// from `pool` sharing no person with the target; no exemplar is reused
/// across the trials of one target.
std::vector<std::string> build_fewshot_prompts(const Sample& target, std::span<const Sample> pool,
                                               int k, int trials, std::uint64_t seed);

using AccuracyTable = std::map<std::string, double>;

struct TestCount {
  std::size_t correct = 0;
  std::size_t total = 0;
};

/// Per-model scoring result, also the input unit of aggregate_report.
struct ScoreReport {
  std::string id;
  std::optional<VariantSpec> variant;
  AccuracyTable per_test;
  std::map<std::string, TestCount> counts;
  std::size_t parse_failures = 0;
};

struct ScoreResult {
  ScoreReport report;
  Warnings warnings;
};

/// Every prediction must name a test sample; test samples without a
/// prediction count as wrong and produce a warning.
ScoreResult score_predictions(std::span<const Sample> tests, std::span<const Prediction> preds,
                              std::string id = {});

enum class Grouping { kQa, kReasoning, kPatch };

std::string_view to_string(Grouping g);
Grouping grouping_from_string(std::string_view s);
std::vector<TestGroup> groups_for(Grouping g);

struct GroupStat {
  double mean_delta_pct = 0.0;
  double stderr_pct = 0.0;
  std::size_t n = 0;
  /// One contributing variant; stderr is reported as 0.
  bool single_variant = false;
  std::map<std::string, double> per_variant;
};

struct AggregateReport {
  std::string baseline_id;
  Grouping grouping = Grouping::kQa;
  /// variant id -> test id -> relative change in percent.
  std::map<std::string, std::map<std::string, double>> deltas;
  std::map<TestGroup, GroupStat> groups;
  Warnings warnings;
};

AggregateReport aggregate_report(const ScoreReport& baseline,
                                 std::span<const ScoreReport> variants, Grouping grouping);

json to_json(const ScoreReport& r);
ScoreReport score_report_from_json(const json& j);
json to_json(const AggregateReport& r);
std::string report_csv(const AggregateReport& r);

}  // namespace biopatch
