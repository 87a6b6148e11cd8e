#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biopatch/corpus.hpp"
#include "biopatch/sample.hpp"

namespace biopatch {

inline constexpr std::string_view kToolkitVersion = "1.0.0";

enum class Strategy { kKeepKnown, kRemoveKnown };

/// Which SFT mixture a variant starts from: QA only (every known person, four
/// QA tasks) or reasoning (12 reasoning tasks for the reasoning split plus QA
/// for the QA split).
enum class Experiment { kQa, kReasoning };

/// kShuffled builds the comparison baseline for a patch spec: the same main
/// and patch samples, mixed uniformly into every epoch.
enum class PatchMode { kGlobalTail, kPerEpochTail, kShuffled };

struct PatchSpec {
  int ratio = 5;
  /// nullopt: the patch covers all types; otherwise that type is excluded.
  std::optional<KType> missing_type;
  PatchMode mode = PatchMode::kGlobalTail;
  int patch_epochs = 3;
};

struct VariantSpec {
  std::string name;
  Experiment experiment = Experiment::kQa;
  std::optional<TaskId> replaced;
  int unknown_fraction = 0;
  Strategy strategy = Strategy::kKeepKnown;
  std::optional<PatchSpec> patch;
  int epochs = 3;
  std::uint64_t seed = 0;

  /// Throws kInvalidArgument on out-of-set percentages, replaced+patch, or a
  /// reasoning task replaced under the QA experiment.
  void validate() const;
};

struct ManifestEntry {
  std::size_t position = 0;
  std::string sample_id;
  int epoch = 0;

  bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
  VariantSpec variant;
  /// Samples per main-data epoch.
  std::size_t budget = 0;
  std::vector<ManifestEntry> entries;
};

/// Minimal view of a sample needed for scheduling.
struct SampleRef {
  std::string id;
  TaskId task;
  KnowledgeClass knowledge_class = KnowledgeClass::kKnown;
};

/// Known and unknown buckets per task, each sorted by sample id (the id-hash
/// rank used for proportion selection).
struct ExperimentData {
  std::map<TaskId, std::vector<SampleRef>> known;
  std::map<TaskId, std::vector<SampleRef>> unknown;

  std::size_t known_total() const;
  std::vector<SampleRef> all_known() const;
};

ExperimentData experiment_data(std::span<const Sample> sft, const ReasoningSplit& split,
                               Experiment experiment);

/// Each epoch is an independent seeded permutation of the full set.
Manifest make_shuffled_baseline(std::span<const std::string> sample_ids, int epochs,
                                std::uint64_t seed);

/// The replaced task keeps round(fraction * n) unknown items; KeepKnown
/// retains the other known items, RemoveKnown drops them. All other tasks are
/// unchanged.
Manifest make_replacement_variant(const ExperimentData& data, TaskId replaced, Strategy strategy,
                                  int unknown_fraction, int epochs, std::uint64_t seed);

/// round(ratio * budget) known samples form the patch and budget minus that
/// many unknown samples form the main data; both are drawn round-robin
/// across tasks in id-rank order. kShuffled mode yields the shuffled
/// baseline over the same selection.
Manifest make_knownpatch_manifest(std::span<const SampleRef> unknown_samples,
                                  std::span<const SampleRef> known_samples,
                                  const PatchSpec& patch, std::size_t budget, int epochs,
                                  std::uint64_t seed);

/// Dispatches on the spec: patch, replacement, or the all-known baseline.
Manifest build_manifest(const VariantSpec& spec, const ExperimentData& data);

enum class TestGroup { kStqa, kDtqa, kStsr, kStdr, kDtdr, kWiki, kSameTypeTest, kOther };

std::string_view to_string(TestGroup g);
TestGroup test_group_from_string(std::string_view s);

/// Relation of a test set ("M_SR", "wiki", ...) to the variant's replaced
/// task or, for patch variants, to the patch coverage.
TestGroup test_group_of(const VariantSpec& variant, std::string_view test_set_id);

std::string_view to_string(Strategy s);
std::string_view to_string(Experiment e);
std::string_view to_string(PatchMode m);

json to_json(const VariantSpec& v);
VariantSpec variant_from_json(const json& j);
json to_json(const Manifest& m);
Manifest manifest_from_json(const json& j);

}  // namespace biopatch
