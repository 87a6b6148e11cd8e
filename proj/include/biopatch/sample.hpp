#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biopatch/io.hpp"
#include "biopatch/persona.hpp"

namespace biopatch {

enum class Stage { kCpt, kSft, kTest };
enum class TaskKind { kQa, kSr, kCr, kNr, kBio, kAux };
enum class KType { kB, kD, kM, kU, kNone };
enum class KnowledgeClass { kKnown, kUnknown, kTest, kExternal };

inline constexpr std::array<KType, 4> kKnowledgeTypes = {KType::kB, KType::kD, KType::kM,
                                                         KType::kU};
inline constexpr std::array<TaskKind, 3> kReasoningKinds = {TaskKind::kSr, TaskKind::kCr,
                                                            TaskKind::kNr};

std::string_view to_string(Stage s);
std::string_view to_string(TaskKind t);
std::string_view to_string(KType k);
std::string_view to_string(KnowledgeClass c);

Stage stage_from_string(std::string_view s);
TaskKind task_kind_from_string(std::string_view s);
KType ktype_from_string(std::string_view s);
KnowledgeClass knowledge_class_from_string(std::string_view s);

bool is_reasoning(TaskKind t);

/// One of the 16 per-type tasks (B_QA .. U_NR).
struct TaskId {
  KType ktype = KType::kB;
  TaskKind kind = TaskKind::kQa;

  std::string str() const;
  auto operator<=>(const TaskId&) const = default;
};

TaskId task_id_from_string(std::string_view s);

/// All 16 tasks in (ktype, kind) order, QA first within each type.
std::vector<TaskId> all_tasks();

inline constexpr std::string_view kWikiTestSet = "wiki";
inline constexpr std::string_view kAnswerMarker = "The answer is:";

struct Sample {
  std::string id;
  Stage stage = Stage::kSft;
  TaskKind task_kind = TaskKind::kQa;
  KType ktype = KType::kNone;
  std::string question;
  /// Final answer; for BIO and AUX samples this holds the rendered text.
  std::string answer;
  std::string cot;
  std::vector<PersonId> person_ids;
  KnowledgeClass knowledge_class = KnowledgeClass::kKnown;

  bool operator==(const Sample&) const = default;
};

/// Lowercase hex digest of (task_kind, ktype, question, answer).
std::string make_sample_id(TaskKind kind, KType ktype, std::string_view question,
                           std::string_view answer);

/// Sets s.id from its content.
void assign_id(Sample& s);

/// "M_SR"-style test-set id, or "wiki" for external samples. Throws kUnknownId
/// for BIO/AUX samples.
std::string test_set_id(const Sample& s);

json to_json(const Sample& s);
Sample sample_from_json(const json& j);

/// JSONL with records sorted by id.
std::string samples_jsonl(std::vector<Sample> samples);
std::vector<Sample> read_samples(const std::filesystem::path& path);

}  // namespace biopatch
