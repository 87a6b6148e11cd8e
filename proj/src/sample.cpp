#include "biopatch/sample.hpp"

#include <algorithm>

#include "biopatch/error.hpp"
#include "biopatch/rng.hpp"

namespace biopatch {

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::kCpt: return "CPT";
    case Stage::kSft: return "SFT";
    case Stage::kTest: return "TEST";
  }
  return "?";
}

std::string_view to_string(TaskKind t) {
  switch (t) {
    case TaskKind::kQa: return "QA";
    case TaskKind::kSr: return "SR";
    case TaskKind::kCr: return "CR";
    case TaskKind::kNr: return "NR";
    case TaskKind::kBio: return "BIO";
    case TaskKind::kAux: return "AUX";
  }
  return "?";
}

std::string_view to_string(KType k) {
  switch (k) {
    case KType::kB: return "B";
    case KType::kD: return "D";
    case KType::kM: return "M";
    case KType::kU: return "U";
    case KType::kNone: return "NONE";
  }
  return "?";
}

std::string_view to_string(KnowledgeClass c) {
  switch (c) {
    case KnowledgeClass::kKnown: return "known";
    case KnowledgeClass::kUnknown: return "unknown";
    case KnowledgeClass::kTest: return "test";
    case KnowledgeClass::kExternal: return "external";
  }
  return "?";
}

Stage stage_from_string(std::string_view s) {
  for (auto v : {Stage::kCpt, Stage::kSft, Stage::kTest})
    if (to_string(v) == s) return v;
  throw Error(ErrorCode::kFormat, "unknown stage '" + std::string(s) + "'");
}

TaskKind task_kind_from_string(std::string_view s) {
  for (auto v : {TaskKind::kQa, TaskKind::kSr, TaskKind::kCr, TaskKind::kNr, TaskKind::kBio,
                 TaskKind::kAux})
    if (to_string(v) == s) return v;
  throw Error(ErrorCode::kFormat, "unknown task kind '" + std::string(s) + "'");
}

KType ktype_from_string(std::string_view s) {
  for (auto v : {KType::kB, KType::kD, KType::kM, KType::kU, KType::kNone})
    if (to_string(v) == s) return v;
  throw Error(ErrorCode::kFormat, "unknown knowledge type '" + std::string(s) + "'");
}

KnowledgeClass knowledge_class_from_string(std::string_view s) {
  for (auto v : {KnowledgeClass::kKnown, KnowledgeClass::kUnknown, KnowledgeClass::kTest,
                 KnowledgeClass::kExternal})
    if (to_string(v) == s) return v;
  throw Error(ErrorCode::kFormat, "unknown knowledge class '" + std::string(s) + "'");
}

bool is_reasoning(TaskKind t) {
  return t == TaskKind::kSr || t == TaskKind::kCr || t == TaskKind::kNr;
}

std::string TaskId::str() const {
  return std::string(to_string(ktype)) + "_" + std::string(to_string(kind));
}

TaskId task_id_from_string(std::string_view s) {
  const auto us = s.find('_');
  if (us == std::string_view::npos)
    throw Error(ErrorCode::kUnknownId, "malformed task id '" + std::string(s) + "'");
  try {
    TaskId id{ktype_from_string(s.substr(0, us)), task_kind_from_string(s.substr(us + 1))};
    if (id.ktype == KType::kNone || !(id.kind == TaskKind::kQa || is_reasoning(id.kind)))
      throw Error(ErrorCode::kUnknownId, "");
    return id;
  } catch (const Error&) {
    throw Error(ErrorCode::kUnknownId, "unknown task id '" + std::string(s) + "'");
  }
}

std::vector<TaskId> all_tasks() {
  std::vector<TaskId> out;
  for (auto k : kKnowledgeTypes) {
    out.push_back({k, TaskKind::kQa});
    for (auto r : kReasoningKinds) out.push_back({k, r});
  }
  return out;
}

std::string make_sample_id(TaskKind kind, KType ktype, std::string_view question,
                           std::string_view answer) {
  // Unit separators keep field boundaries unambiguous.
  std::string buf;
  buf.reserve(question.size() + answer.size() + 16);
  buf += to_string(kind);
  buf += '\x1f';
  buf += to_string(ktype);
  buf += '\x1f';
  buf += question;
  buf += '\x1f';
  buf += answer;
  const std::uint64_t a = fnv1a64(buf);
  const std::uint64_t b = fnv1a64(buf, 0x6c62272e07bb0142ULL);
  return hex64(splitmix64(a)) + hex64(splitmix64(b));
}

void assign_id(Sample& s) { s.id = make_sample_id(s.task_kind, s.ktype, s.question, s.answer); }

std::string test_set_id(const Sample& s) {
  if (s.knowledge_class == KnowledgeClass::kExternal) return std::string(kWikiTestSet);
  if (s.ktype == KType::kNone || !(s.task_kind == TaskKind::kQa || is_reasoning(s.task_kind)))
    throw Error(ErrorCode::kUnknownId, "sample " + s.id + " does not belong to a test set");
  return TaskId{s.ktype, s.task_kind}.str();
}

json to_json(const Sample& s) {
  return json{{"id", s.id},
              {"stage", std::string(to_string(s.stage))},
              {"task_kind", std::string(to_string(s.task_kind))},
              {"ktype", std::string(to_string(s.ktype))},
              {"question", s.question},
              {"answer", s.answer},
              {"cot", s.cot},
              {"person_ids", s.person_ids},
              {"knowledge_class", std::string(to_string(s.knowledge_class))}};
}

Sample sample_from_json(const json& j) {
  try {
    Sample s;
    s.id = j.at("id").get<std::string>();
    s.stage = stage_from_string(j.at("stage").get<std::string>());
    s.task_kind = task_kind_from_string(j.at("task_kind").get<std::string>());
    s.ktype = ktype_from_string(j.at("ktype").get<std::string>());
    s.question = j.at("question").get<std::string>();
    s.answer = j.at("answer").get<std::string>();
    s.cot = j.value("cot", std::string{});
    s.person_ids = j.value("person_ids", std::vector<PersonId>{});
    s.knowledge_class =
        knowledge_class_from_string(j.at("knowledge_class").get<std::string>());
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("sample record: ") + e.what());
  }
}

std::string samples_jsonl(std::vector<Sample> samples) {
  std::sort(samples.begin(), samples.end(),
            [](const Sample& a, const Sample& b) { return a.id < b.id; });
  std::string out;
  for (const auto& s : samples) {
    out += dump_compact(to_json(s));
    out += '\n';
  }
  return out;
}

std::vector<Sample> read_samples(const std::filesystem::path& path) {
  std::vector<Sample> out;
  for (const auto& j : read_jsonl(path)) out.push_back(sample_from_json(j));
  return out;
}

}  // namespace biopatch
