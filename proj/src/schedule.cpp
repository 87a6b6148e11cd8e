#include "biopatch/schedule.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "biopatch/error.hpp"
#include "biopatch/rng.hpp"

namespace biopatch {

namespace {

constexpr int kFractions[] = {0, 5, 10, 20, 50, 80, 100};
constexpr int kPatchRatios[] = {5, 10, 20};

std::size_t percent_of(std::size_t n, int percent) {
  return (n * static_cast<std::size_t>(percent) + 50) / 100;
}

std::vector<SampleRef> sorted_by_id(std::vector<SampleRef> v) {
  std::sort(v.begin(), v.end(), [](const SampleRef& a, const SampleRef& b) { return a.id < b.id; });
  return v;
}

// Draws `count` samples cycling over tasks in TaskId order, each task in
// id-rank order.
std::vector<SampleRef> round_robin(std::span<const SampleRef> samples, std::size_t count,
                                   std::string_view what) {
  if (samples.size() < count)
    throw Error(ErrorCode::kShortage, std::string(what) + ": need " + std::to_string(count) +
                                          " samples, have " + std::to_string(samples.size()));
  std::map<TaskId, std::vector<SampleRef>> by_task;
  for (const auto& s : samples) by_task[s.task].push_back(s);
  for (auto& [task, v] : by_task) v = sorted_by_id(std::move(v));
  std::vector<SampleRef> out;
  out.reserve(count);
  for (std::size_t round = 0; out.size() < count; ++round)
    for (auto& [task, v] : by_task) {
      if (out.size() == count) break;
      if (round < v.size()) out.push_back(v[round]);
    }
  return out;
}

std::vector<std::string> ids_of(std::span<const SampleRef> refs) {
  std::vector<std::string> ids;
  ids.reserve(refs.size());
  for (const auto& r : refs) ids.push_back(r.id);
  return ids;
}

void append_epoch(std::vector<std::string> ids, std::uint64_t seed, const std::string& purpose,
                  int epoch, std::vector<ManifestEntry>& out) {
  std::sort(ids.begin(), ids.end());
  Rng(seed, purpose).shuffle(ids);
  for (auto& id : ids) out.push_back({out.size(), std::move(id), epoch});
}

int require_percent(const json& j, const char* key, int fallback) {
  return j.contains(key) ? j.at(key).get<int>() : fallback;
}

}  // namespace

void VariantSpec::validate() const {
  if (epochs < 1) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  if (std::find(std::begin(kFractions), std::end(kFractions), unknown_fraction) ==
      std::end(kFractions))
    throw Error(ErrorCode::kInvalidArgument,
                "unknown_fraction must be one of 0,5,10,20,50,80,100");
  if (replaced && patch)
    throw Error(ErrorCode::kInvalidArgument, "a variant cannot both replace a task and patch");
  if (replaced && experiment == Experiment::kQa && replaced->kind != TaskKind::kQa)
    throw Error(ErrorCode::kInvalidArgument,
                "reasoning task " + replaced->str() + " requires the reasoning experiment");
  if (!replaced && unknown_fraction != 0)
    throw Error(ErrorCode::kInvalidArgument, "unknown_fraction requires a replaced task");
  if (patch) {
    if (std::find(std::begin(kPatchRatios), std::end(kPatchRatios), patch->ratio) ==
        std::end(kPatchRatios))
      throw Error(ErrorCode::kInvalidArgument, "patch ratio must be one of 5,10,20");
    if (patch->patch_epochs < 1)
      throw Error(ErrorCode::kInvalidArgument, "patch_epochs must be >= 1");
    if (patch->missing_type == KType::kNone)
      throw Error(ErrorCode::kInvalidArgument, "missing_one needs a knowledge type");
  }
}

std::size_t ExperimentData::known_total() const {
  std::size_t n = 0;
  for (const auto& [task, v] : known) n += v.size();
  return n;
}

std::vector<SampleRef> ExperimentData::all_known() const {
  std::vector<SampleRef> out;
  for (const auto& [task, v] : known) out.insert(out.end(), v.begin(), v.end());
  return out;
}

ExperimentData experiment_data(std::span<const Sample> sft, const ReasoningSplit& split,
                               Experiment experiment) {
  const std::unordered_set<PersonId> qa_persons(split.qa.begin(), split.qa.end());
  ExperimentData data;
  for (const auto& s : sft) {
    if (s.stage != Stage::kSft) continue;
    if (s.ktype == KType::kNone) continue;
    const bool qa = s.task_kind == TaskKind::kQa;
    if (!qa && !is_reasoning(s.task_kind)) continue;
    if (experiment == Experiment::kQa && !qa) continue;
    SampleRef ref{s.id, {s.ktype, s.task_kind}, s.knowledge_class};
    if (s.knowledge_class == KnowledgeClass::kKnown) {
      // The reasoning mixture only uses QA from the QA split.
      if (experiment == Experiment::kReasoning && qa &&
          (s.person_ids.empty() || !qa_persons.contains(s.person_ids.front())))
        continue;
      data.known[ref.task].push_back(std::move(ref));
    } else if (s.knowledge_class == KnowledgeClass::kUnknown) {
      data.unknown[ref.task].push_back(std::move(ref));
    }
  }
  for (auto* m : {&data.known, &data.unknown})
    for (auto& [task, v] : *m) v = sorted_by_id(std::move(v));
  return data;
}

Manifest make_shuffled_baseline(std::span<const std::string> sample_ids, int epochs,
                                std::uint64_t seed) {
  if (sample_ids.empty()) throw Error(ErrorCode::kInvalidArgument, "no samples to schedule");
  if (epochs < 1) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  Manifest m;
  m.budget = sample_ids.size();
  m.variant.epochs = epochs;
  m.variant.seed = seed;
  m.entries.reserve(sample_ids.size() * static_cast<std::size_t>(epochs));
  const std::vector<std::string> ids(sample_ids.begin(), sample_ids.end());
  for (int e = 0; e < epochs; ++e)
    append_epoch(ids, seed, "schedule/epoch/" + std::to_string(e), e, m.entries);
  return m;
}

Manifest make_replacement_variant(const ExperimentData& data, TaskId replaced, Strategy strategy,
                                  int unknown_fraction, int epochs, std::uint64_t seed) {
  const auto it = data.known.find(replaced);
  if (it == data.known.end())
    throw Error(ErrorCode::kUnknownId, "task " + replaced.str() + " is not in this experiment");
  const auto& known = it->second;
  const std::size_t n_unknown = percent_of(known.size(), unknown_fraction);
  std::vector<std::string> ids;
  for (const auto& [task, v] : data.known) {
    if (task == replaced) continue;
    for (const auto& r : v) ids.push_back(r.id);
  }
  if (n_unknown == 0) {
    for (const auto& r : known) ids.push_back(r.id);
  } else {
    const auto u = data.unknown.find(replaced);
    const std::size_t available = u == data.unknown.end() ? 0 : u->second.size();
    if (available < n_unknown)
      throw Error(ErrorCode::kShortage,
                  "insufficient unknown pool for " + replaced.str() + ": need " +
                      std::to_string(n_unknown) + ", have " + std::to_string(available));
    for (std::size_t i = 0; i < n_unknown; ++i) ids.push_back(u->second[i].id);
    // The lowest-ranked known items are the ones replaced.
    if (strategy == Strategy::kKeepKnown)
      for (std::size_t i = n_unknown; i < known.size(); ++i) ids.push_back(known[i].id);
  }
  return make_shuffled_baseline(ids, epochs, seed);
}

Manifest make_knownpatch_manifest(std::span<const SampleRef> unknown_samples,
                                  std::span<const SampleRef> known_samples,
                                  const PatchSpec& patch, std::size_t budget, int epochs,
                                  std::uint64_t seed) {
  if (budget == 0) throw Error(ErrorCode::kInvalidArgument, "patch budget must be positive");
  if (epochs < 1 || patch.patch_epochs < 1)
    throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  for (const auto& s : known_samples) {
    if (s.knowledge_class != KnowledgeClass::kKnown)
      throw Error(ErrorCode::kInvalidArgument, "patch candidate " + s.id + " is not known");
    if (patch.missing_type && s.task.ktype == *patch.missing_type)
      throw Error(ErrorCode::kCoverageViolation,
                  "patch candidate " + s.id + " has excluded type " +
                      std::string(to_string(*patch.missing_type)));
  }
  for (const auto& s : unknown_samples)
    if (s.knowledge_class != KnowledgeClass::kUnknown)
      throw Error(ErrorCode::kInvalidArgument, "main candidate " + s.id + " is not unknown");

  const std::size_t n_patch = percent_of(budget, patch.ratio);
  const auto tail = round_robin(known_samples, n_patch, "known patch");
  const auto main = round_robin(unknown_samples, budget - n_patch, "unknown main data");

  Manifest m;
  m.budget = budget;
  if (patch.mode == PatchMode::kShuffled) {
    auto ids = ids_of(main);
    for (const auto& r : tail) ids.push_back(r.id);
    m = make_shuffled_baseline(ids, epochs, seed);
    return m;
  }
  const auto main_ids = ids_of(main);
  const auto tail_ids = ids_of(tail);
  if (patch.mode == PatchMode::kGlobalTail) {
    for (int e = 0; e < epochs; ++e)
      append_epoch(main_ids, seed, "schedule/main/" + std::to_string(e), e, m.entries);
    for (int e = 0; e < patch.patch_epochs; ++e)
      append_epoch(tail_ids, seed, "schedule/patch/" + std::to_string(e), epochs + e,
                   m.entries);
  } else {
    for (int e = 0; e < epochs; ++e) {
      append_epoch(main_ids, seed, "schedule/main/" + std::to_string(e), e, m.entries);
      append_epoch(tail_ids, seed, "schedule/patch/" + std::to_string(e), e, m.entries);
    }
  }
  return m;
}

Manifest build_manifest(const VariantSpec& spec, const ExperimentData& data) {
  spec.validate();
  Manifest m;
  if (spec.patch) {
    std::vector<SampleRef> known;
    for (const auto& [task, v] : data.known) {
      if (spec.patch->missing_type && task.ktype == *spec.patch->missing_type) continue;
      known.insert(known.end(), v.begin(), v.end());
    }
    // Main data mirrors the known mixture: at most |known bucket| unknown
    // items per task.
    std::vector<SampleRef> unknown;
    for (const auto& [task, v] : data.known) {
      const auto u = data.unknown.find(task);
      if (u == data.unknown.end()) continue;
      const std::size_t cap = std::min(v.size(), u->second.size());
      unknown.insert(unknown.end(), u->second.begin(),
                     u->second.begin() + static_cast<std::ptrdiff_t>(cap));
    }
    m = make_knownpatch_manifest(unknown, known, *spec.patch, data.known_total(), spec.epochs,
                                 spec.seed);
  } else if (spec.replaced) {
    m = make_replacement_variant(data, *spec.replaced, spec.strategy, spec.unknown_fraction,
                                 spec.epochs, spec.seed);
  } else {
    m = make_shuffled_baseline(ids_of(data.all_known()), spec.epochs, spec.seed);
  }
  m.variant = spec;
  return m;
}

std::string_view to_string(TestGroup g) {
  switch (g) {
    case TestGroup::kStqa: return "STQA";
    case TestGroup::kDtqa: return "DTQA";
    case TestGroup::kStsr: return "STSR";
    case TestGroup::kStdr: return "STDR";
    case TestGroup::kDtdr: return "DTDR";
    case TestGroup::kWiki: return "WIKI";
    case TestGroup::kSameTypeTest: return "SAME_TYPE_TEST";
    case TestGroup::kOther: return "OTHER";
  }
  return "?";
}

TestGroup test_group_from_string(std::string_view s) {
  for (auto g : {TestGroup::kStqa, TestGroup::kDtqa, TestGroup::kStsr, TestGroup::kStdr,
                 TestGroup::kDtdr, TestGroup::kWiki, TestGroup::kSameTypeTest, TestGroup::kOther})
    if (to_string(g) == s) return g;
  throw Error(ErrorCode::kFormat, "unknown test group '" + std::string(s) + "'");
}

TestGroup test_group_of(const VariantSpec& variant, std::string_view test_set_id) {
  if (test_set_id == kWikiTestSet) return TestGroup::kWiki;
  const TaskId test = task_id_from_string(test_set_id);
  const bool test_qa = test.kind == TaskKind::kQa;
  if (variant.replaced) {
    const TaskId& r = *variant.replaced;
    const bool same_type = test.ktype == r.ktype;
    if (r.kind == TaskKind::kQa) {
      if (!test_qa) return TestGroup::kOther;
      return same_type ? TestGroup::kStqa : TestGroup::kDtqa;
    }
    if (test == r) return TestGroup::kStsr;
    if (test_qa) return same_type ? TestGroup::kStqa : TestGroup::kDtqa;
    return same_type ? TestGroup::kStdr : TestGroup::kDtdr;
  }
  if (variant.patch) {
    if (!test_qa) return TestGroup::kOther;
    if (!variant.patch->missing_type) return TestGroup::kSameTypeTest;
    return test.ktype == *variant.patch->missing_type ? TestGroup::kSameTypeTest
                                                      : TestGroup::kOther;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "variant '" + variant.name + "' has neither a replaced task nor a patch");
}

std::string_view to_string(Strategy s) {
  return s == Strategy::kKeepKnown ? "KeepKnown" : "RemoveKnown";
}

std::string_view to_string(Experiment e) { return e == Experiment::kQa ? "qa" : "reasoning"; }

std::string_view to_string(PatchMode m) {
  switch (m) {
    case PatchMode::kGlobalTail: return "global_tail";
    case PatchMode::kPerEpochTail: return "per_epoch_tail";
    case PatchMode::kShuffled: return "shuffled";
  }
  return "?";
}

json to_json(const VariantSpec& v) {
  json j{{"name", v.name},
         {"experiment", std::string(to_string(v.experiment))},
         {"replaced", nullptr},
         {"unknown_fraction", v.unknown_fraction},
         {"strategy", std::string(to_string(v.strategy))},
         {"patch", nullptr},
         {"epochs", v.epochs},
         {"seed", v.seed}};
  if (v.replaced) j["replaced"] = v.replaced->str();
  if (v.patch) {
    j["patch"] = json{{"ratio", v.patch->ratio},
                      {"coverage", v.patch->missing_type
                                       ? "missing_one:" +
                                             std::string(to_string(*v.patch->missing_type))
                                       : std::string("all_types")},
                      {"mode", std::string(to_string(v.patch->mode))},
                      {"patch_epochs", v.patch->patch_epochs}};
  }
  return j;
}

VariantSpec variant_from_json(const json& j) {
  try {
    VariantSpec v;
    v.name = j.value("name", std::string{});
    v.epochs = j.value("epochs", 3);
    v.seed = j.value("seed", std::uint64_t{0});
    v.unknown_fraction = require_percent(j, "unknown_fraction", 0);
    const auto strategy = j.value("strategy", std::string("KeepKnown"));
    if (strategy == "KeepKnown") {
      v.strategy = Strategy::kKeepKnown;
    } else if (strategy == "RemoveKnown") {
      v.strategy = Strategy::kRemoveKnown;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown strategy '" + strategy + "'");
    }
    if (j.contains("replaced") && !j.at("replaced").is_null()) {
      const auto r = j.at("replaced").get<std::string>();
      // A bare type ("B") names that type's QA task.
      v.replaced = r.find('_') == std::string::npos
                       ? TaskId{ktype_from_string(r), TaskKind::kQa}
                       : task_id_from_string(r);
      if (v.replaced->ktype == KType::kNone)
        throw Error(ErrorCode::kInvalidArgument, "replaced needs a knowledge type");
    }
    const auto experiment = j.value(
        "experiment",
        std::string(v.replaced && v.replaced->kind != TaskKind::kQa ? "reasoning" : "qa"));
    if (experiment == "qa") {
      v.experiment = Experiment::kQa;
    } else if (experiment == "reasoning") {
      v.experiment = Experiment::kReasoning;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown experiment '" + experiment + "'");
    }
    if (j.contains("patch") && !j.at("patch").is_null()) {
      const auto& p = j.at("patch");
      PatchSpec patch;
      patch.ratio = p.at("ratio").get<int>();
      const auto coverage = p.value("coverage", std::string("all_types"));
      if (coverage.rfind("missing_one:", 0) == 0) {
        patch.missing_type = ktype_from_string(coverage.substr(12));
      } else if (coverage != "all_types") {
        throw Error(ErrorCode::kInvalidArgument, "unknown coverage '" + coverage + "'");
      }
      const auto mode = p.value("mode", std::string("global_tail"));
      if (mode == "global_tail") {
        patch.mode = PatchMode::kGlobalTail;
      } else if (mode == "per_epoch_tail") {
        patch.mode = PatchMode::kPerEpochTail;
      } else if (mode == "shuffled") {
        patch.mode = PatchMode::kShuffled;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown patch mode '" + mode + "'");
      }
      patch.patch_epochs = p.value("patch_epochs", v.epochs);
      v.patch = patch;
    }
    v.validate();
    return v;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("variant spec: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kFormat || e.code() == ErrorCode::kUnknownId)
      throw Error(ErrorCode::kInvalidArgument, std::string("variant spec: ") + e.what());
    throw;
  }
}

json to_json(const Manifest& m) {
  json entries = json::array();
  for (const auto& e : m.entries) entries.push_back(json::array({e.position, e.sample_id, e.epoch}));
  return json{{"toolkit_version", std::string(kToolkitVersion)},
              {"rng_version", kRngVersion},
              {"variant", to_json(m.variant)},
              {"budget", m.budget},
              {"entries", std::move(entries)}};
}

Manifest manifest_from_json(const json& j) {
  try {
    Manifest m;
    m.variant = variant_from_json(j.at("variant"));
    m.budget = j.at("budget").get<std::size_t>();
    for (const auto& e : j.at("entries"))
      m.entries.push_back(
          {e.at(0).get<std::size_t>(), e.at(1).get<std::string>(), e.at(2).get<int>()});
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("manifest: ") + e.what());
  }
}

}  // namespace biopatch
