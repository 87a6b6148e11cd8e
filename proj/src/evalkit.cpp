#include "biopatch/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "biopatch/io.hpp"
#include "biopatch/rng.hpp"

namespace biopatch {

namespace {

constexpr std::string_view kSpace = " \t\n\r\f\v";

std::string format_fixed(double v, int digits) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

}  // namespace

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::vector<Prediction> out;
  std::size_t line = 0;
  for (const auto& j : read_jsonl(path)) {
    ++line;
    if (!j.is_object() || !j.contains("sample_id") || !j.contains("output") ||
        !j.at("sample_id").is_string() || !j.at("output").is_string())
      throw Error(ErrorCode::kFormat, path.string() + ": record " + std::to_string(line) +
                                          " needs string fields sample_id and output");
    out.push_back({j.at("sample_id").get<std::string>(), j.at("output").get<std::string>()});
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(kSpace);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(kSpace);
  return std::string(s.substr(b, e - b + 1));
}

std::string parse_final_answer(std::string_view output, TaskKind kind, ParseCounter* counter) {
  if (!is_reasoning(kind)) return trim(output);
  const auto pos = output.rfind(kAnswerMarker);
  if (pos == std::string_view::npos) {
    if (counter) ++counter->failures;
    return {};
  }
  return trim(output.substr(pos + kAnswerMarker.size()));
}

int exact_match(std::string_view pred, std::string_view gold) {
  return trim(pred) == trim(gold) ? 1 : 0;
}

std::string_view to_string(Knowledge k) { return k == Knowledge::kKnown ? "Known" : "Unknown"; }

Knowledge categorize_knowledge(std::span<const bool> trials) {
  if (trials.size() != static_cast<std::size_t>(kFewShotTrials))
    throw Error(ErrorCode::kArity, "expected " + std::to_string(kFewShotTrials) +
                                       " trial outcomes, got " + std::to_string(trials.size()));
  return std::any_of(trials.begin(), trials.end(), [](bool b) { return b; })
             ? Knowledge::kKnown
             : Knowledge::kUnknown;
}

std::vector<std::string> build_fewshot_prompts(const Sample& target, std::span<const Sample> pool,
                                               int k, int trials, std::uint64_t seed) {
  if (k < 0 || trials < 1)
    throw Error(ErrorCode::kInvalidArgument, "few-shot needs k >= 0 and trials >= 1");
  const std::unordered_set<PersonId> excluded(target.person_ids.begin(), target.person_ids.end());
  std::vector<const Sample*> eligible;
  std::unordered_set<std::string> seen;
  for (const auto& s : pool) {
    if (s.task_kind != TaskKind::kQa || s.knowledge_class != KnowledgeClass::kKnown) continue;
    if (s.id == target.id || !seen.insert(s.id).second) continue;
    if (std::any_of(s.person_ids.begin(), s.person_ids.end(),
                    [&](PersonId p) { return excluded.contains(p); }))
      continue;
    eligible.push_back(&s);
  }
  const auto need = static_cast<std::size_t>(k) * static_cast<std::size_t>(trials);
  if (eligible.size() < need)
    throw Error(ErrorCode::kShortage, "few-shot pool has " + std::to_string(eligible.size()) +
                                          " exemplars, need " + std::to_string(need));
  std::sort(eligible.begin(), eligible.end(),
            [](const Sample* a, const Sample* b) { return a->id < b->id; });
  Rng(seed, "fewshot/" + target.id).shuffle(eligible);

  std::vector<std::string> prompts;
  prompts.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    std::string p;
    for (int i = 0; i < k; ++i) {
      const Sample& ex = *eligible[static_cast<std::size_t>(t * k + i)];
      p += "Question: " + ex.question + "\nAnswer: " + ex.answer + "\n\n";
    }
    p += "Question: " + target.question + "\nAnswer:";
    prompts.push_back(std::move(p));
  }
  return prompts;
}

ScoreResult score_predictions(std::span<const Sample> tests, std::span<const Prediction> preds,
                              std::string id) {
  std::unordered_map<std::string_view, const Sample*> by_id;
  for (const auto& s : tests) {
    if (s.stage != Stage::kTest) continue;
    by_id.emplace(s.id, &s);
  }
  std::unordered_map<std::string_view, const Prediction*> pred_of;
  for (const auto& p : preds) {
    if (!by_id.contains(p.sample_id))
      throw Error(ErrorCode::kUnknownId, "prediction for unknown sample " + p.sample_id);
    if (!pred_of.emplace(p.sample_id, &p).second)
      throw Error(ErrorCode::kInvalidArgument, "duplicate prediction for " + p.sample_id);
  }

  std::vector<const Sample*> ordered;
  ordered.reserve(by_id.size());
  for (const auto& [sid, s] : by_id) ordered.push_back(s);
  std::sort(ordered.begin(), ordered.end(),
            [](const Sample* a, const Sample* b) { return a->id < b->id; });

  std::vector<int> correct(ordered.size(), 0);
  std::vector<int> failed(ordered.size(), 0);
  parallel_for(ordered.size(), [&](std::size_t i) {
    const auto it = pred_of.find(ordered[i]->id);
    if (it == pred_of.end()) return;
    ParseCounter counter;
    const auto parsed = parse_final_answer(it->second->output, ordered[i]->task_kind, &counter);
    failed[i] = counter.failures ? 1 : 0;
    correct[i] = exact_match(parsed, ordered[i]->answer);
  });

  ScoreResult result;
  result.report.id = std::move(id);
  std::size_t missing = 0;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    auto& c = result.report.counts[test_set_id(*ordered[i])];
    ++c.total;
    c.correct += static_cast<std::size_t>(correct[i]);
    result.report.parse_failures += static_cast<std::size_t>(failed[i]);
    if (!pred_of.contains(ordered[i]->id)) ++missing;
  }
  for (const auto& [test, c] : result.report.counts)
    result.report.per_test[test] = static_cast<double>(c.correct) / static_cast<double>(c.total);
  if (missing)
    result.warnings.push_back({"missing_predictions", std::to_string(missing) +
                                                          " test samples have no prediction"});
  if (result.report.parse_failures)
    result.warnings.push_back(
        {"parse_failures",
         std::to_string(result.report.parse_failures) + " reasoning outputs lack the answer marker"});
  return result;
}

std::string_view to_string(Grouping g) {
  switch (g) {
    case Grouping::kQa: return "qa";
    case Grouping::kReasoning: return "reasoning";
    case Grouping::kPatch: return "patch";
  }
  return "?";
}

Grouping grouping_from_string(std::string_view s) {
  if (s == "qa") return Grouping::kQa;
  if (s == "reasoning") return Grouping::kReasoning;
  if (s == "patch") return Grouping::kPatch;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown grouping '" + std::string(s) + "' (expected qa, reasoning or patch)");
}

std::vector<TestGroup> groups_for(Grouping g) {
  switch (g) {
    case Grouping::kQa: return {TestGroup::kStqa, TestGroup::kDtqa, TestGroup::kWiki};
    case Grouping::kReasoning:
      return {TestGroup::kStqa, TestGroup::kDtqa, TestGroup::kStsr,
              TestGroup::kStdr, TestGroup::kDtdr, TestGroup::kWiki};
    case Grouping::kPatch:
      return {TestGroup::kSameTypeTest, TestGroup::kOther, TestGroup::kWiki};
  }
  return {};
}

AggregateReport aggregate_report(const ScoreReport& baseline,
                                 std::span<const ScoreReport> variants, Grouping grouping) {
  if (variants.empty()) throw Error(ErrorCode::kInvalidArgument, "no variant reports");
  AggregateReport out;
  out.baseline_id = baseline.id;
  out.grouping = grouping;

  std::vector<const ScoreReport*> sorted;
  for (const auto& v : variants) sorted.push_back(&v);
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoreReport* a, const ScoreReport* b) { return a->id < b->id; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i]->id.empty())
      throw Error(ErrorCode::kInvalidArgument, "variant report without an id");
    if (i > 0 && sorted[i]->id == sorted[i - 1]->id)
      throw Error(ErrorCode::kInvalidArgument, "duplicate variant id " + sorted[i]->id);
    if (!sorted[i]->variant)
      throw Error(ErrorCode::kInvalidArgument,
                  "variant report " + sorted[i]->id + " does not carry its variant spec");
  }

  std::set<std::string> zero_base;
  for (const auto& [test, acc] : baseline.per_test)
    if (acc <= 0.0) {
      zero_base.insert(test);
      out.warnings.push_back(
          {"zero_baseline", "baseline accuracy of " + test + " is 0; test excluded"});
    }

  const auto wanted = groups_for(grouping);
  std::map<TestGroup, std::vector<std::pair<std::string, double>>> per_group;
  for (const ScoreReport* v : sorted) {
    for (const auto& [test, acc] : v->per_test)
      if (!baseline.per_test.contains(test))
        throw Error(ErrorCode::kInvalidArgument,
                    "variant " + v->id + " has test " + test + " missing from the baseline");
    std::map<TestGroup, std::vector<double>> members;
    auto& deltas = out.deltas[v->id];
    for (const auto& [test, base] : baseline.per_test) {
      const auto it = v->per_test.find(test);
      if (it == v->per_test.end())
        throw Error(ErrorCode::kInvalidArgument,
                    "variant " + v->id + " lacks baseline test " + test);
      if (zero_base.contains(test)) continue;
      const double delta = 100.0 * (it->second - base) / base;
      deltas[test] = delta;
      const TestGroup g = test_group_of(*v->variant, test);
      if (std::find(wanted.begin(), wanted.end(), g) != wanted.end())
        members[g].push_back(delta);
    }
    for (const auto& [g, ds] : members) {
      const double mean = std::accumulate(ds.begin(), ds.end(), 0.0) / static_cast<double>(ds.size());
      per_group[g].emplace_back(v->id, mean);
    }
  }

  for (const auto& [g, means] : per_group) {
    GroupStat stat;
    stat.n = means.size();
    double sum = 0.0;
    for (const auto& [id, m] : means) {
      sum += m;
      stat.per_variant[id] = m;
    }
    stat.mean_delta_pct = sum / static_cast<double>(stat.n);
    if (stat.n == 1) {
      stat.single_variant = true;
    } else {
      double ss = 0.0;
      for (const auto& [id, m] : means) ss += (m - stat.mean_delta_pct) * (m - stat.mean_delta_pct);
      stat.stderr_pct = std::sqrt(ss / static_cast<double>(stat.n - 1)) /
                        std::sqrt(static_cast<double>(stat.n));
    }
    out.groups[g] = std::move(stat);
  }
  return out;
}

json to_json(const ScoreReport& r) {
  json counts = json::object();
  for (const auto& [test, c] : r.counts) counts[test] = {{"correct", c.correct}, {"total", c.total}};
  return json{{"id", r.id},
              {"variant", r.variant ? to_json(*r.variant) : json(nullptr)},
              {"per_test", r.per_test},
              {"counts", std::move(counts)},
              {"parse_failures", r.parse_failures}};
}

ScoreReport score_report_from_json(const json& j) {
  try {
    ScoreReport r;
    r.id = j.value("id", std::string{});
    if (j.contains("variant") && !j.at("variant").is_null())
      r.variant = variant_from_json(j.at("variant"));
    for (const auto& [test, acc] : j.at("per_test").items()) {
      const double a = acc.get<double>();
      if (!(a >= 0.0 && a <= 1.0))
        throw Error(ErrorCode::kFormat, "accuracy of " + test + " outside [0,1]");
      r.per_test[test] = a;
    }
    if (j.contains("counts"))
      for (const auto& [test, c] : j.at("counts").items())
        r.counts[test] = {c.at("correct").get<std::size_t>(), c.at("total").get<std::size_t>()};
    r.parse_failures = j.value("parse_failures", std::size_t{0});
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("score report: ") + e.what());
  }
}

json to_json(const AggregateReport& r) {
  json groups = json::object();
  for (const auto& [g, s] : r.groups)
    groups[std::string(to_string(g))] = {{"mean_delta_pct", s.mean_delta_pct},
                                         {"stderr_pct", s.stderr_pct},
                                         {"n", s.n},
                                         {"single_variant", s.single_variant},
                                         {"per_variant", s.per_variant}};
  json warnings = json::array();
  for (const auto& w : r.warnings) warnings.push_back({{"code", w.code}, {"message", w.message}});
  return json{{"baseline_id", r.baseline_id},
              {"grouping", std::string(to_string(r.grouping))},
              {"deltas", r.deltas},
              {"groups", std::move(groups)},
              {"warnings", std::move(warnings)}};
}

std::string report_csv(const AggregateReport& r) {
  std::string out = "group,variant,delta_pct,stderr_pct,n\n";
  for (const auto& [g, s] : r.groups) {
    const std::string name(to_string(g));
    for (const auto& [id, m] : s.per_variant)
      out += name + "," + id + "," + format_fixed(m, 6) + ",,1\n";
    out += name + ",mean," + format_fixed(s.mean_delta_pct, 6) + "," +
           format_fixed(s.stderr_pct, 6) + "," + std::to_string(s.n) + "\n";
  }
  return out;
}

}  // namespace biopatch
