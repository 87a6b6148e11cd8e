#include "biopatch/similarity.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace biopatch {

namespace {

bool is_separator(unsigned char c) {
  return c < 0x80 && !((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'));
}

using TokenSet = std::unordered_set<std::string>;

double similarity_tokens(const TokenSet& a, const std::vector<std::string>& b) {
  std::size_t hit = 0;
  for (const auto& t : b)
    if (a.contains(t)) ++hit;
  return static_cast<double>(hit) / static_cast<double>(b.size());
}

struct Context {
  TokenSet set;
  std::vector<std::string> tokens;
};

Context make_context(const Sample& s, const PromptFormat& format) {
  Context c;
  c.tokens = tokenize(render_context(s, format));
  c.set.insert(c.tokens.begin(), c.tokens.end());
  return c;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_separator(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : ch;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

double context_similarity(std::string_view a, std::string_view b) {
  const auto tb = tokenize(b);
  if (tb.empty()) throw Error(ErrorCode::kInvalidArgument, "second context has no tokens");
  const auto ta = tokenize(a);
  return similarity_tokens(TokenSet(ta.begin(), ta.end()), tb);
}

double group_similarity(std::string_view anchor, std::span<const std::string> group,
                        Warnings* warnings) {
  const auto ta = tokenize(anchor);
  const TokenSet set(ta.begin(), ta.end());
  double sum = 0.0;
  std::size_t n = 0, skipped = 0;
  for (const auto& c : group) {
    const auto tb = tokenize(c);
    if (tb.empty()) {
      ++skipped;
      continue;
    }
    sum += similarity_tokens(set, tb);
    ++n;
  }
  if (skipped && warnings)
    warnings->push_back({"empty_context", std::to_string(skipped) + " contexts have no tokens"});
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "group has no usable contexts");
  return sum / static_cast<double>(n);
}

std::vector<TaskId> reasoning_tasks() {
  std::vector<TaskId> out;
  for (const auto& t : all_tasks())
    if (is_reasoning(t.kind)) out.push_back(t);
  return out;
}

TaskSimilarity task_similarity(std::span<const Sample> tests, TaskId anchor,
                               const PromptFormat& format, Warnings* warnings) {
  // Samples of the test pool keyed by task and primary person.
  std::map<TaskId, std::map<PersonId, const Sample*>> by_task;
  std::vector<const Sample*> wiki;
  for (const auto& s : tests) {
    if (s.stage != Stage::kTest) continue;
    if (s.knowledge_class == KnowledgeClass::kExternal) {
      wiki.push_back(&s);
      continue;
    }
    if (s.ktype == KType::kNone || s.person_ids.empty()) continue;
    by_task[{s.ktype, s.task_kind}][s.person_ids.front()] = &s;
  }
  const auto anchor_it = by_task.find(anchor);
  if (anchor_it == by_task.end())
    throw Error(ErrorCode::kUnknownId, "no test samples for anchor " + anchor.str());
  std::sort(wiki.begin(), wiki.end(),
            [](const Sample* a, const Sample* b) { return a->id < b->id; });

  VariantSpec variant;
  variant.experiment = Experiment::kReasoning;
  variant.replaced = anchor;

  std::vector<PersonId> persons;
  std::vector<Context> anchors;
  for (const auto& [pid, s] : anchor_it->second) {
    persons.push_back(pid);
    anchors.push_back(make_context(*s, format));
  }

  std::map<TestGroup, double> sums;
  TaskSimilarity out;
  out.anchor = anchor.str();
  std::size_t empty = 0;
  auto add = [&](TestGroup g, const Context& a, const Context& b) {
    if (b.tokens.empty()) {
      ++empty;
      return;
    }
    sums[g] += similarity_tokens(a.set, b.tokens);
    ++out.pairs[g];
  };
  for (const auto& [task, members] : by_task) {
    const TestGroup g = test_group_of(variant, task.str());
    for (std::size_t i = 0; i < persons.size(); ++i) {
      const auto it = members.find(persons[i]);
      if (it == members.end()) continue;
      add(g, anchors[i], make_context(*it->second, format));
    }
  }
  for (std::size_t i = 0; i < wiki.size(); ++i)
    add(TestGroup::kWiki, anchors[i % anchors.size()], make_context(*wiki[i], format));
  if (empty && warnings)
    warnings->push_back({"empty_context", std::to_string(empty) + " contexts have no tokens"});
  for (const auto& [g, sum] : sums) out.groups[g] = sum / static_cast<double>(out.pairs[g]);
  return out;
}

TaskSimilarity mean_task_similarity(std::span<const Sample> tests,
                                    std::span<const TaskId> anchors, const PromptFormat& format,
                                    Warnings* warnings) {
  if (anchors.empty()) throw Error(ErrorCode::kInvalidArgument, "no anchors");
  std::vector<TaskSimilarity> parts(anchors.size());
  std::vector<Warnings> part_warnings(anchors.size());
  parallel_for(anchors.size(), [&](std::size_t i) {
    parts[i] = task_similarity(tests, anchors[i], format, &part_warnings[i]);
  });
  TaskSimilarity out;
  out.anchor = anchors.size() == 1 ? anchors.front().str() : "all";
  std::map<TestGroup, std::size_t> counts;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    for (const auto& [g, v] : parts[i].groups) {
      out.groups[g] += v;
      ++counts[g];
      out.pairs[g] += parts[i].pairs[g];
    }
    if (warnings)
      warnings->insert(warnings->end(), part_warnings[i].begin(), part_warnings[i].end());
  }
  for (auto& [g, v] : out.groups) v /= static_cast<double>(counts[g]);
  return out;
}

json to_json(const TaskSimilarity& s) {
  json groups = json::object();
  for (const auto& [g, v] : s.groups)
    groups[std::string(to_string(g))] = {{"similarity", v}, {"pairs", s.pairs.at(g)}};
  return json{{"anchor", s.anchor}, {"groups", std::move(groups)}};
}

}  // namespace biopatch
