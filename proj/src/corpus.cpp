#include "biopatch/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "biopatch/io.hpp"
#include "biopatch/oracles.hpp"
#include "biopatch/rng.hpp"

namespace biopatch {

namespace {

std::vector<std::string> read_templates(const std::filesystem::path& path, bool aux) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (auto& line : read_lines(path)) {
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line.find("{name}") == std::string::npos || line.find("{value}") == std::string::npos)
      throw Error(ErrorCode::kFormat,
                  path.string() + ": template lacks {name} or {value}: " + line);
    if (aux && (line.find("{pronoun}") != std::string::npos ||
                line.find("{possessive}") != std::string::npos))
      throw Error(ErrorCode::kFormat, path.string() + ": aux templates cannot use pronouns");
    // Duplicate lines would not add exposure variety.
    if (seen.insert(line).second) out.push_back(std::move(line));
  }
  return out;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

void require_templates(const std::vector<std::string>& templates, int count,
                       std::string_view what) {
  if (static_cast<int>(templates.size()) < count)
    throw Error(ErrorCode::kTemplateShortage,
                std::string(what) + " templates: need " + std::to_string(count) +
                    " distinct forms, have " + std::to_string(templates.size()));
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string with_answer(std::string rationale, const std::string& answer) {
  rationale += '\n';
  rationale += kAnswerMarker;
  rationale += ' ';
  rationale += answer;
  return rationale;
}

std::string attribute_value(const Person& p, KType k) {
  switch (k) {
    case KType::kB: return std::to_string(p.birth_year);
    case KType::kD: return std::to_string(p.death_year);
    case KType::kM: return p.major;
    case KType::kU: return p.university;
    case KType::kNone: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "attribute requires a knowledge type");
}

// "1, 9, 7 and 4"
std::string digits_phrase(const std::vector<int>& d) {
  return std::to_string(d[0]) + ", " + std::to_string(d[1]) + ", " + std::to_string(d[2]) +
         " and " + std::to_string(d[3]);
}

std::string digits_expr(const std::vector<int>& d, std::string_view op) {
  std::string out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i) out += op;
    out += std::to_string(d[i]);
  }
  return out;
}

struct Rendered {
  std::string question;
  std::string rationale;
  std::string answer;
};

Rendered render_sr(KType k, const Person& a, const ReasoningParams& params) {
  const std::string n = a.full_name();
  switch (k) {
    case KType::kB: {
      const int y = a.birth_year;
      const std::string ans = oracles::parity(y);
      const std::string ys = std::to_string(y);
      return {"Is the number of " + n + "'s birth year an odd number?",
              n + " was born in " + ys + ". " + ys + " % 2 = " + std::to_string(y % 2) +
                  ". So " + ys + (ans == "YES" ? " is an odd number." : " is not an odd number."),
              ans};
    }
    case KType::kD: {
      const int y = a.death_year;
      const int years = params.anniversary_years;
      const std::string ans = std::to_string(oracles::anniversary(y, years));
      return {"What year is the " + oracles::ordinal(years) + " anniversary of " + n +
                  "'s death?",
              n + " died in " + std::to_string(y) + ". " + std::to_string(years) +
                  " years after it should be " + std::to_string(y) + " + " +
                  std::to_string(years) + " = " + ans + ".",
              ans};
    }
    case KType::kM: {
      const std::string field = oracles::field_of(a.major);
      return {"What field does " + n + "'s major belong to?",
              n + "'s major is " + a.major + ". " + a.major + " belongs to " + field + ".", field};
    }
    case KType::kU: {
      const std::string country = oracles::country_of(a.university);
      return {"In which country did " + n + " attend university?",
              n + " was graduated from " + a.university + ". " + a.university +
                  " is located in " + country + ".",
              country};
    }
    case KType::kNone: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "reasoning requires a knowledge type");
}

Rendered render_cr(KType k, const Person& a, const Person& b) {
  const std::string na = a.full_name();
  const std::string nb = b.full_name();
  switch (k) {
    case KType::kB: {
      const std::string ans = std::to_string(oracles::year_diff(a.birth_year, b.birth_year));
      const std::string ya = std::to_string(a.birth_year);
      const std::string yb = std::to_string(b.birth_year);
      return {"How many years apart is the birth year between " + na + " and " + nb + "?",
              na + " was born in " + ya + ". " + nb + " was born in " + yb +
                  ". The difference is abs(" + ya + " - " + yb + ") = " + ans + ".",
              ans};
    }
    case KType::kD: {
      const std::string ans = oracles::died_first(na, a.death_year, nb, b.death_year);
      const int early = std::min(a.death_year, b.death_year);
      const int late = std::max(a.death_year, b.death_year);
      return {"Who died first, " + na + " or " + nb + "?",
              na + " died in " + std::to_string(a.death_year) + ". " + nb + " died in " +
                  std::to_string(b.death_year) + ". " + std::to_string(early) +
                  " is earlier than " + std::to_string(late) + ". So " + ans + " died first.",
              ans};
    }
    case KType::kM: {
      const std::string fa = oracles::field_of(a.major);
      const std::string fb = oracles::field_of(b.major);
      const std::string ans = oracles::same_field(a.major, b.major);
      return {"Do " + na + " and " + nb + "'s majors belong to the same field?",
              na + "'s major is " + a.major + ". " + a.major + " belongs to " + fa + ". " + nb +
                  "'s major is " + b.major + ". " + b.major + " belongs to " + fb + ". " + fa +
                  " and " + fb + (ans == "YES" ? " are the same." : " are not the same."),
              ans};
    }
    case KType::kU: {
      const std::string ans = oracles::alumni(a.university, b.university);
      return {"Are " + na + " and " + nb + " college alumni?",
              na + " was graduated from " + a.university + ". " + nb + " was graduated from " +
                  b.university + ". " + a.university + " and " + b.university +
                  (ans == "YES" ? " are the same." : " are not the same."),
              ans};
    }
    case KType::kNone: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "reasoning requires a knowledge type");
}

Rendered render_nr(KType k, const Person& a) {
  const std::string n = a.full_name();
  switch (k) {
    case KType::kB: {
      const auto d = oracles::year_digits(a.birth_year);
      const std::string ans = std::to_string(oracles::mscore(a.birth_year));
      return {"What is the MScore of " + n + "'s birth year?",
              n + " was born in " + std::to_string(a.birth_year) + ". The four numbers are " +
                  digits_phrase(d) + ". So the MScore of it is " + digits_expr(d, " * ") +
                  " = " + ans + ".",
              ans};
    }
    case KType::kD: {
      const auto d = oracles::year_digits(a.death_year);
      const std::string ans = std::to_string(oracles::ascore(a.death_year));
      return {"What is the AScore of " + n + "'s death year?",
              n + " died in " + std::to_string(a.death_year) + ". The four numbers are " +
                  digits_phrase(d) + ". So the AScore of it is " + digits_expr(d, " + ") +
                  " = " + ans + ".",
              ans};
    }
    case KType::kM: {
      const auto words = oracles::split_words(a.major);
      const std::string& first = words.front();
      const std::string ans = oracles::odd_letters(a.major);
      return {"What is the sequence of odd-positioned letters in the first word of " + n +
                  "'s major name?",
              n + "'s major is " + a.major + ". The first word of '" + a.major + "' is '" +
                  first + "'. The spelling of " + first + " is " +
                  join(oracles::spell_upper(first), ", ") +
                  ". The sequence of odd-positioned letters in '" + first + "' is " + ans + ".",
              ans};
    }
    case KType::kU: {
      const auto words = oracles::split_words(a.university);
      const std::string ans = oracles::first_last(a.university);
      std::string rationale = n + " was graduated from " + a.university +
                              ", which can be splitted into words: " + join(words, ", ") + ".";
      for (const auto& w : words)
        rationale += " The first and last letters of '" + w + "' are " +
                     oracles::first_last(w) + ".";
      rationale += " So, the whole sequence is " + ans + ".";
      return {"What is the sequence of the first and last letters of each word in " + n +
                  "'s university name?",
              rationale, ans};
    }
    case KType::kNone: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "reasoning requires a knowledge type");
}

Sample make_cpt_sample(std::string text, std::vector<PersonId> persons, KnowledgeClass cls,
                       TaskKind kind) {
  Sample s;
  s.stage = Stage::kCpt;
  s.task_kind = kind;
  s.ktype = KType::kNone;
  s.answer = std::move(text);
  s.person_ids = std::move(persons);
  s.knowledge_class = cls;
  assign_id(s);
  return s;
}

std::string bio_text(const Person& p, const TemplatePack& t, const std::size_t idx[4]) {
  const std::string name = p.full_name();
  return render_template(t.birth[idx[0]], name, std::to_string(p.birth_year), p.gender) + " " +
         render_template(t.death[idx[1]], name, std::to_string(p.death_year), p.gender) + " " +
         render_template(t.major[idx[2]], name, p.major, p.gender) + " " +
         render_template(t.university[idx[3]], name, p.university, p.gender);
}

// Per-person BIO variants: each attribute sentence walks its own seeded
// permutation of templates, so all `count` variants are distinct.
void append_bios(const Person& p, int count, KnowledgeClass cls, const TemplatePack& t,
                 std::uint64_t seed, std::vector<Sample>& out) {
  const std::string base = "cpt/bio/" + std::to_string(p.id) + "/";
  const auto pb = Rng(seed, base + "birth").permutation(t.birth.size());
  const auto pd = Rng(seed, base + "death").permutation(t.death.size());
  const auto pm = Rng(seed, base + "major").permutation(t.major.size());
  const auto pu = Rng(seed, base + "university").permutation(t.university.size());
  for (int v = 0; v < count; ++v) {
    const auto i = static_cast<std::size_t>(v);
    const std::size_t idx[4] = {pb[i], pd[i], pm[i], pu[i]};
    out.push_back(make_cpt_sample(bio_text(p, t, idx), {p.id}, cls, TaskKind::kBio));
  }
}

std::vector<const Person*> resolve(std::span<const Person> persons,
                                   std::span<const PersonId> ids) {
  std::unordered_map<PersonId, const Person*> by_id;
  for (const auto& p : persons) by_id.emplace(p.id, &p);
  std::vector<const Person*> out;
  out.reserve(ids.size());
  for (PersonId id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end())
      throw Error(ErrorCode::kUnknownId, "pool references unknown person " + std::to_string(id));
    out.push_back(it->second);
  }
  return out;
}

std::string field_key(const Person& p, KType k) {
  return k == KType::kM ? oracles::field_of(p.major) : p.university;
}

}  // namespace

void RephraseSchedule::validate() const {
  if (known_count < 1 || aux_count < 1)
    throw Error(ErrorCode::kInvalidArgument, "rephrase counts must be >= 1");
  if (test_subgroup_counts.empty())
    throw Error(ErrorCode::kInvalidArgument, "at least one test subgroup is required");
  for (int c : test_subgroup_counts)
    if (c < 1) throw Error(ErrorCode::kInvalidArgument, "rephrase counts must be >= 1");
}

TemplatePack load_template_pack(const std::filesystem::path& dir) {
  TemplatePack t;
  t.birth = read_templates(dir / "birth.txt", false);
  t.death = read_templates(dir / "death.txt", false);
  t.major = read_templates(dir / "major.txt", false);
  t.university = read_templates(dir / "university.txt", false);
  t.major_field = read_templates(dir / "major_field.txt", true);
  t.university_country = read_templates(dir / "university_country.txt", true);
  return t;
}

std::string render_template(std::string_view tpl, std::string_view name, std::string_view value,
                            std::optional<Gender> gender) {
  std::string out(tpl);
  replace_all(out, "{name}", name);
  replace_all(out, "{value}", value);
  if (gender) {
    replace_all(out, "{pronoun}", *gender == Gender::kF ? "she" : "he");
    replace_all(out, "{possessive}", *gender == Gender::kF ? "her" : "his");
  }
  return out;
}

std::vector<int> test_subgroups(const KnowledgePools& pools, std::size_t n_groups,
                                std::uint64_t seed) {
  const std::size_t n = pools.test.size();
  const auto order = Rng(seed, "cpt/test_subgroups").permutation(n);
  std::vector<int> group(n, 0);
  // Position r in the seeded order lands in group floor(r * G / n).
  for (std::size_t r = 0; r < n; ++r)
    group[order[r]] = static_cast<int>(r * n_groups / n);
  return group;
}

std::vector<Sample> build_cpt_corpus(std::span<const Person> persons,
                                     const KnowledgePools& pools,
                                     const RephraseSchedule& schedule,
                                     const TemplatePack& templates, std::uint64_t seed) {
  schedule.validate();
  const int max_count =
      std::max(schedule.known_count, *std::max_element(schedule.test_subgroup_counts.begin(),
                                                       schedule.test_subgroup_counts.end()));
  require_templates(templates.birth, max_count, "birth");
  require_templates(templates.death, max_count, "death");
  require_templates(templates.major, max_count, "major");
  require_templates(templates.university, max_count, "university");
  require_templates(templates.major_field, schedule.aux_count, "major_field");
  require_templates(templates.university_country, schedule.aux_count, "university_country");

  const auto known = resolve(persons, pools.known);
  const auto test = resolve(persons, pools.test);
  const auto groups = test_subgroups(pools, schedule.test_subgroup_counts.size(), seed);

  struct Job {
    const Person* person;
    int count;
    KnowledgeClass cls;
  };
  std::vector<Job> jobs;
  for (const auto* p : known) jobs.push_back({p, schedule.known_count, KnowledgeClass::kKnown});
  for (std::size_t i = 0; i < test.size(); ++i)
    jobs.push_back({test[i], schedule.test_subgroup_counts[static_cast<std::size_t>(groups[i])],
                    KnowledgeClass::kTest});

  std::vector<std::vector<Sample>> per_job(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    append_bios(*jobs[i].person, jobs[i].count, jobs[i].cls, templates, seed, per_job[i]);
  });

  std::vector<Sample> out;
  for (auto& chunk : per_job)
    for (auto& s : chunk) out.push_back(std::move(s));

  for (const auto& fact : aux_tables()) {
    const auto& pack =
        fact.kind == AuxKind::kMajorField ? templates.major_field : templates.university_country;
    const auto perm = Rng(seed, "cpt/aux/" + std::string(to_string(fact.kind)) + "/" + fact.key)
                          .permutation(pack.size());
    for (int v = 0; v < schedule.aux_count; ++v)
      out.push_back(make_cpt_sample(
          render_template(pack[perm[static_cast<std::size_t>(v)]], fact.key, fact.value), {},
          KnowledgeClass::kKnown, TaskKind::kAux));
  }
  return out;
}

Stage stage_for(KnowledgeClass c) {
  return (c == KnowledgeClass::kKnown || c == KnowledgeClass::kUnknown) ? Stage::kSft
                                                                        : Stage::kTest;
}

Sample build_qa(const Person& person, KType ktype, KnowledgeClass knowledge_class) {
  const std::string n = person.full_name();
  Sample s;
  s.stage = stage_for(knowledge_class);
  s.task_kind = TaskKind::kQa;
  s.ktype = ktype;
  switch (ktype) {
    case KType::kB: s.question = "When was " + n + " born?"; break;
    case KType::kD: s.question = "When did " + n + " die?"; break;
    case KType::kM: s.question = "What major did " + n + " study?"; break;
    case KType::kU: s.question = "Which university did " + n + " graduate from?"; break;
    case KType::kNone:
      throw Error(ErrorCode::kInvalidArgument, "QA requires a knowledge type");
  }
  s.answer = attribute_value(person, ktype);
  s.person_ids = {person.id};
  s.knowledge_class = knowledge_class;
  assign_id(s);
  return s;
}

Sample build_reasoning(TaskKind kind, KType ktype, PoolMember primary,
                       std::optional<PoolMember> partner, const ReasoningParams& params) {
  if (!is_reasoning(kind))
    throw Error(ErrorCode::kInvalidArgument, "build_reasoning expects SR, CR or NR");
  if (primary.person == nullptr) throw Error(ErrorCode::kInvalidArgument, "missing person");
  if (kind == TaskKind::kCr) {
    if (!partner || partner->person == nullptr)
      throw Error(ErrorCode::kInvalidArgument, "CR requires a partner");
    if (partner->knowledge_class != primary.knowledge_class)
      throw Error(ErrorCode::kMixedPool,
                  "CR pair mixes " + std::string(to_string(primary.knowledge_class)) + " and " +
                      std::string(to_string(partner->knowledge_class)) + " persons");
    if (partner->person->id == primary.person->id)
      throw Error(ErrorCode::kInvalidArgument, "CR partner must differ from the primary");
  } else if (partner) {
    throw Error(ErrorCode::kInvalidArgument, "only CR takes a partner");
  }

  Rendered r;
  switch (kind) {
    case TaskKind::kSr: r = render_sr(ktype, *primary.person, params); break;
    case TaskKind::kCr: r = render_cr(ktype, *primary.person, *partner->person); break;
    default: r = render_nr(ktype, *primary.person); break;
  }

  Sample s;
  s.stage = stage_for(primary.knowledge_class);
  s.task_kind = kind;
  s.ktype = ktype;
  s.question = std::move(r.question);
  s.answer = r.answer;
  s.cot = with_answer(std::move(r.rationale), r.answer);
  s.person_ids = {primary.person->id};
  if (kind == TaskKind::kCr) s.person_ids.push_back(partner->person->id);
  s.knowledge_class = primary.knowledge_class;
  assign_id(s);
  return s;
}

std::vector<std::pair<PersonId, PersonId>> build_cr_pairing(std::span<const Person> pool,
                                                            KType ktype, std::uint64_t seed) {
  if (pool.size() < 2)
    throw Error(ErrorCode::kInfeasible, "CR pairing needs at least two persons");
  if (ktype == KType::kNone) throw Error(ErrorCode::kInvalidArgument, "CR needs a type");

  std::vector<const Person*> people;
  for (const auto& p : pool) people.push_back(&p);
  std::sort(people.begin(), people.end(), [](auto* a, auto* b) { return a->id < b->id; });
  const std::size_t n = people.size();
  Rng rng(seed, "pairing/" + std::string(to_string(ktype)));

  // accept(i, j): whether j is a valid partner for i under i's target label.
  std::vector<int> want_yes(n, -1);
  const bool balanced = ktype == KType::kM || ktype == KType::kU;
  std::vector<std::string> key(n);
  if (balanced) {
    std::map<std::string, std::size_t> group_size;
    for (std::size_t i = 0; i < n; ++i) {
      key[i] = field_key(*people[i], ktype);
      ++group_size[key[i]];
    }
    const std::size_t target_yes = n / 2 + ((n % 2 == 1) ? rng.below(2) : 0);
    std::size_t forced_yes = 0, forced_no = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t same = group_size[key[i]] - 1;
      if (same == 0) {
        want_yes[i] = 0;
        ++forced_no;
      } else if (same == n - 1) {
        want_yes[i] = 1;
        ++forced_yes;
      }
    }
    if (forced_yes > target_yes || forced_no > n - target_yes)
      throw Error(ErrorCode::kInfeasible,
                  "cannot balance YES/NO pairs for type " + std::string(to_string(ktype)) +
                      " with this attribute distribution");
    std::size_t yes_left = target_yes - forced_yes;
    for (std::size_t idx : rng.permutation(n)) {
      if (want_yes[idx] != -1) continue;
      want_yes[idx] = yes_left > 0 ? 1 : 0;
      if (yes_left > 0) --yes_left;
    }
  }

  auto accept = [&](std::size_t i, std::size_t j) {
    if (i == j) return false;
    switch (ktype) {
      case KType::kD: return people[i]->death_year != people[j]->death_year;
      case KType::kM:
      case KType::kU: return (key[i] == key[j]) == (want_yes[i] == 1);
      default: return true;
    }
  };

  std::vector<std::pair<PersonId, PersonId>> pairs;
  pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::optional<std::size_t> partner;
    for (int attempt = 0; attempt < 64 && !partner; ++attempt) {
      const auto j = static_cast<std::size_t>(rng.below(n));
      if (accept(i, j)) partner = j;
    }
    if (!partner) {
      std::vector<std::size_t> candidates;
      for (std::size_t j = 0; j < n; ++j)
        if (accept(i, j)) candidates.push_back(j);
      if (candidates.empty())
        throw Error(ErrorCode::kInfeasible,
                    "no valid CR partner for person " + std::to_string(people[i]->id));
      partner = candidates[rng.below(candidates.size())];
    }
    pairs.emplace_back(people[i]->id, people[*partner]->id);
  }
  return pairs;
}

ReasoningSplit split_reasoning_qa(std::span<const PersonId> known_ids, std::uint64_t seed) {
  if (known_ids.size() < 5)
    throw Error(ErrorCode::kInvalidArgument, "reasoning/QA split needs at least 5 ids");
  std::vector<PersonId> ids(known_ids.begin(), known_ids.end());
  std::sort(ids.begin(), ids.end());
  Rng(seed, "split/reasoning_qa").shuffle(ids);
  const std::size_t n_reasoning = (ids.size() * 8 + 5) / 10;
  ReasoningSplit split;
  split.reasoning.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_reasoning));
  split.qa.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_reasoning), ids.end());
  std::sort(split.reasoning.begin(), split.reasoning.end());
  std::sort(split.qa.begin(), split.qa.end());
  return split;
}

json to_json(const ReasoningSplit& split) {
  return json{{"reasoning", split.reasoning}, {"qa", split.qa}};
}

ReasoningSplit reasoning_split_from_json(const json& j) {
  try {
    return {j.at("reasoning").get<std::vector<PersonId>>(),
            j.at("qa").get<std::vector<PersonId>>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("splits.json: ") + e.what());
  }
}

WikiIngest ingest_wiki(const std::filesystem::path& path, int per_subset_target,
                       std::uint64_t seed) {
  if (per_subset_target < 0)
    throw Error(ErrorCode::kInvalidArgument, "per-subset target must be non-negative");
  const auto lines = read_lines(path);
  std::map<std::string, std::vector<Sample>> by_subset;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    json j;
    try {
      j = json::parse(lines[i]);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParse, where + ": " + e.what());
    }
    Sample s;
    std::string subset;
    try {
      s.question = j.at("question").get<std::string>();
      const auto answers = j.at("answers").get<std::vector<std::string>>();
      if (answers.empty()) throw Error(ErrorCode::kParse, where + ": empty answers list");
      s.answer = answers.front();
      subset = j.at("subset").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse, where + ": " + e.what());
    }
    s.stage = Stage::kTest;
    s.task_kind = TaskKind::kQa;
    s.ktype = KType::kNone;
    s.knowledge_class = KnowledgeClass::kExternal;
    assign_id(s);
    by_subset[subset].push_back(std::move(s));
  }

  WikiIngest result;
  if (by_subset.empty()) {
    result.warnings.push_back({"wiki_empty", path.string() + " contains no records"});
    return result;
  }
  std::unordered_set<std::string> seen;
  const auto target = static_cast<std::size_t>(per_subset_target);
  for (auto& [subset, records] : by_subset) {
    Rng(seed, "wiki/" + subset).shuffle(records);
    if (records.size() < target)
      result.warnings.push_back({"wiki_shortage", "subset '" + subset + "' has " +
                                                      std::to_string(records.size()) +
                                                      " questions, target " +
                                                      std::to_string(target)});
    std::size_t taken = 0;
    for (auto& s : records) {
      if (taken == target) break;
      if (!seen.insert(s.id).second) {
        result.warnings.push_back({"wiki_duplicate", "duplicate question skipped: " + s.question});
        continue;
      }
      result.samples.push_back(std::move(s));
      ++taken;
    }
  }
  return result;
}

Corpus build_corpus(std::span<const Person> persons, const KnowledgePools& pools,
                    const TemplatePack& templates, const CorpusConfig& config) {
  Corpus corpus;
  corpus.cpt = build_cpt_corpus(persons, pools, config.schedule, templates, config.seed);
  corpus.split = split_reasoning_qa(pools.known, config.seed);

  auto emit = [&](std::span<const PersonId> qa_ids, std::span<const PersonId> reasoning_ids,
                  KnowledgeClass cls, std::vector<Sample>& out) {
    const auto qa_people = resolve(persons, qa_ids);
    for (auto k : kKnowledgeTypes)
      for (const auto* p : qa_people) out.push_back(build_qa(*p, k, cls));
    if (reasoning_ids.empty()) return;
    const auto people = resolve(persons, reasoning_ids);
    std::vector<Person> members;
    for (const auto* p : people) members.push_back(*p);
    std::unordered_map<PersonId, const Person*> by_id;
    for (const auto* p : people) by_id.emplace(p->id, p);
    for (auto k : kKnowledgeTypes) {
      for (const auto* p : people) {
        out.push_back(build_reasoning(TaskKind::kSr, k, {p, cls}, std::nullopt, config.params));
        out.push_back(build_reasoning(TaskKind::kNr, k, {p, cls}, std::nullopt, config.params));
      }
      const auto pairs = build_cr_pairing(
          members, k, splitmix64(config.seed ^ fnv1a64(to_string(cls))));
      for (const auto& [a, b] : pairs)
        out.push_back(build_reasoning(TaskKind::kCr, k, {by_id.at(a), cls},
                                      PoolMember{by_id.at(b), cls}, config.params));
    }
  };

  emit(pools.known, corpus.split.reasoning, KnowledgeClass::kKnown, corpus.sft);
  emit(pools.unknown, pools.unknown, KnowledgeClass::kUnknown, corpus.sft);
  emit(pools.test, pools.test, KnowledgeClass::kTest, corpus.test);

  for (const auto* set : {&corpus.cpt, &corpus.sft, &corpus.test}) {
    std::unordered_set<std::string> ids;
    for (const auto& s : *set)
      if (!ids.insert(s.id).second)
        throw Error(ErrorCode::kInvalidArgument, "sample id collision: " + s.id);
  }
  return corpus;
}

std::string render_context(const Sample& s, const PromptFormat& format) {
  const std::string& response = s.cot.empty() ? s.answer : s.cot;
  if (!format.chat) return "Question: " + s.question + "\nAnswer: " + response;
  return "<|im_start|>system\n" + format.system + "<|im_end|>\n<|im_start|>user\n" + s.question +
         "<|im_end|>\n<|im_start|>assistant\n" + response + "<|im_end|>";
}

}  // namespace biopatch
