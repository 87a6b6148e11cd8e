#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>

#include "biopatch/corpus.hpp"
#include "biopatch/error.hpp"
#include "biopatch/evalkit.hpp"
#include "reference.hpp"

using namespace biopatch;

namespace {

Person make(PersonId id, std::string first, std::string last, int birth, int death,
            std::string major, std::string university, Gender g = Gender::kM) {
  return Person{id, std::move(first), g, std::move(last), birth, death, std::move(major),
                std::move(university)};
}

const Person kHsiao = make(1, "Darreus", "Hsiao", 1974, 2017, "Dentistry", "Zhejiang University");
const Person kCheung = make(2, "Aydn", "Cheung", 1858, 1919, "History", "Kyoto University");
const Person kHong = make(3, "Virgus", "Hong", 1900, 1970, "Nursing", "Kyoto University");
const Person kFung = make(4, "Angee", "Fung", 1901, 1971, "Nursing", "Kyoto University", Gender::kF);

const TemplatePack& templates() {
  static const TemplatePack t = load_template_pack(ref::data_dir() / "templates");
  return t;
}

const NamePools& names() {
  static const NamePools p = load_name_pools(ref::data_dir() / "names");
  return p;
}

Sample reasoning(TaskKind kind, KType k, const Person& a, const Person* b = nullptr) {
  std::optional<PoolMember> partner;
  if (b) partner = PoolMember{b, KnowledgeClass::kKnown};
  return build_reasoning(kind, k, {&a, KnowledgeClass::kKnown}, partner);
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kIo;
}

}  // namespace

TEST(Qa, Templates) {
  const auto m = build_qa(kHsiao, KType::kM, KnowledgeClass::kKnown);
  EXPECT_EQ(m.question, "What major did Darreus Hsiao study?");
  EXPECT_EQ(m.answer, "Dentistry");
  EXPECT_EQ(m.stage, Stage::kSft);
  EXPECT_TRUE(m.cot.empty());
  EXPECT_EQ(m.person_ids, std::vector<PersonId>{1});
  EXPECT_EQ(build_qa(kHsiao, KType::kB, KnowledgeClass::kTest).answer, "1974");
  EXPECT_EQ(build_qa(kHsiao, KType::kB, KnowledgeClass::kTest).question, "When was Darreus Hsiao born?");
  EXPECT_EQ(build_qa(kHsiao, KType::kB, KnowledgeClass::kTest).stage, Stage::kTest);
  EXPECT_EQ(build_qa(kHsiao, KType::kD, KnowledgeClass::kKnown).question, "When did Darreus Hsiao die?");
  EXPECT_EQ(build_qa(kHsiao, KType::kU, KnowledgeClass::kKnown).question,
            "Which university did Darreus Hsiao graduate from?");
  EXPECT_EQ(build_qa(kHsiao, KType::kM, KnowledgeClass::kKnown).id, m.id);
  EXPECT_EQ(m.id.size(), 32u);
}

TEST(Reasoning, WorkedExamples) {
  struct Case {
    Sample s;
    std::string question;
    std::string cot;
    std::string answer;
  };
  const std::vector<Case> cases = {
      {reasoning(TaskKind::kSr, KType::kB, kHsiao),
       "Is the number of Darreus Hsiao's birth year an odd number?",
       "Darreus Hsiao was born in 1974. 1974 % 2 = 0. So 1974 is not an odd number.", "NO"},
      {reasoning(TaskKind::kCr, KType::kB, kHsiao, &kCheung),
       "How many years apart is the birth year between Darreus Hsiao and Aydn Cheung?",
       "Darreus Hsiao was born in 1974. Aydn Cheung was born in 1858. The difference is "
       "abs(1974 - 1858) = 116.",
       "116"},
      {reasoning(TaskKind::kNr, KType::kB, kHsiao), "What is the MScore of Darreus Hsiao's birth year?",
       "Darreus Hsiao was born in 1974. The four numbers are 1, 9, 7 and 4. So the MScore of it "
       "is 1 * 9 * 7 * 4 = 252.",
       "252"},
      {reasoning(TaskKind::kSr, KType::kD, kHsiao),
       "What year is the 10th anniversary of Darreus Hsiao's death?",
       "Darreus Hsiao died in 2017. 10 years after it should be 2017 + 10 = 2027.", "2027"},
      {reasoning(TaskKind::kCr, KType::kD, kHsiao, &kCheung), "Who died first, Darreus Hsiao or Aydn Cheung?",
       "Darreus Hsiao died in 2017. Aydn Cheung died in 1919. 1919 is earlier than 2017. So Aydn "
       "Cheung died first.",
       "Aydn Cheung"},
      {reasoning(TaskKind::kNr, KType::kD, kHsiao), "What is the AScore of Darreus Hsiao's death year?",
       "Darreus Hsiao died in 2017. The four numbers are 2, 0, 1 and 7. So the AScore of it is 2 + "
       "0 + 1 + 7 = 10.",
       "10"},
      {reasoning(TaskKind::kSr, KType::kM, kHsiao), "What field does Darreus Hsiao's major belong to?",
       "Darreus Hsiao's major is Dentistry. Dentistry belongs to Medicine.", "Medicine"},
      {reasoning(TaskKind::kCr, KType::kM, kHsiao, &kHong),
       "Do Darreus Hsiao and Virgus Hong's majors belong to the same field?",
       "Darreus Hsiao's major is Dentistry. Dentistry belongs to Medicine. Virgus Hong's major is "
       "Nursing. Nursing belongs to Medicine. Medicine and Medicine are the same.",
       "YES"},
      {reasoning(TaskKind::kNr, KType::kM, kHsiao),
       "What is the sequence of odd-positioned letters in the first word of Darreus Hsiao's major "
       "name?",
       "Darreus Hsiao's major is Dentistry. The first word of 'Dentistry' is 'Dentistry'. The "
       "spelling of Dentistry is D, E, N, T, I, S, T, R, Y. The sequence of odd-positioned letters "
       "in 'Dentistry' is DNITY.",
       "DNITY"},
      {reasoning(TaskKind::kSr, KType::kU, kHsiao), "In which country did Darreus Hsiao attend university?",
       "Darreus Hsiao was graduated from Zhejiang University. Zhejiang University is located in "
       "China.",
       "China"},
      {reasoning(TaskKind::kCr, KType::kU, kHsiao, &kFung), "Are Darreus Hsiao and Angee Fung college alumni?",
       "Darreus Hsiao was graduated from Zhejiang University. Angee Fung was graduated from Kyoto "
       "University. Zhejiang University and Kyoto University are not the same.",
       "NO"},
      {reasoning(TaskKind::kNr, KType::kU, kHsiao),
       "What is the sequence of the first and last letters of each word in Darreus Hsiao's "
       "university name?",
       "Darreus Hsiao was graduated from Zhejiang University, which can be splitted into words: "
       "Zhejiang, University. The first and last letters of 'Zhejiang' are ZG. The first and last "
       "letters of 'University' are UY. So, the whole sequence is ZGUY.",
       "ZGUY"},
  };
  for (const auto& c : cases) {
    EXPECT_EQ(c.s.question, c.question);
    EXPECT_EQ(c.s.cot, c.cot + "\nThe answer is: " + c.answer);
    EXPECT_EQ(c.s.answer, c.answer);
    EXPECT_EQ(parse_final_answer(c.s.cot, c.s.task_kind), c.answer);
  }
}

TEST(Reasoning, PartnerContracts) {
  EXPECT_EQ(code_of([] { reasoning(TaskKind::kCr, KType::kB, kHsiao); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { reasoning(TaskKind::kSr, KType::kB, kHsiao, &kCheung); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { reasoning(TaskKind::kCr, KType::kB, kHsiao, &kHsiao); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] {
              build_reasoning(TaskKind::kCr, KType::kB, {&kHsiao, KnowledgeClass::kKnown},
                              PoolMember{&kCheung, KnowledgeClass::kUnknown});
            }),
            ErrorCode::kMixedPool);
  const auto cr = reasoning(TaskKind::kCr, KType::kB, kHsiao, &kCheung);
  EXPECT_EQ(cr.person_ids, (std::vector<PersonId>{1, 2}));
  ReasoningParams p;
  p.anniversary_years = 25;
  const auto d = build_reasoning(TaskKind::kSr, KType::kD, {&kHsiao, KnowledgeClass::kKnown}, {}, p);
  EXPECT_EQ(d.answer, "2042");
  EXPECT_NE(d.question.find("25th anniversary"), std::string::npos);
}

TEST(Templates, PackLoadsAndRenders) {
  const auto& t = templates();
  for (const auto* v : {&t.birth, &t.death, &t.major, &t.university, &t.major_field,
                        &t.university_country}) {
    EXPECT_GE(v->size(), 50u);
    EXPECT_EQ(std::set<std::string>(v->begin(), v->end()).size(), v->size());
  }
  EXPECT_EQ(render_template("{name} was born in {value}.", "A B", "1900"), "A B was born in 1900.");
  EXPECT_EQ(render_template("{pronoun} studied {value}; {possessive} field", "A", "Law", Gender::kF),
            "she studied Law; her field");
}

TEST(Cpt, CountsAndCoverage) {
  const auto people = generate_population(3, 300, names());
  const auto pools = split_pools(3, people, {100, 100, 100});
  const auto cpt = build_cpt_corpus(people, pools, {}, templates(), 3);
  std::map<PersonId, int> bio;
  int aux = 0;
  for (const auto& s : cpt) {
    EXPECT_EQ(s.stage, Stage::kCpt);
    EXPECT_TRUE(s.question.empty());
    if (s.task_kind == TaskKind::kAux) {
      ++aux;
      continue;
    }
    ASSERT_EQ(s.task_kind, TaskKind::kBio);
    ASSERT_EQ(s.person_ids.size(), 1u);
    const auto& p = people[static_cast<std::size_t>(s.person_ids[0])];
    ++bio[p.id];
    for (const auto& part : {p.full_name(), std::to_string(p.birth_year), std::to_string(p.death_year),
                             p.major, p.university})
      EXPECT_NE(s.answer.find(part), std::string::npos) << s.answer;
  }
  EXPECT_EQ(aux, 100 * 50);
  for (auto id : pools.unknown) EXPECT_FALSE(bio.contains(id));
  for (auto id : pools.known) EXPECT_EQ(bio[id], 50);
  const auto groups = test_subgroups(pools, 10, 3);
  std::map<int, int> group_sizes;
  for (std::size_t i = 0; i < pools.test.size(); ++i) {
    ++group_sizes[groups[i]];
    EXPECT_EQ(bio[pools.test[i]], 5 * (groups[i] + 1));
  }
  for (const auto& [g, n] : group_sizes) EXPECT_EQ(n, 10);
  std::set<std::string> ids;
  for (const auto& s : cpt) EXPECT_TRUE(ids.insert(s.id).second);
}

TEST(Cpt, DegenerateScheduleAndShortage) {
  const auto people = generate_population(3, 30, names());
  const auto pools = split_pools(3, people, {10, 10, 10});
  RephraseSchedule one{1, {1}, 1};
  const auto cpt = build_cpt_corpus(people, pools, one, templates(), 3);
  EXPECT_EQ(cpt.size(), 10u + 10u + 100u);
  RephraseSchedule many{51, {5}, 1};
  EXPECT_EQ(code_of([&] { build_cpt_corpus(people, pools, many, templates(), 3); }),
            ErrorCode::kTemplateShortage);
}

TEST(Pairing, BalancedAndValid) {
  const auto people = generate_population(9, 3000, names());
  std::vector<Person> pool(people.begin(), people.begin() + 1000);
  for (auto k : kKnowledgeTypes) {
    const auto pairs = build_cr_pairing(pool, k, 9);
    ASSERT_EQ(pairs.size(), 1000u);
    int yes = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& [a, b] = pairs[i];
      EXPECT_EQ(a, pool[i].id);
      EXPECT_NE(a, b);
      const auto& pa = people[static_cast<std::size_t>(a)];
      const auto& pb = people[static_cast<std::size_t>(b)];
      if (k == KType::kD) EXPECT_NE(pa.death_year, pb.death_year);
      if (k == KType::kM) yes += ref::field(pa.major) == ref::field(pb.major);
      if (k == KType::kU) yes += pa.university == pb.university;
    }
    if (k == KType::kM || k == KType::kU) EXPECT_EQ(yes, 500) << to_string(k);
    EXPECT_EQ(pairs, build_cr_pairing(pool, k, 9));
  }
}

TEST(Pairing, MinimalAndInfeasible) {
  std::vector<Person> two = {kHsiao, kCheung};
  const auto pairs = build_cr_pairing(two, KType::kB, 1);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0], std::make_pair(1, 2));
  EXPECT_EQ(pairs[1], std::make_pair(2, 1));
  std::vector<Person> one = {kHsiao};
  EXPECT_EQ(code_of([&] { build_cr_pairing(one, KType::kB, 1); }), ErrorCode::kInfeasible);
  // Same university everywhere: alumni can never be NO.
  std::vector<Person> same = {kCheung, kHong, kFung};
  EXPECT_EQ(code_of([&] { build_cr_pairing(same, KType::kU, 1); }), ErrorCode::kInfeasible);
}

TEST(Split, EightyTwenty) {
  std::vector<PersonId> ids(1000);
  for (int i = 0; i < 1000; ++i) ids[static_cast<std::size_t>(i)] = i * 3;
  const auto s = split_reasoning_qa(ids, 4);
  EXPECT_EQ(s.reasoning.size(), 800u);
  EXPECT_EQ(s.qa.size(), 200u);
  std::set<PersonId> all(s.reasoning.begin(), s.reasoning.end());
  all.insert(s.qa.begin(), s.qa.end());
  EXPECT_EQ(all.size(), 1000u);
  const std::vector<PersonId> five = {1, 2, 3, 4, 5};
  const auto small = split_reasoning_qa(five, 4);
  EXPECT_EQ(small.reasoning.size(), 4u);
  EXPECT_EQ(small.qa.size(), 1u);
  const std::vector<PersonId> four = {1, 2, 3, 4};
  EXPECT_EQ(code_of([&] { split_reasoning_qa(four, 4); }), ErrorCode::kInvalidArgument);
  const auto back = reasoning_split_from_json(to_json(s));
  EXPECT_EQ(back.reasoning, s.reasoning);
  EXPECT_EQ(back.qa, s.qa);
}

TEST(Wiki, BalancedSampling) {
  ref::TempDir dir("wiki");
  const auto path = dir.path / "wiki.jsonl";
  {
    std::ofstream out(path);
    for (int sub = 0; sub < 10; ++sub)
      for (int i = 0; i < 120; ++i)
        out << R"({"question":"q)" << sub << "_" << i << R"(?","answers":["a)" << i
            << R"(","alt"],"subset":"s)" << sub << "\"}\n";
    for (int i = 0; i < 3; ++i)
      out << R"({"question":"tiny)" << i << R"(?","answers":["x"],"subset":"tiny"})" << "\n";
  }
  const auto w = ingest_wiki(path, 100, 5);
  EXPECT_EQ(w.samples.size(), 1003u);
  ASSERT_EQ(w.warnings.size(), 1u);
  EXPECT_EQ(w.warnings[0].code, "wiki_shortage");
  for (const auto& s : w.samples) {
    EXPECT_EQ(s.knowledge_class, KnowledgeClass::kExternal);
    EXPECT_EQ(s.ktype, KType::kNone);
    EXPECT_EQ(s.stage, Stage::kTest);
    EXPECT_EQ(test_set_id(s), "wiki");
    EXPECT_TRUE(s.answer == "x" || s.answer.rfind("a", 0) == 0) << s.answer;
  }
  EXPECT_EQ(samples_jsonl(w.samples), samples_jsonl(ingest_wiki(path, 100, 5).samples));

  const auto empty = dir.path / "empty.jsonl";
  std::ofstream(empty).close();
  const auto e = ingest_wiki(empty, 100, 5);
  EXPECT_TRUE(e.samples.empty());
  ASSERT_EQ(e.warnings.size(), 1u);
  EXPECT_EQ(e.warnings[0].code, "wiki_empty");

  const auto bad = dir.path / "bad.jsonl";
  std::ofstream(bad) << R"({"question":"a","answers":["b"],"subset":"s"})" << "\n{oops\n";
  try {
    ingest_wiki(bad, 10, 1);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(err.what()).find(":2"), std::string::npos) << err.what();
  }
}

TEST(Corpus, ComposesAllPools) {
  const auto people = generate_population(21, 300, names());
  const auto pools = split_pools(21, people, {100, 100, 100});
  CorpusConfig cfg;
  cfg.seed = 21;
  const auto c = build_corpus(people, pools, templates(), cfg);
  EXPECT_EQ(c.split.reasoning.size(), 80u);
  EXPECT_EQ(c.sft.size(), 100u * 4 + 80u * 12 + 100u * 16);
  EXPECT_EQ(c.test.size(), 100u * 16);
  std::map<PersonId, const Person*> by_id;
  for (const auto& p : people) by_id[p.id] = &p;
  std::map<PersonId, KnowledgeClass> cls;
  for (auto id : pools.known) cls[id] = KnowledgeClass::kKnown;
  for (auto id : pools.test) cls[id] = KnowledgeClass::kTest;
  for (auto id : pools.unknown) cls[id] = KnowledgeClass::kUnknown;
  for (const auto* set : {&c.sft, &c.test})
    for (const auto& s : *set) {
      EXPECT_EQ(s.answer, ref::expected_answer(s, by_id)) << s.question;
      for (auto id : s.person_ids) EXPECT_EQ(cls[id], s.knowledge_class);
      EXPECT_EQ(s.person_ids.size(), s.task_kind == TaskKind::kCr ? 2u : 1u);
      if (is_reasoning(s.task_kind))
        EXPECT_EQ(parse_final_answer(s.cot, s.task_kind), s.answer);
    }
}

TEST(Render, ChatAndPlain) {
  const auto qa = build_qa(kHsiao, KType::kM, KnowledgeClass::kKnown);
  EXPECT_EQ(render_context(qa, {false, ""}),
            "Question: What major did Darreus Hsiao study?\nAnswer: Dentistry");
  const auto chat = render_context(qa);
  EXPECT_NE(chat.find("<|im_start|>user\nWhat major did Darreus Hsiao study?<|im_end|>"),
            std::string::npos);
  EXPECT_NE(chat.find("<|im_start|>assistant\nDentistry<|im_end|>"), std::string::npos);
  const auto sr = reasoning(TaskKind::kSr, KType::kM, kHsiao);
  EXPECT_NE(render_context(sr).find(sr.cot), std::string::npos);
}
