#include <gtest/gtest.h>

#include "biopatch/error.hpp"
#include "biopatch/persona.hpp"
#include "biopatch/similarity.hpp"
#include "reference.hpp"

using namespace biopatch;

TEST(Tokenize, Basics) {
  EXPECT_EQ(tokenize("Hello, World! it's 1987."),
            (std::vector<std::string>{"hello", "world", "it", "s", "1987"}));
  EXPECT_TRUE(tokenize("  ,.;  ").empty());
  EXPECT_EQ(tokenize("Tübingen"), (std::vector<std::string>{"t\xc3\xbc" "bingen"}));
}

TEST(ContextSimilarity, Values) {
  EXPECT_DOUBLE_EQ(context_similarity("the cat sat", "the cat sat"), 1.0);
  EXPECT_DOUBLE_EQ(context_similarity("the cat", "the dog"), 0.5);
  EXPECT_DOUBLE_EQ(context_similarity("x y", "x x"), 1.0);
  EXPECT_DOUBLE_EQ(context_similarity("x x", "x y"), 0.5);
  EXPECT_DOUBLE_EQ(context_similarity("", "a b"), 0.0);
  EXPECT_DOUBLE_EQ(context_similarity("A B", "a, b"), 1.0);
  EXPECT_THROW(context_similarity("a", " ?! "), Error);
}

TEST(GroupSimilarity, SkipsEmpty) {
  const std::vector<std::string> group = {"the cat", "", "the dog"};
  Warnings w;
  EXPECT_DOUBLE_EQ(group_similarity("the cat", group, &w), 0.75);
  EXPECT_EQ(w.size(), 1u);
  const std::vector<std::string> empty = {"", "..."};
  EXPECT_THROW(group_similarity("x", empty), Error);
}

TEST(TaskSimilarity, GroupOrderingOnCorpus) {
  const auto names = load_name_pools(ref::data_dir() / "names");
  const auto people = generate_population(5, 300, names);
  const auto pools = split_pools(5, people, {100, 100, 100});
  CorpusConfig cfg;
  cfg.seed = 5;
  cfg.schedule = {1, {1}, 1};
  const auto corpus = build_corpus(people, pools, load_template_pack(ref::data_dir() / "templates"), cfg);
  const auto anchors = reasoning_tasks();
  ASSERT_EQ(anchors.size(), 12u);
  const auto s = mean_task_similarity(corpus.test, anchors);
  ASSERT_TRUE(s.groups.contains(TestGroup::kStqa));
  EXPECT_GT(s.groups.at(TestGroup::kStqa), s.groups.at(TestGroup::kDtqa));
  EXPECT_GT(s.groups.at(TestGroup::kDtqa), s.groups.at(TestGroup::kStdr));
  EXPECT_GT(s.groups.at(TestGroup::kStdr), s.groups.at(TestGroup::kDtdr));
  for (const auto& [g, v] : s.groups) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  const auto one = task_similarity(corpus.test, task_id_from_string("M_SR"));
  EXPECT_EQ(one.anchor, "M_SR");
  EXPECT_GT(one.pairs.at(TestGroup::kStqa), 0u);
  const auto j = to_json(one);
  EXPECT_TRUE(j["groups"].contains("STQA"));
}
