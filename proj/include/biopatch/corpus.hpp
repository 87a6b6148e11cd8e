#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "biopatch/error.hpp"
#include "biopatch/persona.hpp"
#include "biopatch/sample.hpp"

namespace biopatch {

/// Exposure counts for the CPT corpus. Test persons are split into
/// test_subgroup_counts.size() near-equal groups, group g rephrased
/// test_subgroup_counts[g] times.
struct RephraseSchedule {
  int known_count = 50;
  std::vector<int> test_subgroup_counts = {5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
  int aux_count = 50;

  void validate() const;
};

/// Paraphrase templates, one surface form per line. Person templates use
/// {name} and {value}, and may use {pronoun} (he/she) and {possessive}
/// (his/her). Aux templates use {name} for the key and {value} for the
/// mapped field or country.
struct TemplatePack {
  std::vector<std::string> birth;
  std::vector<std::string> death;
  std::vector<std::string> major;
  std::vector<std::string> university;
  std::vector<std::string> major_field;
  std::vector<std::string> university_country;
};

TemplatePack load_template_pack(const std::filesystem::path& dir);

std::string render_template(std::string_view tpl, std::string_view name, std::string_view value,
                            std::optional<Gender> gender = std::nullopt);

/// BIO samples for known and test persons plus AUX samples. Unknown persons
/// never appear.
std::vector<Sample> build_cpt_corpus(std::span<const Person> persons,
                                     const KnowledgePools& pools,
                                     const RephraseSchedule& schedule,
                                     const TemplatePack& templates, std::uint64_t seed);

/// Test-pool subgroup index per test person id (same order as pools.test),
/// as used by build_cpt_corpus.
std::vector<int> test_subgroups(const KnowledgePools& pools, std::size_t n_groups,
                                std::uint64_t seed);

/// SFT for known/unknown persons, TEST for test and external samples.
Stage stage_for(KnowledgeClass c);

Sample build_qa(const Person& person, KType ktype, KnowledgeClass knowledge_class);

struct ReasoningParams {
  int anniversary_years = 10;
};

struct PoolMember {
  const Person* person = nullptr;
  KnowledgeClass knowledge_class = KnowledgeClass::kKnown;
};

/// CR requires `partner` and both members must share a knowledge class
/// (kMixedPool otherwise); SR and NR reject a partner.
Sample build_reasoning(TaskKind kind, KType ktype, PoolMember primary,
                       std::optional<PoolMember> partner, const ReasoningParams& params = {});

/// One (primary, partner) pair per person, in ascending primary id. For M and
/// U the number of YES pairs is exactly floor(n/2) or ceil(n/2); for D the
/// partners never share a death year.
std::vector<std::pair<PersonId, PersonId>> build_cr_pairing(std::span<const Person> pool,
                                                            KType ktype, std::uint64_t seed);

struct ReasoningSplit {
  std::vector<PersonId> reasoning;
  std::vector<PersonId> qa;
};

/// round(0.8 n) ids for reasoning, the rest for QA; both sorted.
ReasoningSplit split_reasoning_qa(std::span<const PersonId> known_ids, std::uint64_t seed);

json to_json(const ReasoningSplit& split);
ReasoningSplit reasoning_split_from_json(const json& j);

struct WikiIngest {
  std::vector<Sample> samples;
  Warnings warnings;
};

/// Reads JSONL records {question, answers, subset} and draws up to
/// per_subset_target questions from every subset. The gold answer is the
/// first entry of `answers`.
WikiIngest ingest_wiki(const std::filesystem::path& path, int per_subset_target,
                       std::uint64_t seed);

struct CorpusConfig {
  std::uint64_t seed = 0;
  RephraseSchedule schedule;
  ReasoningParams params;
};

struct Corpus {
  std::vector<Sample> cpt;
  std::vector<Sample> sft;
  std::vector<Sample> test;
  ReasoningSplit split;
};

/// Full dataset: CPT texts, SFT samples (QA for every known person, the 12
/// reasoning tasks for the reasoning split, and QA plus reasoning for every
/// unknown person) and TEST samples for the test pool.
Corpus build_corpus(std::span<const Person> persons, const KnowledgePools& pools,
                    const TemplatePack& templates, const CorpusConfig& config);

/// Rendering used for training text and for context comparisons. The chat
/// layout wraps the question and the response (cot when present, otherwise
/// the answer) in a system/user/assistant frame.
struct PromptFormat {
  bool chat = true;
  std::string system = "You are a helpful assistant.";
};

std::string render_context(const Sample& s, const PromptFormat& format = {});

}  // namespace biopatch
