#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biopatch/io.hpp"

namespace biopatch {

using PersonId = int;

enum class Gender { kF, kM };

inline constexpr int kMinBirthYear = 1800;
inline constexpr int kMaxBirthYear = 1980;
inline constexpr int kMinLifespan = 30;
inline constexpr int kMaxLifespan = 100;
inline constexpr int kLatestDeathYear = 2020;

struct Person {
  PersonId id = 0;
  std::string first_name;
  Gender gender = Gender::kF;
  std::string last_name;
  int birth_year = 0;
  int death_year = 0;
  std::string major;
  std::string university;

  std::string full_name() const { return first_name + " " + last_name; }

  bool operator==(const Person&) const = default;
};

struct NamePools {
  std::vector<std::string> female;
  std::vector<std::string> male;
  std::vector<std::string> surnames;
};

/// Reads female.txt, male.txt and surnames.txt (one name per line) from dir.
NamePools load_name_pools(const std::filesystem::path& dir);

/// Person i draws its attributes from a stream keyed by its id, and its
/// names from per-gender and per-surname-cycle permutations that do not
/// depend on n, so growing the population leaves earlier persons unchanged.
/// Even ids are F, odd ids are M.
std::vector<Person> generate_population(std::uint64_t seed, int n, const NamePools& pools);

struct PoolSizes {
  int known = 1000;
  int test = 1000;
  int unknown = 1000;

  int total() const { return known + test + unknown; }
};

struct KnowledgePools {
  std::uint64_t seed = 0;
  PoolSizes sizes;
  std::vector<PersonId> known;
  std::vector<PersonId> test;
  std::vector<PersonId> unknown;
};

/// Seeded disjoint partition; each list is returned in ascending id order.
KnowledgePools split_pools(std::uint64_t seed, std::span<const Person> persons, PoolSizes sizes);

enum class AuxKind { kMajorField, kUniversityCountry };

struct AuxFact {
  AuxKind kind;
  std::string key;
  std::string value;
};

/// The 100 auxiliary facts (50 majors -> 10 fields, 50 universities -> 10
/// countries), in table order.
const std::vector<AuxFact>& aux_tables();

std::optional<std::string> lookup(AuxKind kind, std::string_view key);

/// Keys of one aux kind, in table order.
std::vector<std::string> aux_keys(AuxKind kind);

std::string_view to_string(Gender g);
std::string_view to_string(AuxKind k);

json to_json(const Person& p);
Person person_from_json(const json& j);
json to_json(const KnowledgePools& pools);
KnowledgePools pools_from_json(const json& j);

/// people.jsonl content, sorted by id.
std::string people_jsonl(std::span<const Person> persons);
std::vector<Person> read_people(const std::filesystem::path& path);

}  // namespace biopatch
