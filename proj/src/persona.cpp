#include "biopatch/persona.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

#include "biopatch/error.hpp"
#include "biopatch/rng.hpp"

namespace biopatch {

namespace {

std::vector<std::string> read_name_file(const std::filesystem::path& path) {
  std::vector<std::string> names;
  for (auto& line : read_lines(path)) {
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t");
    names.push_back(line.substr(b, e - b + 1));
  }
  return names;
}

struct AuxRow {
  const char* value;
  const char* keys[5];
};

constexpr AuxRow kMajorFields[] = {
    {"Economics", {"Finance", "Investment", "Taxation", "Insurance", "Digital Economy"}},
    {"Law",
     {"Intellectual Property", "Criminal Justice", "Sociology", "International Politics",
      "Diplomacy"}},
    {"Literature", {"Journalism", "Advertising", "English", "French", "Russian"}},
    {"History",
     {"Chinese History", "World History", "Museum Studies", "Science History",
      "Historical Geography"}},
    {"Science", {"Mathematics", "Physics", "Chemistry", "Biology", "Geology"}},
    {"Engineering",
     {"Computer Science", "Software Engineering", "Automation", "Architecture",
      "Electrical Engineering"}},
    {"Medicine", {"Clinical Medicine", "Dentistry", "Pharmacy", "Nursing", "Public Health"}},
    {"Agriculture",
     {"Agronomy", "Horticulture", "Plant Protection", "Animal Science", "Forestry"}},
    {"Management",
     {"Accounting", "Finance Management", "Library Science", "Tourism Management",
      "Logistics Management"}},
    {"Art", {"Fine Arts", "Music", "Dance", "Art Theory", "Environmental Design"}},
};

constexpr AuxRow kUniversityCountries[] = {
    {"United States",
     {"Harvard University", "Stanford University", "Princeton University", "Yale University",
      "Columbia University"}},
    {"United Kingdom",
     {"University of Oxford", "University of Cambridge", "Imperial College London",
      "University College London", "University of Manchester"}},
    {"Canada",
     {"University of Toronto", "McGill University", "University of Alberta",
      "McMaster University", "University of Waterloo"}},
    {"Australia",
     {"University of Melbourne", "University of Sydney", "University of Queensland",
      "Monash University", "Macquarie University"}},
    {"Germany",
     {"Heidelberg University", "RWTH Aachen University", "University of Freiburg",
      "University of Hamburg", "University of T\xc3\xbc" "bingen"}},
    {"France",
     {"Sorbonne University", "University of Paris", "University of Strasbourg",
      "University of Lyon", "University of Bordeaux"}},
    {"China",
     {"Tsinghua University", "Peking University", "Fudan University", "Zhejiang University",
      "Nanjing University"}},
    {"Japan",
     {"Kyoto University", "Osaka University", "Tohoku University", "Nagoya University",
      "Hokkaido University"}},
    {"Singapore",
     {"Nanyang Technological University", "Singapore Management University",
      "Temasek Polytechnic", "Republic Polytechnic", "Singapore Polytechnic"}},
    {"South Korea",
     {"Seoul National University", "Korea University", "Yonsei University",
      "Sungkyunkwan University", "Hanyang University"}},
};

std::vector<AuxFact> build_aux() {
  std::vector<AuxFact> facts;
  for (const auto& row : kMajorFields)
    for (const char* key : row.keys) facts.push_back({AuxKind::kMajorField, key, row.value});
  for (const auto& row : kUniversityCountries)
    for (const char* key : row.keys)
      facts.push_back({AuxKind::kUniversityCountry, key, row.value});
  return facts;
}

}  // namespace

NamePools load_name_pools(const std::filesystem::path& dir) {
  NamePools pools;
  pools.female = read_name_file(dir / "female.txt");
  pools.male = read_name_file(dir / "male.txt");
  pools.surnames = read_name_file(dir / "surnames.txt");
  return pools;
}

std::vector<Person> generate_population(std::uint64_t seed, int n, const NamePools& pools) {
  if (n <= 0) throw Error(ErrorCode::kRange, "population size must be positive");
  const auto n_female = static_cast<std::size_t>((n + 1) / 2);
  const auto n_male = static_cast<std::size_t>(n / 2);
  if (n_female > pools.female.size() || n_male > pools.male.size())
    throw Error(ErrorCode::kPoolExhausted,
                "population of " + std::to_string(n) + " needs " + std::to_string(n_female) +
                    " female and " + std::to_string(n_male) + " male first names; pools have " +
                    std::to_string(pools.female.size()) + " and " +
                    std::to_string(pools.male.size()));
  if (pools.surnames.empty()) throw Error(ErrorCode::kPoolExhausted, "surname pool is empty");

  const auto female_order = Rng(seed, "names/female").permutation(pools.female.size());
  const auto male_order = Rng(seed, "names/male").permutation(pools.male.size());
  const auto& majors = aux_keys(AuxKind::kMajorField);
  const auto& universities = aux_keys(AuxKind::kUniversityCountry);
  const std::size_t n_surnames = pools.surnames.size();

  std::vector<Person> people;
  people.reserve(static_cast<std::size_t>(n));
  std::vector<std::size_t> surname_order;
  std::size_t surname_cycle = static_cast<std::size_t>(-1);
  std::unordered_set<std::string> seen;

  for (int id = 0; id < n; ++id) {
    const auto idx = static_cast<std::size_t>(id);
    Person p;
    p.id = id;
    p.gender = (id % 2 == 0) ? Gender::kF : Gender::kM;
    p.first_name = p.gender == Gender::kF ? pools.female[female_order[idx / 2]]
                                          : pools.male[male_order[idx / 2]];
    // Each block of |surnames| consecutive ids uses every surname once.
    if (idx / n_surnames != surname_cycle) {
      surname_cycle = idx / n_surnames;
      surname_order =
          Rng(seed, "names/surname/" + std::to_string(surname_cycle)).permutation(n_surnames);
    }
    p.last_name = pools.surnames[surname_order[idx % n_surnames]];

    Rng rng(seed, "person/" + std::to_string(id));
    p.birth_year = static_cast<int>(rng.between(kMinBirthYear, kMaxBirthYear));
    p.death_year = static_cast<int>(rng.between(
        p.birth_year + kMinLifespan, std::min(kLatestDeathYear, p.birth_year + kMaxLifespan)));
    p.major = majors[rng.below(majors.size())];
    p.university = universities[rng.below(universities.size())];

    if (!seen.insert(p.full_name()).second)
      throw Error(ErrorCode::kPoolExhausted, "duplicate full name " + p.full_name() +
                                                 "; name pools must hold distinct first names");
    people.push_back(std::move(p));
  }
  return people;
}

KnowledgePools split_pools(std::uint64_t seed, std::span<const Person> persons, PoolSizes sizes) {
  if (sizes.known < 0 || sizes.test < 0 || sizes.unknown < 0 ||
      static_cast<std::size_t>(sizes.total()) != persons.size())
    throw Error(ErrorCode::kSizeMismatch,
                "pool sizes " + std::to_string(sizes.known) + "+" + std::to_string(sizes.test) +
                    "+" + std::to_string(sizes.unknown) + " do not cover " +
                    std::to_string(persons.size()) + " persons");
  std::vector<PersonId> ids;
  ids.reserve(persons.size());
  for (const auto& p : persons) ids.push_back(p.id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw Error(ErrorCode::kInvalidArgument, "duplicate person ids");
  Rng(seed, "pools").shuffle(ids);

  KnowledgePools pools;
  pools.seed = seed;
  pools.sizes = sizes;
  auto take = [&](std::size_t from, int count) {
    std::vector<PersonId> part(ids.begin() + static_cast<std::ptrdiff_t>(from),
                               ids.begin() + static_cast<std::ptrdiff_t>(from) + count);
    std::sort(part.begin(), part.end());
    return part;
  };
  pools.known = take(0, sizes.known);
  pools.test = take(static_cast<std::size_t>(sizes.known), sizes.test);
  pools.unknown = take(static_cast<std::size_t>(sizes.known + sizes.test), sizes.unknown);
  return pools;
}

const std::vector<AuxFact>& aux_tables() {
  static const std::vector<AuxFact> facts = build_aux();
  return facts;
}

std::optional<std::string> lookup(AuxKind kind, std::string_view key) {
  static const auto index = [] {
    std::map<std::pair<AuxKind, std::string>, std::string, std::less<>> m;
    for (const auto& f : aux_tables()) m.emplace(std::make_pair(f.kind, f.key), f.value);
    return m;
  }();
  const auto it = index.find(std::make_pair(kind, std::string(key)));
  if (it == index.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> aux_keys(AuxKind kind) {
  std::vector<std::string> keys;
  for (const auto& f : aux_tables())
    if (f.kind == kind) keys.push_back(f.key);
  return keys;
}

std::string_view to_string(Gender g) { return g == Gender::kF ? "F" : "M"; }

std::string_view to_string(AuxKind k) {
  return k == AuxKind::kMajorField ? "major_field" : "university_country";
}

json to_json(const Person& p) {
  return json{{"id", p.id},
              {"first_name", p.first_name},
              {"gender", std::string(to_string(p.gender))},
              {"last_name", p.last_name},
              {"birth_year", p.birth_year},
              {"death_year", p.death_year},
              {"major", p.major},
              {"university", p.university}};
}

Person person_from_json(const json& j) {
  try {
    Person p;
    p.id = j.at("id").get<int>();
    p.first_name = j.at("first_name").get<std::string>();
    const auto g = j.at("gender").get<std::string>();
    if (g != "F" && g != "M") throw Error(ErrorCode::kFormat, "gender must be F or M");
    p.gender = g == "F" ? Gender::kF : Gender::kM;
    p.last_name = j.at("last_name").get<std::string>();
    p.birth_year = j.at("birth_year").get<int>();
    p.death_year = j.at("death_year").get<int>();
    p.major = j.at("major").get<std::string>();
    p.university = j.at("university").get<std::string>();
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("person record: ") + e.what());
  }
}

json to_json(const KnowledgePools& pools) {
  return json{{"seed", pools.seed},
              {"sizes",
               {{"known", pools.sizes.known},
                {"test", pools.sizes.test},
                {"unknown", pools.sizes.unknown}}},
              {"known", pools.known},
              {"test", pools.test},
              {"unknown", pools.unknown}};
}

KnowledgePools pools_from_json(const json& j) {
  try {
    KnowledgePools pools;
    pools.seed = j.at("seed").get<std::uint64_t>();
    pools.sizes.known = j.at("sizes").at("known").get<int>();
    pools.sizes.test = j.at("sizes").at("test").get<int>();
    pools.sizes.unknown = j.at("sizes").at("unknown").get<int>();
    pools.known = j.at("known").get<std::vector<PersonId>>();
    pools.test = j.at("test").get<std::vector<PersonId>>();
    pools.unknown = j.at("unknown").get<std::vector<PersonId>>();
    return pools;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("pools.json: ") + e.what());
  }
}

std::string people_jsonl(std::span<const Person> persons) {
  std::vector<const Person*> sorted;
  for (const auto& p : persons) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->id < b->id; });
  std::string out;
  for (const auto* p : sorted) {
    out += dump_compact(to_json(*p));
    out += '\n';
  }
  return out;
}

std::vector<Person> read_people(const std::filesystem::path& path) {
  std::vector<Person> people;
  for (const auto& j : read_jsonl(path)) people.push_back(person_from_json(j));
  return people;
}

}  // namespace biopatch
