#include "biopatch/oracles.hpp"

#include <cstdlib>

#include "biopatch/error.hpp"
#include "biopatch/persona.hpp"

namespace biopatch::oracles {

namespace {

void require_year(int year) {
  if (year < 1000 || year > 9999)
    throw Error(ErrorCode::kDomain, "expected a four-digit year, got " + std::to_string(year));
}

std::size_t utf8_len(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xe) return 3;
  if ((lead >> 3) == 0x1e) return 4;
  throw Error(ErrorCode::kDomain, "invalid UTF-8 lead byte");
}

char upper_ascii(char c) { return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 32) : c; }

bool is_letter(std::string_view cp) {
  if (cp.size() > 1) return true;
  const char c = cp[0];
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Code points of a word; throws kDomain for empty or non-alphabetic words.
std::vector<std::string> letters(std::string_view word) {
  if (word.empty()) throw Error(ErrorCode::kDomain, "empty word");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < word.size();) {
    const std::size_t n = utf8_len(static_cast<unsigned char>(word[i]));
    if (i + n > word.size()) throw Error(ErrorCode::kDomain, "truncated UTF-8 sequence");
    std::string cp(word.substr(i, n));
    if (!is_letter(cp))
      throw Error(ErrorCode::kDomain, "non-alphabetic word '" + std::string(word) + "'");
    if (n == 1) cp[0] = upper_ascii(cp[0]);
    out.push_back(std::move(cp));
    i += n;
  }
  return out;
}

std::string yes_no(bool b) { return b ? "YES" : "NO"; }

std::string require_lookup(AuxKind kind, std::string_view key) {
  auto v = lookup(kind, key);
  if (!v)
    throw Error(ErrorCode::kDomain, std::string("no ") + std::string(to_string(kind)) +
                                        " entry for '" + std::string(key) + "'");
  return *v;
}

}  // namespace

std::vector<int> year_digits(int year) {
  require_year(year);
  return {year / 1000, (year / 100) % 10, (year / 10) % 10, year % 10};
}

int mscore(int year) {
  int product = 1;
  for (int d : year_digits(year)) product *= d;
  return product;
}

int ascore(int year) {
  int sum = 0;
  for (int d : year_digits(year)) sum += d;
  return sum;
}

std::string parity(int year) {
  require_year(year);
  return yes_no(year % 2 == 1);
}

int anniversary(int death_year, int n) {
  require_year(death_year);
  if (n <= 0) throw Error(ErrorCode::kDomain, "anniversary count must be positive");
  return death_year + n;
}

int year_diff(int a, int b) {
  require_year(a);
  require_year(b);
  return std::abs(a - b);
}

std::string died_first(std::string_view name_a, int death_a, std::string_view name_b,
                       int death_b) {
  require_year(death_a);
  require_year(death_b);
  if (death_a == death_b)
    throw Error(ErrorCode::kDomain, "equal death years have no first death");
  return std::string(death_a < death_b ? name_a : name_b);
}

std::string field_of(std::string_view major) {
  return require_lookup(AuxKind::kMajorField, major);
}

std::string same_field(std::string_view major_a, std::string_view major_b) {
  return yes_no(field_of(major_a) == field_of(major_b));
}

std::string country_of(std::string_view university) {
  return require_lookup(AuxKind::kUniversityCountry, university);
}

std::string alumni(std::string_view university_a, std::string_view university_b) {
  country_of(university_a);
  country_of(university_b);
  return yes_no(university_a == university_b);
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (j > i) words.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

std::vector<std::string> spell_upper(std::string_view word) { return letters(word); }

std::string odd_letters(std::string_view text) {
  const auto words = split_words(text);
  if (words.empty()) throw Error(ErrorCode::kDomain, "empty word");
  const auto cps = letters(words.front());
  std::string out;
  for (std::size_t i = 0; i < cps.size(); i += 2) out += cps[i];
  return out;
}

std::string first_last(std::string_view text) {
  const auto words = split_words(text);
  if (words.empty()) throw Error(ErrorCode::kDomain, "empty name");
  std::string out;
  for (const auto& w : words) {
    const auto cps = letters(w);
    out += cps.front();
    out += cps.back();
  }
  return out;
}

std::string ordinal(int n) {
  const int mod100 = n % 100;
  const char* suffix = "th";
  if (mod100 < 11 || mod100 > 13) {
    switch (n % 10) {
      case 1: suffix = "st"; break;
      case 2: suffix = "nd"; break;
      case 3: suffix = "rd"; break;
      default: break;
    }
  }
  return std::to_string(n) + suffix;
}

}  // namespace biopatch::oracles
