#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace biopatch::oracles {

// Year oracles take four-digit years (1000..9999) and throw kDomain otherwise.

/// Product of the four digits.
int mscore(int year);
/// Sum of the four digits.
int ascore(int year);
/// "YES" if the year is odd.
std::string parity(int year);
int anniversary(int death_year, int n);
int year_diff(int a, int b);
/// Name of whoever died earlier; equal years are a domain error.
std::string died_first(std::string_view name_a, int death_a, std::string_view name_b,
                       int death_b);

std::string field_of(std::string_view major);
std::string same_field(std::string_view major_a, std::string_view major_b);
std::string country_of(std::string_view university);
std::string alumni(std::string_view university_a, std::string_view university_b);

/// Letters at 1-based odd positions of the first word, uppercased.
std::string odd_letters(std::string_view text);
/// First and last letter of every word, uppercased and concatenated.
std::string first_last(std::string_view text);

// Helpers shared by the chain-of-thought renderers.

std::vector<int> year_digits(int year);
std::vector<std::string> split_words(std::string_view text);
/// UTF-8 code points of a word, ASCII letters uppercased.
std::vector<std::string> spell_upper(std::string_view word);
/// 1 -> "1st", 2 -> "2nd", 11 -> "11th", ...
std::string ordinal(int n);

}  // namespace biopatch::oracles
