#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace biopatch {

/// Bumped whenever the stream derivation or any draw routine changes, since
/// that changes every generated artifact.
inline constexpr int kRngVersion = 1;

std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t splitmix64(std::uint64_t x);

/// 16 lowercase hex digits.
std::string hex64(std::uint64_t v);

/// xoshiro256** keyed by (seed, purpose). Streams with different purpose
/// strings are independent, so adding a new consumer never shifts the draws
/// of an existing one. All draw routines are implemented here rather than
/// through <random> distributions, whose output is library-specific.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view purpose);

  std::uint64_t next();

  /// Uniform in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform in [lo, hi] inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// Random permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::uint64_t s_[4];
};

}  // namespace biopatch
