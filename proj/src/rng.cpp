#include "biopatch/rng.hpp"

#include <numeric>

#include "biopatch/error.hpp"

namespace biopatch {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kRange: return "range";
    case ErrorCode::kPoolExhausted: return "pool_exhausted";
    case ErrorCode::kSizeMismatch: return "size_mismatch";
    case ErrorCode::kTemplateShortage: return "template_shortage";
    case ErrorCode::kMixedPool: return "mixed_pool";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kShortage: return "shortage";
    case ErrorCode::kCoverageViolation: return "coverage_violation";
    case ErrorCode::kUnknownId: return "unknown_id";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kArity: return "arity";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
    v >>= 4;
  }
  return out;
}

namespace {

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed, std::string_view purpose) {
  std::uint64_t key = splitmix64(seed ^ splitmix64(fnv1a64(purpose)));
  key ^= static_cast<std::uint64_t>(kRngVersion) << 56;
  for (auto& word : s_) {
    key = splitmix64(key);
    word = key;
  }
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorCode::kInvalidArgument, "Rng::below: zero bound");
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return x % bound;
}

std::int64_t Rng::between(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw Error(ErrorCode::kInvalidArgument, "Rng::between: empty interval");
  return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  shuffle(p);
  return p;
}

}  // namespace biopatch
