#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <random>

#include "biopatch/attn.hpp"
#include "biopatch/error.hpp"
#include "reference.hpp"

using namespace biopatch;

namespace {

// Two layers, prompt of 4 tokens, name at [1, 3).
AttentionDump hand_dump() {
  AttentionDump d;
  d.n_layers = 2;
  const std::vector<float> a = {0.1f, 0.1f, 0.1f, 0.7f,   // layer 0: span 0.2
                                0.2f, 0.3f, 0.1f, 0.4f};  // layer 1: span 0.4
  const std::vector<float> b = {0.0f, 0.5f, 0.5f, 0.0f,   // span 1.0
                                0.25f, 0.25f, 0.25f, 0.25f};
  append_instance(d, "a", 1, 3, a);
  append_instance(d, "b", 1, 3, b);
  return d;
}

AttentionDump scaled(const AttentionDump& d, float f) {
  auto out = d;
  for (auto& v : out.blob) v *= f;
  return out;
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

// Longest run, later on ties, found by checking every window.
LayerWindow brute_window(const std::vector<double>& p, double thr) {
  const double cut = thr * *std::max_element(p.begin(), p.end());
  LayerWindow best{-1, -1};
  for (int lo = 0; lo < static_cast<int>(p.size()); ++lo)
    for (int hi = lo; hi < static_cast<int>(p.size()); ++hi) {
      bool ok = true;
      for (int i = lo; i <= hi; ++i) ok = ok && p[static_cast<std::size_t>(i)] >= cut;
      if (!ok) break;
      const int len = hi - lo + 1, best_len = best.hi - best.lo + 1;
      if (best.lo < 0 || len > best_len || (len == best_len && lo > best.lo)) best = {lo, hi};
    }
  return best;
}

}  // namespace

TEST(Attn, EntityAttentionArithmetic) {
  const auto d = hand_dump();
  EXPECT_NEAR(entity_attention(d, "a", {0, 1}), 0.3, 1e-6);
  EXPECT_NEAR(entity_attention(d, "a", {0, 0}), 0.2, 1e-6);
  EXPECT_NEAR(entity_attention(d, "a", {1, 1}), 0.4, 1e-6);
  EXPECT_NEAR(entity_attention(d, "b", {0, 0}), 1.0, 1e-6);
  EXPECT_EQ(code_of([&] { entity_attention(d, "zz", {0, 1}); }), ErrorCode::kUnknownId);
  EXPECT_EQ(code_of([&] { entity_attention(d, "a", {0, 2}); }), ErrorCode::kRange);
  EXPECT_EQ(code_of([&] { entity_attention(d, "a", {1, 0}); }), ErrorCode::kRange);
}

TEST(Attn, FullSpanNormalizes) {
  AttentionDump d;
  d.n_layers = 1;
  const std::vector<float> row = {0.25f, 0.25f, 0.25f, 0.25f};
  append_instance(d, "x", 0, 4, row);
  EXPECT_NEAR(entity_attention(d, "x", {0, 0}), 1.0, 1e-6);
}

TEST(Attn, SpanMonotone) {
  auto d = hand_dump();
  const double narrow = entity_attention(d, "a", {0, 1});
  d.instances[0].span_end = 4;
  EXPECT_GE(entity_attention(d, "a", {0, 1}), narrow);
}

TEST(Attn, Profile) {
  const auto d = hand_dump();
  const auto p = layer_profile(d);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_NEAR(p[0].mean, 0.6, 1e-6);
  EXPECT_NEAR(p[0].std, 0.4, 1e-6);
  AttentionDump one;
  one.n_layers = 2;
  append_instance(one, "a", 1, 3, std::vector<float>{0.1f, 0.1f, 0.1f, 0.7f, 0.2f, 0.3f, 0.1f, 0.4f});
  for (const auto& l : layer_profile(one)) EXPECT_EQ(l.std, 0.0);
}

TEST(Attn, RelativeChange) {
  const auto d = hand_dump();
  EXPECT_NEAR(relative_attention_change(d, d, {0, 1}), 0.0, 1e-9);
  EXPECT_NEAR(relative_attention_change(scaled(d, 0.5f), d, {0, 1}), -50.0, 1e-4);
  auto other = d;
  other.instances[1].sample_id = "c";
  EXPECT_EQ(code_of([&] { relative_attention_change(other, d, {0, 1}); }), ErrorCode::kUnknownId);
}

TEST(Attn, SelectWindow) {
  const std::vector<double> flat(28, 0.3);
  EXPECT_EQ(select_window(flat, 0.5), (LayerWindow{0, 27}));
  const std::vector<double> peak = {0.1, 0.2, 0.6, 0.9, 1.0, 0.7, 0.3, 0.55, 0.1};
  EXPECT_EQ(select_window(peak, 0.5), (LayerWindow{2, 5}));
  EXPECT_EQ(select_window(peak, 1.0), (LayerWindow{4, 4}));
  const std::vector<double> tie = {1, 1, 0, 1, 1};
  EXPECT_EQ(select_window(tie, 1.0), (LayerWindow{3, 4}));
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> p(1 + gen() % 40);
    for (auto& x : p) x = u(gen);
    const double thr = u(gen);
    EXPECT_EQ(select_window(p, thr), brute_window(p, thr));
  }
}

TEST(Attn, RoundTripBitExact) {
  ref::TempDir dir("attn");
  AttentionDump d;
  d.n_layers = 3;
  std::mt19937 gen(7);
  for (int i = 0; i < 5; ++i) {
    const int len = 3 + i;
    std::vector<float> rows;
    for (int l = 0; l < 3; ++l) {
      std::vector<float> r(static_cast<std::size_t>(len));
      float sum = 0;
      for (auto& v : r) sum += (v = std::generate_canonical<float, 24>(gen));
      for (auto& v : r) v /= sum * 1.001f;
      rows.insert(rows.end(), r.begin(), r.end());
    }
    append_instance(d, "s" + std::to_string(i), 0, 2, rows);
  }
  {
    OutputTransaction tx;
    write_attdump(dir.path / "d.attdump", d, tx);
    tx.commit();
  }
  const auto back = read_attdump(dir.path / "d.attdump");
  ASSERT_EQ(back.blob.size(), d.blob.size());
  EXPECT_EQ(std::memcmp(back.blob.data(), d.blob.data(), d.blob.size() * 4), 0);
  EXPECT_EQ(attdump_meta(back), attdump_meta(d));
  EXPECT_EQ(std::filesystem::file_size(dir.path / "d.attdump" / "atts.f32"), d.blob.size() * 4);
}

TEST(Attn, Validation) {
  auto bad = hand_dump();
  bad.blob[0] = -0.1f;
  EXPECT_EQ(code_of([&] { validate(bad); }), ErrorCode::kFormat);
  bad = hand_dump();
  bad.blob[3] = 0.9f;
  EXPECT_EQ(code_of([&] { validate(bad); }), ErrorCode::kFormat);
  bad = hand_dump();
  bad.instances[0].span_end = 5;
  EXPECT_EQ(code_of([&] { validate(bad); }), ErrorCode::kFormat);
  bad = hand_dump();
  bad.blob.push_back(0.0f);
  EXPECT_EQ(code_of([&] { validate(bad); }), ErrorCode::kFormat);
  bad = hand_dump();
  bad.format_version = 2;
  EXPECT_EQ(code_of([&] { validate(bad); }), ErrorCode::kFormat);

  ref::TempDir dir("attn-bad");
  std::filesystem::create_directories(dir.path / "x");
  std::ofstream(dir.path / "x" / "meta.json") << R"({"format_version":2,"n_layers":1,"instances":[]})";
  std::ofstream(dir.path / "x" / "atts.f32").close();
  EXPECT_EQ(code_of([&] { read_attdump(dir.path / "x"); }), ErrorCode::kFormat);
  EXPECT_EQ(code_of([&] { read_attdump(dir.path / "missing"); }), ErrorCode::kIo);
}

TEST(Attn, ParseWindow) {
  EXPECT_EQ(parse_window("12:24"), (LayerWindow{12, 24}));
  EXPECT_THROW(parse_window("12-24"), Error);
  EXPECT_THROW(parse_window("5:2"), Error);
  EXPECT_THROW(parse_window("a:2"), Error);
}
