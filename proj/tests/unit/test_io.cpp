#include <gtest/gtest.h>

#include <fstream>

#include "biopatch/error.hpp"
#include "biopatch/io.hpp"
#include "reference.hpp"

using namespace biopatch;
namespace fs = std::filesystem;

TEST(Transaction, CommitAndRollback) {
  ref::TempDir dir("io");
  {
    OutputTransaction tx;
    tx.write(dir.path / "a" / "x.txt", "hello");
    tx.write(dir.path / "y.txt", "world");
    EXPECT_FALSE(fs::exists(dir.path / "y.txt"));
  }
  EXPECT_FALSE(fs::exists(dir.path / "y.txt"));
  EXPECT_FALSE(fs::exists(dir.path / "a" / "x.txt"));
  for (const auto& e : fs::recursive_directory_iterator(dir.path))
    EXPECT_FALSE(e.is_regular_file()) << e.path();
  {
    OutputTransaction tx;
    tx.write(dir.path / "y.txt", "world");
    tx.commit();
  }
  EXPECT_EQ(read_text(dir.path / "y.txt"), "world");
}

TEST(Jsonl, LineNumbers) {
  ref::TempDir dir("io-jsonl");
  std::ofstream(dir.path / "a.jsonl") << "{\"a\":1}\n\n{\"a\":2}\n{oops\n";
  try {
    read_jsonl(dir.path / "a.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find("4"), std::string::npos) << e.what();
  }
  std::ofstream(dir.path / "b.jsonl") << "{\"a\":1}\n\n{\"a\":2}\n";
  EXPECT_EQ(read_jsonl(dir.path / "b.jsonl").size(), 2u);
  try {
    read_text(dir.path / "nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(Dump, SortedCompact) {
  const json j = {{"b", 1}, {"a", "é"}};
  EXPECT_EQ(dump_compact(j), "{\"a\":\"é\",\"b\":1}");
}

TEST(Digest, StableAndSensitive) {
  const auto a = digest_bytes("abc");
  EXPECT_EQ(a.size(), 32u);
  EXPECT_EQ(a, digest_bytes("abc"));
  EXPECT_NE(a, digest_bytes("abd"));
  ref::TempDir dir("io-digest");
  std::ofstream(dir.path / "f", std::ios::binary) << "abc";
  EXPECT_EQ(digest_file(dir.path / "f"), a);
}

TEST(Parallel, CoversEveryIndex) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_GE(worker_count(), 1u);
}
