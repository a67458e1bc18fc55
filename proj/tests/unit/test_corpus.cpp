#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "autodsm/corpus.hpp"
#include "autodsm/error.hpp"
#include "autodsm/utf8.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace autodsm;
using corpus::Chunk;
using corpus::Document;
using corpus::SplitConfig;
using autodsm::testing::random_text;
using autodsm::testing::reference_spans;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
  const auto dir = fs::temp_directory_path() / "autodsm_corpus_test";
  fs::create_directories(dir);
  const auto p = dir / name;
  std::ofstream(p, std::ios::binary) << content;
  return p;
}

}  // namespace

TEST(Utf8, RejectsMalformedWithOffset) {
  const std::string bad = std::string("ab") + '\xC3';
  try {
    utf8::scalar_offsets(bad);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("offset 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(utf8::length("\xED\xA0\x80"), ParseError);  // surrogate
  EXPECT_THROW(utf8::length("\xC0\x80"), ParseError);      // overlong
  EXPECT_EQ(utf8::length("\xE4\xB8\xAD\xE6\x96\x87"), 2u);
}

TEST(LoadCorpus, SingleFile) {
  const auto p = write_temp("a.txt", "hello");
  const std::vector<fs::path> paths{p};
  const auto docs = corpus::load_corpus(paths);
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_EQ(utf8::length(docs[0].text), 5u);
  EXPECT_EQ(docs[0].source_id, p.string());
}

TEST(LoadCorpus, PreservesOrder) {
  const std::vector<fs::path> paths{write_temp("a.txt", "first"), write_temp("b.txt", "second")};
  const auto docs = corpus::load_corpus(paths);
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].text, "first");
  EXPECT_EQ(docs[1].text, "second");
}

TEST(LoadCorpus, MissingFileNamesPath) {
  const std::vector<fs::path> paths{"/nonexistent/definitely_missing.txt"};
  try {
    corpus::load_corpus(paths);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("definitely_missing.txt"), std::string::npos);
  }
}

TEST(LoadCorpus, UndecodableBytesReportOffset) {
  const auto p = write_temp("bad.txt", std::string("abcd\xFF"));
  const std::vector<fs::path> paths{p};
  try {
    corpus::load_corpus(paths);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("offset 4"), std::string::npos) << e.what();
  }
}

TEST(Split, TwoThousandCharacters) {
  const Document doc{"d", std::string(2000, 'x')};
  const auto chunks = corpus::split(doc, SplitConfig{1000, 150});
  ASSERT_EQ(chunks.size(), 3u);
  EXPECT_EQ(chunks[0].start_offset, 0u);
  EXPECT_EQ(chunks[1].start_offset, 850u);
  EXPECT_EQ(chunks[2].start_offset, 1700u);
  EXPECT_EQ(chunks[0].text.size(), 1000u);
  EXPECT_EQ(chunks[1].text.size(), 1000u);
  EXPECT_EQ(chunks[2].text.size(), 300u);
  const auto ref = reference_spans(2000, 1000, 150);
  ASSERT_EQ(ref.size(), 3u);
  EXPECT_EQ(ref[2], (std::pair<std::size_t, std::size_t>{1700, 2000}));
}

TEST(Split, EmptyDocument) {
  EXPECT_TRUE(corpus::split(Document{"d", ""}, SplitConfig{}).empty());
}

TEST(Split, ExactFitIsOneChunk) {
  const auto chunks = corpus::split(Document{"d", std::string(1000, 'y')}, SplitConfig{});
  ASSERT_EQ(chunks.size(), 1u);
  EXPECT_EQ(chunks[0].text.size(), 1000u);
}

TEST(Split, CountsScalarsNotBytes) {
  // 5 scalars, 10 bytes.
  const Document doc{"d", "\xC3\xA9\xC3\xA9\xC3\xA9\xC3\xA9\xC3\xA9"};
  const auto chunks = corpus::split(doc, SplitConfig{3, 1});
  ASSERT_EQ(chunks.size(), 2u);
  EXPECT_EQ(chunks[0].text, "\xC3\xA9\xC3\xA9\xC3\xA9");
  EXPECT_EQ(chunks[1].start_offset, 2u);
  EXPECT_EQ(utf8::length(chunks[1].text), 3u);
}

TEST(Split, RejectsInvalidConfig) {
  const Document doc{"d", "abc"};
  EXPECT_THROW(corpus::split(doc, SplitConfig{10, 10}), ConfigError);
  EXPECT_THROW(corpus::split(doc, SplitConfig{0, 0}), ConfigError);
}

TEST(Split, MultiDocumentNeverCrossesBoundaries) {
  const std::vector<Document> docs{{"a", std::string(30, 'a')}, {"b", std::string(12, 'b')}};
  const auto chunks = corpus::split_all(docs, SplitConfig{10, 2});
  for (const auto& c : chunks) {
    const char expected = c.source_id == "a" ? 'a' : 'b';
    EXPECT_EQ(c.text.find_first_not_of(expected), std::string::npos);
  }
  EXPECT_EQ(chunks.back().source_id, "b");
  EXPECT_EQ(chunks.back().ordinal, 1u);
}

TEST(SplitProperty, MatchesReferenceCoverageAndOverlap) {
  std::mt19937_64 rng(7);
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t size = std::uniform_int_distribution<std::size_t>(1, 60)(rng);
    const std::size_t overlap = std::uniform_int_distribution<std::size_t>(0, size - 1)(rng);
    const std::size_t len = std::uniform_int_distribution<std::size_t>(0, 400)(rng);
    const auto text = random_text(rng, len);
    const auto u32 = utf8::decode(text);
    const auto chunks = corpus::split(Document{"d", text}, SplitConfig{size, overlap});
    const auto ref = reference_spans(len, size, overlap);

    ASSERT_EQ(chunks.size(), ref.size()) << "len=" << len << " size=" << size << " ov=" << overlap;
    std::vector<bool> covered(len, false);
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      const auto clen = utf8::length(chunks[i].text);
      EXPECT_EQ(chunks[i].ordinal, i);
      EXPECT_EQ(chunks[i].start_offset, ref[i].first);
      EXPECT_EQ(chunks[i].start_offset + clen, ref[i].second);
      EXPECT_LE(clen, size);
      EXPECT_EQ(utf8::decode(chunks[i].text), u32.substr(chunks[i].start_offset, clen));
      for (std::size_t k = ref[i].first; k < ref[i].second; ++k) covered[k] = true;
      if (i + 1 < chunks.size()) {
        EXPECT_LT(chunks[i].start_offset, chunks[i + 1].start_offset);
        ASSERT_EQ(clen, size);
        const auto tail = utf8::decode(chunks[i].text).substr(size - overlap);
        const auto head = utf8::decode(chunks[i + 1].text).substr(0, overlap);
        EXPECT_EQ(tail, head);
      }
    }
    EXPECT_TRUE(std::all_of(covered.begin(), covered.end(), [](bool b) { return b; }));
    // Determinism.
    EXPECT_EQ(chunks, corpus::split(Document{"d", text}, SplitConfig{size, overlap}));
  }
}
