#include <gtest/gtest.h>

#include <random>

#include "autodsm/dsm.hpp"

using namespace autodsm;
using namespace autodsm::dsm;

TEST(Dsm, NewHasLinkDiagonalUnknownElsewhere) {
  Dsm d({"A", "B"});
  EXPECT_EQ(d.get(0, 0), LinkLabel::Link);
  EXPECT_EQ(d.get(1, 1), LinkLabel::Link);
  EXPECT_EQ(d.get(0, 1), LinkLabel::Unknown);
  EXPECT_EQ(d.get(1, 0), LinkLabel::Unknown);
  Dsm one({"A"});
  EXPECT_EQ(one.entries(), std::vector<LinkLabel>{LinkLabel::Link});
}

TEST(Dsm, RejectsBadHeadings) {
  EXPECT_THROW(Dsm({"A", "A"}), DsmError);
  EXPECT_THROW(Dsm({"A", " A "}), DsmError);
  EXPECT_THROW(Dsm({"A", "  "}), DsmError);
  EXPECT_THROW(Dsm(std::vector<std::string>{}), DsmError);
}

TEST(Dsm, SetGet) {
  Dsm d({"A", "B"});
  d.set(0, 1, LinkLabel::Link);
  EXPECT_EQ(d.get(0, 1), LinkLabel::Link);
  EXPECT_EQ(d.get(1, 0), LinkLabel::Unknown);
  EXPECT_THROW(d.set(0, 0, LinkLabel::NoLink), DsmError);
  EXPECT_THROW(d.get(5, 0), DsmError);
  EXPECT_THROW(d.set(0, 2, LinkLabel::Link), DsmError);
}

TEST(Dsm, Transposed) {
  Dsm d({"A", "B", "C"});
  d.set(0, 2, LinkLabel::Link);
  d.set(2, 1, LinkLabel::NoLink);
  const auto t = d.transposed();
  EXPECT_EQ(t.get(2, 0), LinkLabel::Link);
  EXPECT_EQ(t.get(1, 2), LinkLabel::NoLink);
  EXPECT_EQ(t.transposed(), d);
}

TEST(Csv, WritesCanonicalLayout) {
  EXPECT_EQ(write_csv(Dsm({"A", "B"})), ",A,B\nA,1,5\nB,5,1\n");
}

TEST(Csv, LinkCellLandsUnderColumn) {
  Dsm d({"Compressor", "Condenser", "Heat pump"});
  d.set(0, 1, LinkLabel::Link);
  d.set(0, 2, LinkLabel::NoLink);
  EXPECT_EQ(write_csv(d),
            ",Compressor,Condenser,Heat pump\nCompressor,1,1,0\nCondenser,5,1,5\nHeat pump,5,5,1\n");
}

TEST(Csv, QuotesHeadings) {
  Dsm d({"Shelves, or drawers", "Door \"seal\""});
  EXPECT_EQ(write_csv(d),
            ",\"Shelves, or drawers\",\"Door \"\"seal\"\"\"\n"
            "\"Shelves, or drawers\",1,5\n"
            "\"Door \"\"seal\"\"\",5,1\n");
  EXPECT_EQ(read_csv(write_csv(d)), d);
}

TEST(Csv, RejectsNonSquare) {
  try {
    read_csv(",A,B,C\nA,1,0,0\nB,0,1,0\n");
    FAIL();
  } catch (const DsmError& e) {
    EXPECT_NE(std::string(e.what()).find("2 rows x 3 columns"), std::string::npos) << e.what();
  }
  EXPECT_THROW(read_csv(",A,B\nA,1,0,0\nB,0,1\n"), DsmError);
}

TEST(Csv, RejectsUnknownToken) {
  try {
    read_csv(",A,B\nA,1,7\nB,0,1\n");
    FAIL();
  } catch (const DsmError& e) {
    EXPECT_NE(std::string(e.what()).find("(row 0, col 1)"), std::string::npos) << e.what();
  }
}

TEST(Csv, CoercesDiagonalAndAcceptsCrlf) {
  const auto d = read_csv(",A,B\r\nA,,1\r\nB,0,0\r\n");
  EXPECT_EQ(d.get(0, 0), LinkLabel::Link);
  EXPECT_EQ(d.get(1, 1), LinkLabel::Link);
  EXPECT_EQ(d.get(0, 1), LinkLabel::Link);
  EXPECT_EQ(d.get(1, 0), LinkLabel::NoLink);
}

TEST(Csv, BinaryReferenceIsValid) {
  const auto d = read_csv(",A,B,C\nA,1,1,0\nB,1,1,0\nC,0,0,1");
  EXPECT_EQ(d.get(0, 1), LinkLabel::Link);
  EXPECT_EQ(d.get(2, 0), LinkLabel::NoLink);
}

TEST(Csv, RejectsMismatchedRowHeading) {
  EXPECT_THROW(read_csv(",A,B\nA,1,0\nC,0,1\n"), DsmError);
}

TEST(CsvProperty, RoundTrip) {
  std::mt19937_64 rng(99);
  const std::vector<std::string> pieces{"Piston", "Valve, inlet", "\"Big\" end", "Ring\ngear",
                                        "Sump", "Pump,", "é中", " padded"};
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t n = 1 + rng() % 30;
    std::vector<std::string> h;
    for (std::size_t i = 0; i < n; ++i) h.push_back(pieces[rng() % pieces.size()] + "#" + std::to_string(i));
    Dsm d(h);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) {
          static constexpr LinkLabel kLabels[] = {LinkLabel::Link, LinkLabel::NoLink, LinkLabel::Unknown};
          d.set(i, j, kLabels[rng() % 3]);
        }
    const auto csv = write_csv(d);
    const auto back = read_csv(csv);
    ASSERT_EQ(back, d) << csv;
    EXPECT_EQ(write_csv(back), csv);
  }
}
