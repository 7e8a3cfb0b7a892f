#include <algorithm>
#include <array>

#include <gtest/gtest.h>

#include "xrel/errors.hpp"
#include "xrel/rng.hpp"
#include "xrel/voters.hpp"

namespace xrel {
namespace {

Word w8(std::uint64_t v) { return Word(v, 8); }

// Bit-serial majority, written independently of the library.
std::uint64_t oracle_bit_majority(std::uint64_t a, std::uint64_t b, std::uint64_t c, int n) {
  std::uint64_t out = 0;
  for (int i = 0; i < n; ++i) {
    const int votes = ((a >> i) & 1) + ((b >> i) & 1) + ((c >> i) & 1);
    if (votes >= 2) out |= std::uint64_t{1} << i;
  }
  return out;
}

TEST(Word, RangeAndSignedView) {
  EXPECT_THROW(Word(256, 8), ValidationError);
  EXPECT_THROW(Word(0, 1), ValidationError);
  EXPECT_EQ(Word::from_signed(-1, 8).bits(), 0xFFu);
  EXPECT_EQ(Word(0x80, 8).to_signed(), -128);
  EXPECT_EQ(Word(0xB7, 8).upper(4), 0xB0u);
  EXPECT_EQ(Word(0xB7, 8).lower(4), 0x7u);
}

TEST(WordTmr, MixedInputs) {
  EXPECT_TRUE(vote_word_tmr(w8(0xB7), w8(0xB4), w8(0xA5)).error_flag);
  EXPECT_EQ(vote_word_tmr(w8(3), w8(3), w8(9)).value->bits(), 3u);
  EXPECT_EQ(vote_word_tmr(w8(9), w8(3), w8(3)).value->bits(), 3u);
  EXPECT_EQ(vote_word_tmr(w8(5), w8(5), w8(5)).value->bits(), 5u);
  EXPECT_THROW(vote_word_tmr(w8(1), Word(1, 16), w8(1)), ValidationError);
}

TEST(BitTmr, PerBitMajority) {
  EXPECT_EQ(vote_bit_tmr(w8(0xB7), w8(0xB4), w8(0xA5)).bits(), 0xB5u);
  EXPECT_EQ(vote_bit_tmr(w8(0x00), w8(0xFF), w8(0x0F)).bits(), 0x0Fu);
  EXPECT_EQ(vote_bit_tmr(w8(0x42), w8(0x42), w8(0x42)).bits(), 0x42u);
}

TEST(Xrel, WorkedExample) {
  const VoteOutcome o = vote_xrel(w8(0xB7), w8(0xB4), w8(0xA5), 4);
  ASSERT_TRUE(o.value);
  EXPECT_EQ(o.value->bits(), 0xB7u);
  EXPECT_FALSE(o.error_flag);
}

TEST(Xrel, ErrorsAndForwarding) {
  EXPECT_TRUE(vote_xrel(w8(0x10), w8(0x20), w8(0x30), 4).error_flag);
  EXPECT_EQ(vote_xrel(w8(0xB7), w8(0xB4), w8(0xA5), 4, 2).value->bits(), 0xB4u);
  EXPECT_THROW(vote_xrel(w8(0), w8(0), w8(0), 8), ValidationError);
  EXPECT_THROW(vote_xrel(w8(0), w8(0), w8(0), 2, 4), ValidationError);
}

TEST(Idmr, Examples) {
  EXPECT_EQ(vote_idmr(w8(0x10), w8(0x12), 4, 16).value->bits(), 0x11u);
  EXPECT_TRUE(vote_idmr(w8(0x00), w8(0xF0), 4, 16).error_flag);
  EXPECT_EQ(vote_idmr(w8(0x5A), w8(0x5A), 3, 1).value->bits(), 0x5Au);
  EXPECT_THROW(vote_idmr(w8(0), w8(0), 4, 0), ValidationError);
}

TEST(Itdmr, Examples) {
  EXPECT_EQ(vote_itdmr(w8(0xB7), w8(0xB4), w8(0x25), 4, 1).value->bits(), 0xB5u);
  EXPECT_TRUE(vote_itdmr(w8(0x10), w8(0x50), w8(0x90), 4, 16).error_flag);
  EXPECT_EQ(vote_itdmr(w8(0x33), w8(0x33), w8(0x33), 4, 16).value->bits(), 0x33u);
  // Tie between (a,b) and (a,c): (a,b) wins.
  EXPECT_EQ(vote_itdmr(w8(0x21), w8(0x23), w8(0x25), 4, 16).value->bits(), 0x22u);
  // Closest pair is (b,c).
  EXPECT_EQ(vote_itdmr(w8(0x90), w8(0x21), w8(0x27), 4, 16).value->bits(), 0x24u);
}

TEST(Voters, Names) {
  for (VoterKind k : {VoterKind::kWordTmr, VoterKind::kBitTmr, VoterKind::kXrel, VoterKind::kIdmr, VoterKind::kItdmr})
    EXPECT_EQ(parse_voter(voter_name(k)), k);
  EXPECT_FALSE(parse_voter("majority"));
  EXPECT_EQ(default_threshold(4), 16u);
}

class VoterProperty : public ::testing::Test {
 protected:
  Xoshiro256 rng{12345};
  int width() { return 2 + static_cast<int>(rng() % 63); }
};

TEST_F(VoterProperty, SingleFaultMasking) {
  for (int t = 0; t < 100000; ++t) {
    const int n = width();
    const int k = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
    const Word w(rng.bits(n), n);
    std::array<Word, 3> in{w, w, w};
    in[rng() % 3] = Word(rng.bits(n), n);
    const VoteOutcome o = vote_xrel(in[0], in[1], in[2], k);
    ASSERT_TRUE(o.value);
    const std::uint64_t a = o.value->bits(), b = w.bits();
    ASSERT_LE(a > b ? a - b : b - a, (std::uint64_t{1} << k) - 1);
  }
}

TEST_F(VoterProperty, AgreementEquivalence) {
  for (int t = 0; t < 20000; ++t) {
    const int n = width();
    const int k = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
    const Word w(rng.bits(n), n);
    EXPECT_EQ(*vote_word_tmr(w, w, w).value, w);
    EXPECT_EQ(vote_bit_tmr(w, w, w), w);
    EXPECT_EQ(*vote_xrel(w, w, w, k).value, w);
    EXPECT_EQ(*vote_idmr(w, w, k, default_threshold(k)).value, w);
    EXPECT_EQ(*vote_itdmr(w, w, w, k, default_threshold(k)).value, w);
  }
}

TEST_F(VoterProperty, PermutationInvariance) {
  for (int t = 0; t < 20000; ++t) {
    const int n = 2 + static_cast<int>(rng() % 15);
    const int k = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
    // Small alphabet so agreements happen often.
    std::array<Word, 3> in;
    for (auto& x : in) x = Word(rng() % 4 ? rng.bits(n) & 3 : rng.bits(n), n);
    const Word bit = vote_bit_tmr(in[0], in[1], in[2]);
    EXPECT_EQ(bit.bits(), oracle_bit_majority(in[0].bits(), in[1].bits(), in[2].bits(), n));
    const auto word = vote_word_tmr(in[0], in[1], in[2]);
    const auto xrel = vote_xrel(in[0], in[1], in[2], k);
    std::array<int, 3> p{0, 1, 2};
    while (std::next_permutation(p.begin(), p.end())) {
      EXPECT_EQ(vote_bit_tmr(in[p[0]], in[p[1]], in[p[2]]), bit);
      EXPECT_EQ(vote_word_tmr(in[p[0]], in[p[1]], in[p[2]]).value, word.value);
      const auto x = vote_xrel(in[p[0]], in[p[1]], in[p[2]], k);
      EXPECT_EQ(x.error_flag, xrel.error_flag);
      if (x.value) EXPECT_EQ(x.value->upper(k), xrel.value->upper(k));
    }
    EXPECT_EQ(vote_xrel(in[0], in[1], in[2], 0).value, word.value);
  }
}

TEST_F(VoterProperty, EdBoundWhenUpperSlicesAgree) {
  for (int t = 0; t < 20000; ++t) {
    const int n = width();
    const int k = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
    const Word w(rng.bits(n), n);
    std::array<Word, 3> in;
    for (auto& x : in) x = Word(w.upper(k) | (rng.bits(n) & ((std::uint64_t{1} << k) - 1)), n);
    const auto o = vote_xrel(in[0], in[1], in[2], k);
    ASSERT_TRUE(o.value);
    const std::uint64_t a = o.value->bits(), b = w.bits();
    EXPECT_LE(a > b ? a - b : b - a, (std::uint64_t{1} << k) - 1);
  }
}

}  // namespace
}  // namespace xrel
