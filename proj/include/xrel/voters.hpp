#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace xrel {

/// Raw two's-complement bit pattern of a fixed width in [2, 64].
class Word {
 public:
  Word() = default;
  /// Throws ValidationError if width is out of range or bits do not fit.
  Word(std::uint64_t bits, int width);

  /// Keeps only the low `width` bits of `bits`.
  static Word wrap(std::uint64_t bits, int width);
  static Word from_signed(std::int64_t value, int width);

  std::uint64_t bits() const { return bits_; }
  int width() const { return width_; }
  std::uint64_t to_unsigned() const { return bits_; }
  std::int64_t to_signed() const;

  /// Bits [width-1 : k], left in place (low k bits cleared).
  std::uint64_t upper(int k) const;
  /// Bits [k-1 : 0].
  std::uint64_t lower(int k) const;

  friend bool operator==(const Word&, const Word&) = default;

 private:
  std::uint64_t bits_ = 0;
  int width_ = 8;
};

std::uint64_t width_mask(int width);

/// Voter result. `value` is empty exactly when the voter raised its error
/// signal; bit-wise TMR never does.
struct VoteOutcome {
  std::optional<Word> value;
  bool error_flag = false;

  static VoteOutcome ok(Word w) { return {w, false}; }
  static VoteOutcome error() { return {std::nullopt, true}; }

  /// Downstream metric streams materialize an error outcome as zero.
  std::uint64_t bits_or_zero() const { return value ? value->bits() : 0; }
};

enum class VoterKind { kWordTmr, kBitTmr, kXrel, kIdmr, kItdmr };

std::string_view voter_name(VoterKind kind);
std::optional<VoterKind> parse_voter(std::string_view name);

/// Word-wise majority: any two identical inputs win, otherwise error.
VoteOutcome vote_word_tmr(Word a, Word b, Word c);

/// Per-bit majority of the three inputs.
Word vote_bit_tmr(Word a, Word b, Word c);

/// Majority over the upper N-k bits, low k bits forwarded from one input.
/// `forward` selects that input: 1 = a, 2 = b, 3 = c.
VoteOutcome vote_xrel(Word a, Word b, Word c, int k, int forward = 1);

/// Inexact DMR. Accepts when |a - b| < threshold (raw unsigned patterns) and
/// returns a's upper slice with the floor average of the two lower slices.
VoteOutcome vote_idmr(Word a, Word b, int k, std::uint64_t threshold);

/// Inexact TMR-DMR. Upper slices are compared in place (low k bits cleared),
/// so `threshold` is in the same units as the words. Errors when all three
/// pairwise distances are >= threshold; otherwise the closest pair wins, ties
/// broken in the order (a,b), (a,c), (b,c). The output is the first member's
/// upper slice with the floor average of the pair's lower slices.
VoteOutcome vote_itdmr(Word a, Word b, Word c, int k, std::uint64_t threshold);

/// Threshold used by IDMR/ITDMR when none is given: 2^k.
std::uint64_t default_threshold(int k);

}  // namespace xrel
