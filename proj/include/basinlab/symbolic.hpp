#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace basinlab::symbolic {

/// Finite realized piece of a shift-space point. For two-sided words,
/// `origin_offset` is the index of the first stored symbol, so index 0 may
/// sit anywhere inside (or outside) the stored range.
struct Word {
  std::vector<std::uint8_t> symbols;
  int alphabet_size = 2;
  std::int64_t origin_offset = 0;
  bool two_sided = false;

  static Word one_sided(std::vector<std::uint8_t> symbols, int alphabet_size = 2);
  static Word two_sided_at(std::vector<std::uint8_t> symbols, std::int64_t origin_offset,
                           int alphabet_size = 2);
  /// Parse a digit string, e.g. "0110".
  static Word parse(const std::string& digits, int alphabet_size = 2);

  std::size_t size() const noexcept { return symbols.size(); }
  bool empty() const noexcept { return symbols.empty(); }
  std::int64_t first_index() const noexcept { return origin_offset; }
  std::int64_t end_index() const noexcept {
    return origin_offset + static_cast<std::int64_t>(symbols.size());
  }
  bool contains(std::int64_t index) const noexcept {
    return index >= first_index() && index < end_index();
  }
  /// Symbol at shift-space index `index` (throws std::out_of_range).
  int at(std::int64_t index) const;
  /// ASCII digits, e.g. "011".
  std::string to_string() const;

  bool operator==(const Word&) const = default;
};

struct Cylinder {
  Word fixed_symbols;

  std::size_t depth() const noexcept { return fixed_symbols.size(); }
  /// "[a0,a1,...]"
  std::string to_string() const;
};

/// C D := [a_0..a_k, b_0..b_l]
Cylinder concat(const Cylinder& c, const Cylinder& d);

/// Bernoulli measure on the full shift over probs.size() symbols.
class BernoulliSpec {
 public:
  explicit BernoulliSpec(std::vector<double> probs);
  /// Two symbols, probability p for symbol 0.
  static BernoulliSpec binary(double p0) { return BernoulliSpec({p0, 1.0 - p0}); }
  static BernoulliSpec uniform(int alphabet_size);

  std::span<const double> probs() const noexcept { return probs_; }
  int alphabet_size() const noexcept { return static_cast<int>(probs_.size()); }
  /// Symbol whose cumulative interval contains u ∈ [0,1).
  int symbol_for(double u) const noexcept;

 private:
  std::vector<double> probs_;
  std::vector<double> cumulative_;
};

/// σ^steps. One-sided words drop leading symbols (steps ≥ 0 only); two-sided
/// words keep their storage and move the origin.
Word shift_word(const Word& w, std::int64_t steps);

double cylinder_prob(const BernoulliSpec& spec, const Cylinder& c);

/// An infinite two-sided Bernoulli word, materialized on demand. The symbol at
/// index i is a pure function of (key, i).
class LazyWord {
 public:
  LazyWord() : spec_(BernoulliSpec::binary(0.5)) {}
  LazyWord(BernoulliSpec spec, std::uint64_t key) : spec_(std::move(spec)), key_(key) {}

  int at(std::int64_t index) const noexcept;
  /// Symbols at indices [from, to), returned as a two-sided word.
  Word materialize(std::int64_t from, std::int64_t to) const;

  const BernoulliSpec& spec() const noexcept { return spec_; }
  std::uint64_t key() const noexcept { return key_; }

 private:
  BernoulliSpec spec_;
  std::uint64_t key_ = 0;
};

/// A ν-distributed one-sided word of length n.
Word sample_word(const BernoulliSpec& spec, std::size_t n, std::uint64_t seed);

/// Piecewise linear model E_p of the one-sided Bernoulli shift.
double ep_apply(double p, double u);

/// Baker map B_p (direction +1) or its inverse (direction -1) on [0,1)².
std::pair<double, double> baker_apply(double p, double w, double y, int direction);

/// First n binary digits of u ∈ [0,1).
Word encode_binary(double u, std::size_t n);
/// Left endpoint of the dyadic interval coded by a one-sided binary word.
double word_to_point(const Word& w);

}  // namespace basinlab::symbolic
