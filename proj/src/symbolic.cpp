#include "basinlab/symbolic.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "basinlab/rng.hpp"

namespace basinlab::symbolic {

namespace {

void check_symbols(const std::vector<std::uint8_t>& symbols, int alphabet_size) {
  if (alphabet_size < 1) throw std::invalid_argument("alphabet size must be positive");
  for (auto s : symbols) {
    if (s >= alphabet_size) {
      throw std::invalid_argument("symbol " + std::to_string(s) + " outside alphabet of size " +
                                  std::to_string(alphabet_size));
    }
  }
}

}  // namespace

Word Word::one_sided(std::vector<std::uint8_t> symbols, int alphabet_size) {
  check_symbols(symbols, alphabet_size);
  return Word{std::move(symbols), alphabet_size, 0, false};
}

Word Word::two_sided_at(std::vector<std::uint8_t> symbols, std::int64_t origin_offset,
                        int alphabet_size) {
  check_symbols(symbols, alphabet_size);
  return Word{std::move(symbols), alphabet_size, origin_offset, true};
}

Word Word::parse(const std::string& digits, int alphabet_size) {
  std::vector<std::uint8_t> symbols;
  symbols.reserve(digits.size());
  for (char c : digits) {
    if (c < '0' || c > '9') throw std::invalid_argument("word digits must be 0-9");
    symbols.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return one_sided(std::move(symbols), alphabet_size);
}

int Word::at(std::int64_t index) const {
  if (!contains(index)) throw std::out_of_range("word index " + std::to_string(index) + " not realized");
  return symbols[static_cast<std::size_t>(index - origin_offset)];
}

std::string Word::to_string() const {
  std::string out;
  out.reserve(symbols.size());
  for (auto s : symbols) out.push_back(static_cast<char>('0' + s));
  return out;
}

std::string Cylinder::to_string() const {
  std::string out = "[";
  for (std::size_t i = 0; i < fixed_symbols.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(fixed_symbols.symbols[i]);
  }
  return out + "]";
}

Cylinder concat(const Cylinder& c, const Cylinder& d) {
  if (c.fixed_symbols.alphabet_size != d.fixed_symbols.alphabet_size) {
    throw std::invalid_argument("cylinders over different alphabets");
  }
  auto symbols = c.fixed_symbols.symbols;
  symbols.insert(symbols.end(), d.fixed_symbols.symbols.begin(), d.fixed_symbols.symbols.end());
  return Cylinder{Word::one_sided(std::move(symbols), c.fixed_symbols.alphabet_size)};
}

BernoulliSpec::BernoulliSpec(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("Bernoulli spec needs at least one symbol");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p > 0.0 && p < 1.0) && probs_.size() > 1) {
      throw std::invalid_argument("Bernoulli probabilities must lie in (0,1)");
    }
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-12) throw std::invalid_argument("Bernoulli probabilities must sum to 1");
  cumulative_.resize(probs_.size());
  std::partial_sum(probs_.begin(), probs_.end(), cumulative_.begin());
  cumulative_.back() = 1.0;
}

BernoulliSpec BernoulliSpec::uniform(int alphabet_size) {
  if (alphabet_size < 1) throw std::invalid_argument("alphabet size must be positive");
  return BernoulliSpec(std::vector<double>(static_cast<std::size_t>(alphabet_size), 1.0 / alphabet_size));
}

int BernoulliSpec::symbol_for(double u) const noexcept {
  int s = 0;
  const int last = alphabet_size() - 1;
  while (s < last && u >= cumulative_[static_cast<std::size_t>(s)]) ++s;
  return s;
}

Word shift_word(const Word& w, std::int64_t steps) {
  if (w.two_sided) {
    Word out = w;
    out.origin_offset -= steps;
    return out;
  }
  if (steps < 0) throw std::invalid_argument("negative shift of a one-sided word");
  Word out = w;
  const auto drop = std::min<std::size_t>(static_cast<std::size_t>(steps), w.symbols.size());
  out.symbols.erase(out.symbols.begin(), out.symbols.begin() + static_cast<std::ptrdiff_t>(drop));
  return out;
}

double cylinder_prob(const BernoulliSpec& spec, const Cylinder& c) {
  double prob = 1.0;
  for (auto s : c.fixed_symbols.symbols) {
    if (s >= spec.alphabet_size()) throw std::invalid_argument("cylinder symbol outside alphabet");
    prob *= spec.probs()[s];
  }
  return prob;
}

int LazyWord::at(std::int64_t index) const noexcept {
  return spec_.symbol_for(uniform_at(key_, static_cast<std::uint64_t>(index)));
}

Word LazyWord::materialize(std::int64_t from, std::int64_t to) const {
  std::vector<std::uint8_t> symbols;
  if (to > from) symbols.reserve(static_cast<std::size_t>(to - from));
  for (std::int64_t i = from; i < to; ++i) symbols.push_back(static_cast<std::uint8_t>(at(i)));
  return Word::two_sided_at(std::move(symbols), from, spec_.alphabet_size());
}

Word sample_word(const BernoulliSpec& spec, std::size_t n, std::uint64_t seed) {
  LazyWord lazy(spec, derive_key(seed, 0x5a3d));
  Word w = lazy.materialize(0, static_cast<std::int64_t>(n));
  w.two_sided = false;
  w.origin_offset = 0;
  return w;
}

double ep_apply(double p, double u) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("E_p requires p in (0,1)");
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("E_p requires u in [0,1]");
  return u < p ? u / p : (u - p) / (1.0 - p);
}

std::pair<double, double> baker_apply(double p, double w, double y, int direction) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("baker map requires p in (0,1)");
  if (!(w >= 0.0 && w < 1.0 && y >= 0.0 && y < 1.0)) {
    throw std::invalid_argument("baker map input outside the unit square");
  }
  if (direction == 1) {
    if (w < p) return {w / p, p * y};
    return {w / (1.0 - p) - p / (1.0 - p), (1.0 - p) * y + p};
  }
  if (direction == -1) {
    if (y < p) return {p * w, y / p};
    return {(1.0 - p) * w + p, (y - p) / (1.0 - p)};
  }
  throw std::invalid_argument("baker direction must be +1 or -1");
}

Word encode_binary(double u, std::size_t n) {
  if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("binary encoding requires u in [0,1)");
  std::vector<std::uint8_t> symbols(n);
  double r = u;
  for (std::size_t i = 0; i < n; ++i) {
    r *= 2.0;  // exact
    if (r >= 1.0) {
      symbols[i] = 1;
      r -= 1.0;
    }
  }
  return Word::one_sided(std::move(symbols), 2);
}

double word_to_point(const Word& w) {
  if (w.alphabet_size != 2) throw std::invalid_argument("binary decoding needs a binary word");
  double value = 0.0;
  double scale = 0.5;
  for (auto s : w.symbols) {
    value += s * scale;
    scale *= 0.5;
  }
  return value;
}

}  // namespace basinlab::symbolic
