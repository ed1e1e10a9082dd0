#pragma once

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

#include "kleinian/error.hpp"
#include "kleinian/mobius.hpp"

namespace kleinian {

/// A letter is a signed generator index: +i stands for g_i and -i for its
/// inverse, with generators numbered from 1.
using Letter = std::int32_t;

/// Position of a letter in the fixed total order a < A < b < B < ...
inline int letter_rank(Letter x) { return 2 * (std::abs(x) - 1) + (x < 0 ? 1 : 0); }

inline char letter_char(Letter x) {
  const char base = static_cast<char>('a' + (std::abs(x) - 1));
  return x < 0 ? static_cast<char>(std::toupper(base)) : base;
}

/// A maximal run of one letter: generator index and signed exponent.
struct Syllable {
  Letter gen;
  std::int64_t exp;
  Letter letter() const { return exp > 0 ? gen : -gen; }
  friend bool operator==(const Syllable&, const Syllable&) = default;
};

/// Freely reduced word, stored as syllables so that long powers stay cheap.
class Word {
 public:
  Word() = default;
  /// Builds the free reduction of the given letters.
  explicit Word(const std::vector<Letter>& letters) {
    for (Letter x : letters) push(x);
  }
  explicit Word(std::vector<Syllable> syllables) {
    for (const Syllable& s : syllables) push_power(s.letter(), std::abs(s.exp));
  }

  static Word letter(Letter x) { return Word(std::vector<Letter>{x}); }

  const std::vector<Syllable>& syllables() const { return s_; }
  std::size_t size() const { return length_; }
  bool empty() const { return length_ == 0; }
  Letter front() const { return s_.front().letter(); }
  Letter back() const { return s_.back().letter(); }

  std::vector<Letter> letters() const {
    std::vector<Letter> out;
    out.reserve(length_);
    for (const Syllable& s : s_)
      for (std::int64_t k = 0; k < std::abs(s.exp); ++k) out.push_back(s.letter());
    return out;
  }

  /// Appends a letter, cancelling against the last one if needed.
  void push(Letter x) { push_power(x, 1); }

  /// Appends x^n for n >= 0 with free reduction.
  void push_power(Letter x, std::int64_t n) {
    if (x == 0) throw ParameterError("letter 0 is not a generator");
    if (n == 0) return;
    const Letter g = std::abs(x);
    const std::int64_t e = x > 0 ? n : -n;
    if (!s_.empty() && s_.back().gen == g) {
      const std::int64_t before = s_.back().exp;
      s_.back().exp += e;
      length_ = length_ - static_cast<std::size_t>(std::abs(before)) +
                static_cast<std::size_t>(std::abs(s_.back().exp));
      if (s_.back().exp == 0) s_.pop_back();
    } else {
      s_.push_back({g, e});
      length_ += static_cast<std::size_t>(n);
    }
  }

  Word inverse() const {
    Word r;
    r.s_.reserve(s_.size());
    for (auto it = s_.rbegin(); it != s_.rend(); ++it) r.s_.push_back({it->gen, -it->exp});
    r.length_ = length_;
    return r;
  }

  friend Word operator*(const Word& u, const Word& v) {
    Word r = u;
    for (const Syllable& s : v.s_) r.push_power(s.letter(), std::abs(s.exp));
    return r;
  }

  bool cyclically_reduced() const { return s_.empty() || front() != -back(); }

  friend bool operator==(const Word& u, const Word& v) { return u.s_ == v.s_; }

  /// Shortlex order using letter_rank.
  friend std::strong_ordering operator<=>(const Word& u, const Word& v) {
    if (u.length_ != v.length_) return u.length_ <=> v.length_;
    std::size_t i = 0, j = 0;
    std::int64_t ri = 0, rj = 0;  // letters consumed in the current syllables
    while (i < u.s_.size() && j < v.s_.size()) {
      const Letter x = u.s_[i].letter(), y = v.s_[j].letter();
      if (x != y) return letter_rank(x) <=> letter_rank(y);
      const std::int64_t step = std::min(std::abs(u.s_[i].exp) - ri, std::abs(v.s_[j].exp) - rj);
      ri += step;
      rj += step;
      if (ri == std::abs(u.s_[i].exp)) ++i, ri = 0;
      if (rj == std::abs(v.s_[j].exp)) ++j, rj = 0;
    }
    return std::strong_ordering::equal;
  }

  /// Letters as characters with inverses in upper case; runs longer than
  /// three use a caret exponent ("a^5B"). The identity is "e".
  std::string to_string() const {
    if (s_.empty()) return "e";
    std::string out;
    for (const Syllable& s : s_) {
      const char c = letter_char(s.letter());
      const std::int64_t n = std::abs(s.exp);
      if (n > 3) out += c + std::string("^") + std::to_string(n);
      else out.append(static_cast<std::size_t>(n), c);
    }
    return out;
  }

 private:
  std::vector<Syllable> s_;
  std::size_t length_ = 0;
};

/// Lexicographic comparison of equal-length letter sequences by rank.
inline bool lex_less(const std::vector<Letter>& u, const std::vector<Letter>& v) {
  return std::lexicographical_compare(u.begin(), u.end(), v.begin(), v.end(),
                                      [](Letter x, Letter y) { return letter_rank(x) < letter_rank(y); });
}

/// Cyclic reduction: strips matching inverse pairs from the two ends.
inline Word cyclic_reduction(const Word& w) {
  const std::vector<Letter> l = w.letters();
  std::size_t i = 0, j = l.size();
  while (j - i >= 2 && l[i] == -l[j - 1]) {
    ++i;
    --j;
  }
  return Word(std::vector<Letter>(l.begin() + static_cast<std::ptrdiff_t>(i),
                                  l.begin() + static_cast<std::ptrdiff_t>(j)));
}

/// Canonical representative of the conjugacy class of w modulo inversion:
/// the least cyclic rotation of the cyclic reduction of w or of its inverse.
inline Word canonical_class(const Word& w) {
  const Word c = cyclic_reduction(w);
  if (c.empty()) return c;
  if (c.syllables().size() == 1) return Word({Syllable{c.syllables()[0].gen, std::abs(c.syllables()[0].exp)}});
  std::vector<Letter> best;
  for (const Word& v : {c, c.inverse()}) {
    const std::vector<Letter> l = v.letters();
    const std::size_t n = l.size();
    std::vector<Letter> rot(n);
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0 && l[k] == l[k - 1]) continue;  // rotations starting mid-run are never minimal
      for (std::size_t i = 0; i < n; ++i) rot[i] = l[(k + i) % n];
      if (best.empty() || lex_less(rot, best)) best = rot;
    }
  }
  return Word(best);
}

/// Whether the cyclically reduced word w equals u^k for some k >= 2.
inline bool is_proper_power(const Word& w) {
  const std::vector<Letter> l = w.letters();
  const std::size_t n = l.size();
  for (std::size_t p = 1; p <= n / 2; ++p) {
    if (n % p != 0) continue;
    bool periodic = true;
    for (std::size_t i = p; i < n && periodic; ++i) periodic = l[i] == l[i - p];
    if (periodic) return true;
  }
  return false;
}

/// Parses letters a-z (upper case for inverses), ignoring blanks; "e" or an
/// empty string is the identity. Caret exponents such as "a^3" or "b^-2" are
/// accepted.
inline Word parse_word(std::string_view text, int rank) {
  Word w;
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  if (s == "e" || s.empty()) return w;
  std::size_t i = 0;
  while (i < s.size()) {
    const char ch = s[i++];
    if (!std::isalpha(static_cast<unsigned char>(ch)))
      throw ParameterError("unexpected character in word: " + std::string(text));
    const int g = std::tolower(static_cast<unsigned char>(ch)) - 'a' + 1;
    if (g > rank) throw ParameterError("word uses a generator beyond the rank: " + std::string(text));
    Letter x = std::isupper(static_cast<unsigned char>(ch)) ? -g : g;
    long long power = 1;
    if (i < s.size() && s[i] == '^') {
      std::size_t used = 0;
      try {
        power = std::stoll(s.substr(i + 1), &used);
      } catch (const std::exception&) {
        throw ParameterError("bad exponent in word: " + std::string(text));
      }
      i += 1 + used;
    }
    if (power < 0) {
      x = -x;
      power = -power;
    }
    w.push_power(x, power);
  }
  return w;
}

/// Product of generator matrices along the word, left to right.
inline MobiusMap evaluate(const Word& w, const std::vector<MobiusMap>& generators,
                          const std::vector<MobiusMap>& inverses) {
  if (generators.empty()) throw ParameterError("no generators");
  MobiusMap m = MobiusMap::identity(generators.front().dim());
  for (const Syllable& s : w.syllables()) {
    const std::size_t i = static_cast<std::size_t>(s.gen - 1);
    const MobiusMap& step = s.exp > 0 ? generators.at(i) : inverses.at(i);
    for (std::int64_t k = 0; k < std::abs(s.exp); ++k) m = m * step;
  }
  return m;
}

}  // namespace kleinian
