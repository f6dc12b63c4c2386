// Syllable words over factor-tagged elements and stable letters.
//
// A word is a flat sequence of GenRef values.  Factor elements are element
// indices into a finite "leaf" group identified by a factor id; the group
// multiplication is supplied by the caller through a SyllableMerger, so this
// header knows nothing about groups.

#ifndef FORGE_WORDS_HPP_
#define FORGE_WORDS_HPP_

#include <compare>
#include <concepts>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "forge/errors.hpp"

namespace forge {

  using elem_t   = std::uint32_t;
  using factor_t = std::uint32_t;
  using letter_t = std::uint32_t;

  class GenRef {
   public:
    enum class Kind : std::uint8_t { factor = 0, letter = 1 };

    constexpr GenRef() = default;

    static constexpr GenRef factor(factor_t f, elem_t e) noexcept {
      return GenRef(Kind::factor, f, static_cast<std::int64_t>(e));
    }

    static constexpr GenRef letter(letter_t t, int sign) {
      if (sign != 1 && sign != -1) {
        throw InputError("stable letter exponent must be +1 or -1");
      }
      return GenRef(Kind::letter, t, sign);
    }

    constexpr Kind kind() const noexcept {
      return kind_;
    }
    constexpr bool is_factor() const noexcept {
      return kind_ == Kind::factor;
    }
    constexpr bool is_letter() const noexcept {
      return kind_ == Kind::letter;
    }
    // factor id or letter id
    constexpr std::uint32_t id() const noexcept {
      return id_;
    }
    constexpr elem_t elem() const noexcept {
      return static_cast<elem_t>(value_);
    }
    constexpr int sign() const noexcept {
      return static_cast<int>(value_);
    }

    constexpr GenRef with_elem(elem_t e) const noexcept {
      return factor(id_, e);
    }

    constexpr auto operator<=>(GenRef const&) const = default;

    // Dense integer code, used as an alphabet symbol by the suffix machinery.
    std::uint64_t code() const noexcept {
      return (static_cast<std::uint64_t>(kind_) << 63)
             | (static_cast<std::uint64_t>(id_) << 32)
             | static_cast<std::uint32_t>(value_);
    }

   private:
    constexpr GenRef(Kind k, std::uint32_t id, std::int64_t v) noexcept
        : kind_(k), id_(id), value_(static_cast<std::int32_t>(v)) {}

    Kind          kind_  = Kind::factor;
    std::uint32_t id_    = 0;
    std::int32_t  value_ = 0;
  };

  // Anything that can multiply, invert and name the identity of the leaf
  // factor groups referenced by words.
  template <typename M>
  concept SyllableMerger = requires(M const& m, factor_t f, elem_t a) {
    { m.multiply(f, a, a) } -> std::convertible_to<elem_t>;
    { m.identity(f) } -> std::convertible_to<elem_t>;
    { m.inverse(f, a) } -> std::convertible_to<elem_t>;
  };

  class SyllableWord {
   public:
    using value_type     = GenRef;
    using const_iterator = std::vector<GenRef>::const_iterator;

    SyllableWord() = default;
    explicit SyllableWord(std::vector<GenRef> syl) : syl_(std::move(syl)) {}
    SyllableWord(std::initializer_list<GenRef> il) : syl_(il) {}

    std::vector<GenRef> const& syllables() const noexcept {
      return syl_;
    }
    std::size_t size() const noexcept {
      return syl_.size();
    }
    bool empty() const noexcept {
      return syl_.empty();
    }
    GenRef const& operator[](std::size_t i) const {
      return syl_[i];
    }
    GenRef const& front() const {
      return syl_.front();
    }
    GenRef const& back() const {
      return syl_.back();
    }
    const_iterator begin() const noexcept {
      return syl_.begin();
    }
    const_iterator end() const noexcept {
      return syl_.end();
    }

    SyllableWord subword(std::size_t first, std::size_t count) const {
      return SyllableWord(std::vector<GenRef>(
          syl_.begin() + first, syl_.begin() + first + count));
    }

    // Raw juxtaposition, no normalization.
    SyllableWord& append(SyllableWord const& other) {
      syl_.insert(syl_.end(), other.syl_.begin(), other.syl_.end());
      return *this;
    }
    SyllableWord& push_back(GenRef g) {
      syl_.push_back(g);
      return *this;
    }

    auto operator<=>(SyllableWord const&) const = default;
    bool operator==(SyllableWord const&) const = default;

   private:
    std::vector<GenRef> syl_;
  };

  inline SyllableWord juxtapose(SyllableWord a, SyllableWord const& b) {
    return std::move(a.append(b));
  }

  template <typename... Ws>
  SyllableWord juxtapose(SyllableWord a, SyllableWord const& b,
                         Ws const&... rest) {
    return juxtapose(juxtapose(std::move(a), b), rest...);
  }

  // Merge adjacent same-factor syllables, cancel t t^-1, drop identities.
  template <SyllableMerger M>
  SyllableWord normalize(SyllableWord const& w, M const& m) {
    std::vector<GenRef> out;
    out.reserve(w.size());
    for (GenRef g : w) {
      if (g.is_factor()) {
        if (g.elem() == m.identity(g.id())) {
          continue;
        }
        if (!out.empty() && out.back().is_factor()
            && out.back().id() == g.id()) {
          elem_t e = m.multiply(g.id(), out.back().elem(), g.elem());
          out.pop_back();
          if (e != m.identity(g.id())) {
            out.push_back(g.with_elem(e));
          }
          continue;
        }
        out.push_back(g);
      } else {
        if (!out.empty() && out.back().is_letter() && out.back().id() == g.id()
            && out.back().sign() == -g.sign()) {
          out.pop_back();
          continue;
        }
        out.push_back(g);
      }
    }
    return SyllableWord(std::move(out));
  }

  template <SyllableMerger M>
  bool is_normalized(SyllableWord const& w, M const& m) {
    return normalize(w, m) == w;
  }

  template <SyllableMerger M>
  SyllableWord concat(SyllableWord const& a, SyllableWord const& b,
                      M const& m) {
    return normalize(juxtapose(a, b), m);
  }

  template <SyllableMerger M>
  SyllableWord invert(SyllableWord const& w, M const& m) {
    std::vector<GenRef> out;
    out.reserve(w.size());
    for (auto it = w.syllables().rbegin(); it != w.syllables().rend(); ++it) {
      if (it->is_factor()) {
        out.push_back(it->with_elem(m.inverse(it->id(), it->elem())));
      } else {
        out.push_back(GenRef::letter(it->id(), -it->sign()));
      }
    }
    return SyllableWord(std::move(out));
  }

  template <SyllableMerger M>
  std::size_t syllable_length(SyllableWord const& w, M const& m) {
    return normalize(w, m).size();
  }

  template <SyllableMerger M>
  SyllableWord power(SyllableWord const& w, long k, M const& m) {
    SyllableWord base = k < 0 ? invert(w, m) : w;
    SyllableWord out;
    for (long i = 0; i < (k < 0 ? -k : k); ++i) {
      out.append(base);
    }
    return normalize(out, m);
  }

  ////////////////////////////////////////////////////////////////////////
  // Text syntax: "f<id>:<elt>" factor elements, "t<id>" / "t<id>^-1" stable
  // letters, whitespace separated; the empty word is "1".
  ////////////////////////////////////////////////////////////////////////

  namespace detail {
    inline std::uint32_t parse_uint(std::string_view s, std::string_view tok) {
      if (s.empty()) {
        throw InputError("malformed word token '" + std::string(tok) + "'");
      }
      std::uint64_t v = 0;
      for (char c : s) {
        if (c < '0' || c > '9') {
          throw InputError("malformed word token '" + std::string(tok) + "'");
        }
        v = v * 10 + static_cast<unsigned>(c - '0');
        if (v > 0xffffffffULL) {
          throw InputError("index out of range in '" + std::string(tok) + "'");
        }
      }
      return static_cast<std::uint32_t>(v);
    }
  }  // namespace detail

  inline GenRef parse_genref(std::string_view tok) {
    if (tok.size() >= 2 && tok[0] == 'f') {
      auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw InputError("factor token needs ':' in '" + std::string(tok)
                         + "'");
      }
      return GenRef::factor(detail::parse_uint(tok.substr(1, colon - 1), tok),
                            detail::parse_uint(tok.substr(colon + 1), tok));
    }
    if (tok.size() >= 2 && tok[0] == 't') {
      int  sign = 1;
      auto body = tok.substr(1);
      if (auto hat = body.find('^'); hat != std::string_view::npos) {
        auto ex = body.substr(hat + 1);
        if (ex == "-1") {
          sign = -1;
        } else if (ex != "1" && ex != "+1") {
          throw InputError("stable letter exponent must be 1 or -1 in '"
                           + std::string(tok) + "'");
        }
        body = body.substr(0, hat);
      }
      return GenRef::letter(detail::parse_uint(body, tok), sign);
    }
    throw InputError("unknown word token '" + std::string(tok) + "'");
  }

  inline SyllableWord parse_word(std::string_view text) {
    std::vector<GenRef> out;
    std::istringstream  in{std::string(text)};
    std::string         tok;
    bool                saw_one = false;
    while (in >> tok) {
      if (tok == "1") {
        saw_one = true;
        continue;
      }
      out.push_back(parse_genref(tok));
    }
    if (saw_one && !out.empty()) {
      throw InputError("'1' denotes the empty word and cannot be mixed with "
                       "other tokens");
    }
    return SyllableWord(std::move(out));
  }

  inline std::string to_string(GenRef g) {
    if (g.is_factor()) {
      return "f" + std::to_string(g.id()) + ":" + std::to_string(g.elem());
    }
    return "t" + std::to_string(g.id()) + (g.sign() < 0 ? "^-1" : "");
  }

  inline std::string to_string(SyllableWord const& w) {
    if (w.empty()) {
      return "1";
    }
    std::string out;
    for (GenRef g : w) {
      if (!out.empty()) {
        out += ' ';
      }
      out += to_string(g);
    }
    return out;
  }

  inline std::ostream& operator<<(std::ostream& os, SyllableWord const& w) {
    return os << to_string(w);
  }

}  // namespace forge

template <>
struct std::hash<forge::SyllableWord> {
  std::size_t operator()(forge::SyllableWord const& w) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto const& g : w) {
      h ^= g.code() + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

#endif  // FORGE_WORDS_HPP_
