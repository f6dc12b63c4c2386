#include <random>

#include "catch_amalgamated.hpp"
#include "forge/fingrp.hpp"
#include "forge/words.hpp"

using namespace forge;

namespace {
  FactorTable two_cyclic() {
    FactorTable t;
    t.add(1, share(cyclic_group(5)));
    t.add(2, share(cyclic_group(7)));
    return t;
  }

  SyllableWord random_word(std::mt19937_64& rng, FactorTable const& t,
                           std::size_t len) {
    std::vector<GenRef> s;
    for (std::size_t i = 0; i < len; ++i) {
      if (rng() % 4 == 0) {
        s.push_back(GenRef::letter(1, rng() % 2 ? 1 : -1));
      } else {
        factor_t f = 1 + rng() % 2;
        s.push_back(GenRef::factor(
            f, static_cast<elem_t>(rng() % t.group(f).order())));
      }
    }
    return SyllableWord(std::move(s));
  }
}  // namespace

TEST_CASE("concat examples", "[words]") {
  auto t = two_cyclic();
  auto a = GenRef::factor(1, 2);
  auto w = SyllableWord{a, GenRef::factor(2, 3)};
  CHECK(concat(SyllableWord{}, w, t) == w);
  CHECK(concat(SyllableWord{a}, SyllableWord{GenRef::factor(1, 3)}, t).empty());
  CHECK(concat(w, SyllableWord{GenRef::factor(2, 4)}, t) == SyllableWord{a});
}

TEST_CASE("invert examples", "[words]") {
  auto t = two_cyclic();
  CHECK(invert(SyllableWord{}, t).empty());
  CHECK(invert(SyllableWord{GenRef::factor(1, 2)}, t)
        == SyllableWord{GenRef::factor(1, 3)});
  CHECK(invert(SyllableWord{GenRef::factor(1, 2), GenRef::letter(0, 1)}, t)
        == SyllableWord{GenRef::letter(0, -1), GenRef::factor(1, 3)});
}

TEST_CASE("syllable length", "[words]") {
  auto t = two_cyclic();
  CHECK(syllable_length(SyllableWord{}, t) == 0);
  CHECK(syllable_length(SyllableWord{GenRef::factor(1, 1)}, t) == 1);
  CHECK(syllable_length(
            SyllableWord{GenRef::factor(1, 1), GenRef::factor(1, 2)}, t)
        == 1);
  CHECK(syllable_length(SyllableWord{GenRef::factor(1, 0)}, t) == 0);
}

TEST_CASE("text syntax round trip", "[words]") {
  auto w = parse_word("f1:2 t3^-1 f2:0 t3");
  REQUIRE(w.size() == 4);
  CHECK(w[1] == GenRef::letter(3, -1));
  CHECK(to_string(w) == "f1:2 t3^-1 f2:0 t3");
  CHECK(parse_word("1").empty());
  CHECK(to_string(SyllableWord{}) == "1");
  CHECK_THROWS_AS(parse_word("f1"), InputError);
  CHECK_THROWS_AS(parse_word("t1^2"), InputError);
  CHECK_THROWS_AS(parse_word("1 f1:1"), InputError);
  CHECK_THROWS_AS(parse_word("x"), InputError);
  CHECK_THROWS_AS(GenRef::letter(0, 2), InputError);
}

TEST_CASE("word algebra properties", "[words][property]") {
  auto            t = two_cyclic();
  std::mt19937_64 rng(17);
  for (int i = 0; i < 500; ++i) {
    auto a = normalize(random_word(rng, t, rng() % 9), t);
    auto b = normalize(random_word(rng, t, rng() % 9), t);
    auto c = normalize(random_word(rng, t, rng() % 9), t);
    REQUIRE(concat(concat(a, b, t), c, t) == concat(a, concat(b, c, t), t));
    REQUIRE(invert(invert(a, t), t) == a);
    REQUIRE(concat(a, invert(a, t), t).empty());
    REQUIRE(syllable_length(concat(a, b, t), t)
            <= syllable_length(a, t) + syllable_length(b, t));
    REQUIRE(is_normalized(a, t));
    REQUIRE(normalize(a, t) == a);
    for (std::size_t k = 1; k < a.size(); ++k) {
      bool same_factor = a[k].is_factor() && a[k - 1].is_factor()
                         && a[k].id() == a[k - 1].id();
      REQUIRE_FALSE(same_factor);
    }
    for (auto g : a) {
      if (g.is_factor()) {
        REQUIRE(g.elem() != t.identity(g.id()));
      }
    }
  }
}

TEST_CASE("power", "[words]") {
  auto t = two_cyclic();
  auto w = SyllableWord{GenRef::factor(1, 1), GenRef::factor(2, 1)};
  CHECK(power(w, 3, t).size() == 6);
  CHECK(concat(power(w, 3, t), power(w, -3, t), t).empty());
  CHECK(power(w, 0, t).empty());
}
