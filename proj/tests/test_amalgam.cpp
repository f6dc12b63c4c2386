#include <random>

#include "catch_amalgamated.hpp"
#include "forge/tower.hpp"

using namespace forge;

namespace {
  auto const s3 = share(symmetric_group(3));

  elem_t perm_index(FiniteGroup const& g, std::vector<std::uint32_t> p) {
    auto const& ps = g.permutations();
    return static_cast<elem_t>(std::find(ps.begin(), ps.end(), p) - ps.begin());
  }

  SyllableWord el(factor_t f, elem_t e) {
    return SyllableWord{GenRef::factor(f, e)};
  }

  // S3 *_{<(0 1)>} S3 on factor ids 1, 2.
  TowerPtr s3_amalgam() {
    auto t = perm_index(*s3, {1, 0, 2});
    return TowerGroup::amalgam(TowerGroup::base(1, s3), TowerGroup::base(2, s3),
                               Association::finite({{}, el(1, t)},
                                                   {{}, el(2, t)}));
  }

  // <S3, t : t^-1 (0 1) t = (1 2)>, letter t1 over factor id 1.
  TowerPtr s3_hnn() {
    auto a = perm_index(*s3, {1, 0, 2});
    auto b = perm_index(*s3, {0, 2, 1});
    return TowerGroup::hnn(TowerGroup::base(1, s3), 1,
                           Association::finite({{}, el(1, a)}, {{}, el(1, b)}));
  }

  SyllableWord random_word(std::mt19937_64& rng, TowerGroup const& g,
                           std::size_t len) {
    std::vector<GenRef> out;
    std::vector<factor_t> fs;
    for (auto const& [f, grp] : g.factors().all()) {
      fs.push_back(f);
    }
    std::vector<letter_t> ls(g.letters().begin(), g.letters().end());
    for (std::size_t i = 0; i < len; ++i) {
      if (!ls.empty() && rng() % 3 == 0) {
        out.push_back(GenRef::letter(ls[rng() % ls.size()], rng() % 2 ? 1 : -1));
      } else {
        auto f = fs[rng() % fs.size()];
        out.push_back(GenRef::factor(
            f, static_cast<elem_t>(rng() % g.factors().group(f).order())));
      }
    }
    return SyllableWord(std::move(out));
  }

  // Image in S3 of the folding map that is the identity on both factors.
  elem_t fold(SyllableWord const& w) {
    elem_t x = s3->identity();
    for (auto g : w) {
      x = s3->mul(x, g.elem());
    }
    return x;
  }
}  // namespace

TEST_CASE("amalgam reduce examples", "[amalgam]") {
  auto g = s3_amalgam();
  auto c = perm_index(*s3, {1, 2, 0});
  auto t = perm_index(*s3, {1, 0, 2});
  CHECK(g->reduce(el(1, c)) == el(1, c));
  CHECK(g->length(el(1, c)) == 1);
  // shared element written on both sides
  CHECK(g->is_trivial(juxtapose(el(1, t), el(2, s3->inverse(t)))));
  // shared element pushed across and merged
  auto w = juxtapose(el(1, c), el(2, t), el(1, c));
  CHECK(g->length(w) == 1);
  CHECK(g->reduce(w) == el(1, s3->mul(s3->mul(c, t), c)));
  // leading shared element merges into the next run
  CHECK(g->length(juxtapose(el(2, t), el(1, c), el(2, c))) == 2);
  CHECK_THROWS_AS(g->reduce(el(7, 1)), InputError);
}

TEST_CASE("amalgam association validation", "[amalgam]") {
  auto c = perm_index(*s3, {1, 2, 0});
  auto t = perm_index(*s3, {1, 0, 2});
  CHECK_THROWS_AS(TowerGroup::amalgam(TowerGroup::base(1, s3),
                                      TowerGroup::base(2, s3),
                                      Association::finite({{}, el(1, c)},
                                                          {{}, el(2, c)})),
                  InputError);  // not closed
  CHECK_THROWS_AS(TowerGroup::amalgam(TowerGroup::base(1, s3),
                                      TowerGroup::base(1, s3),
                                      Association::trivial()),
                  InputError);  // same leaf id
  CHECK_THROWS_AS(TowerGroup::amalgam(TowerGroup::base(1, s3),
                                      TowerGroup::base(2, s3),
                                      Association::finite({el(1, t), {}},
                                                          {{}, el(2, t)})),
                  InputError);  // identity not paired with identity
  auto c2 = s3->mul(c, c);
  // <c> -> <c> via c -> c^2 is an isomorphism
  CHECK_NOTHROW(TowerGroup::amalgam(
      TowerGroup::base(1, s3), TowerGroup::base(2, s3),
      Association::finite({{}, el(1, c), el(1, c2)},
                          {{}, el(2, c2), el(2, c)})));
  CHECK_THROWS_AS(TowerGroup::amalgam(
                      TowerGroup::base(1, s3), TowerGroup::base(2, s3),
                      Association::finite({{}, el(1, c), el(1, c2)},
                                          {{}, el(2, c), el(2, c)})),
                  InputError);
}

TEST_CASE("reduction soundness on w w^-1", "[amalgam][property]") {
  std::mt19937_64 rng(2024);
  for (auto const& g : {s3_amalgam(), s3_hnn()}) {
    for (int i = 0; i < 2000; ++i) {
      auto w = random_word(rng, *g, 1 + rng() % 10);
      REQUIRE(g->is_trivial(juxtapose(w, g->inverse(w))));
      REQUIRE(g->reduce(g->reduce(w)) == g->reduce(w));
    }
  }
}

TEST_CASE("trivial amalgam words fold to the identity", "[amalgam][property]") {
  auto            g = s3_amalgam();
  std::mt19937_64 rng(5);
  std::size_t     trivial = 0;
  for (int i = 0; i < 20000; ++i) {
    auto w = random_word(rng, *g, 1 + rng() % 6);
    if (g->is_trivial(w)) {
      ++trivial;
      REQUIRE(fold(w) == s3->identity());
    }
  }
  CHECK(trivial > 100);
}

TEST_CASE("canonical forms decide equality", "[amalgam][property]") {
  std::mt19937_64 rng(99);
  for (auto const& g : {s3_amalgam(), s3_hnn()}) {
    REQUIRE(g->has_canonical());
    for (int i = 0; i < 3000; ++i) {
      auto u = random_word(rng, *g, rng() % 6);
      auto v = random_word(rng, *g, rng() % 6);
      REQUIRE((g->canonical(u) == g->canonical(v)) == g->equal(u, v));
      REQUIRE(g->canonical(g->canonical(u)) == g->canonical(u));
    }
  }
}

TEST_CASE("length depends only on the element", "[amalgam][property]") {
  auto            g = s3_amalgam();
  auto            t = perm_index(*s3, {1, 0, 2});
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    auto w = random_word(rng, *g, 1 + rng() % 8);
    // respell: insert random trivial words at random positions
    std::vector<GenRef> syl = w.syllables();
    for (int k = 0; k < 3; ++k) {
      auto r  = random_word(rng, *g, 1 + rng() % 3);
      auto z  = juxtapose(r, el(1, t), el(2, t), g->inverse(r));
      auto at = syl.begin() + static_cast<long>(rng() % (syl.size() + 1));
      syl.insert(at, z.begin(), z.end());
    }
    SyllableWord v(syl);
    REQUIRE(g->equal(v, w));
    REQUIRE(g->length(v) == g->length(w));
  }
}

TEST_CASE("weak cyclic reduction", "[amalgam]") {
  auto g = s3_amalgam();
  auto c = perm_index(*s3, {1, 2, 0});
  auto x = el(1, c), y = el(2, c);
  CHECK(g->is_weakly_cyclically_reduced(x));
  CHECK(g->is_weakly_cyclically_reduced(juxtapose(x, y, x, y)));
  auto w = juxtapose(x, y, el(1, s3->inverse(c)));
  CHECK_FALSE(g->is_weakly_cyclically_reduced(w));
  auto r = g->weakly_cyclic_reduce(w);
  CHECK(r.conjugator == x);
  CHECK(r.core == y);
  auto id = g->weakly_cyclic_reduce(juxtapose(x, y));
  CHECK(id.conjugator.empty());
  CHECK(id.core == juxtapose(x, y));

  std::mt19937_64 rng(11);
  auto            core = juxtapose(x, y);
  for (int i = 0; i < 500; ++i) {
    auto a  = random_word(rng, *g, rng() % 6);
    auto w2 = g->conjugate(core, a);
    auto cc = g->weakly_cyclic_reduce(w2);
    REQUIRE(g->length(cc.core) == 2);
    REQUIRE(g->equal(g->conjugate(w2, cc.conjugator), cc.core));
    REQUIRE(g->is_weakly_cyclically_reduced(cc.core));
  }
}

TEST_CASE("Britton reduction", "[amalgam][hnn]") {
  auto g  = s3_hnn();
  auto a  = el(1, perm_index(*s3, {1, 0, 2}));
  auto b  = el(1, perm_index(*s3, {0, 2, 1}));
  auto t  = SyllableWord{GenRef::letter(1, 1)};
  auto ti = SyllableWord{GenRef::letter(1, -1)};
  CHECK(g->reduce(juxtapose(ti, a, t)) == b);
  CHECK(g->reduce(juxtapose(t, b, ti)) == a);
  auto c    = el(1, perm_index(*s3, {1, 2, 0}));
  auto free = juxtapose(ti, c, t);
  CHECK(g->reduce(free) == free);
  CHECK(g->length(free) == 2);
  CHECK(g->reduce(juxtapose(t, ti)).empty());
  CHECK_FALSE(g->is_infinite_order(free));  // conjugate of c
  CHECK(g->order(free) == std::optional<std::size_t>{3});
  CHECK(g->is_infinite_order(juxtapose(t, c)));
  CHECK(g->is_infinite_order(juxtapose(t, c, ti, c)));
}

TEST_CASE("element orders in amalgams", "[amalgam]") {
  auto g = s3_amalgam();
  auto c = perm_index(*s3, {1, 2, 0});
  CHECK(g->order({}) == std::optional<std::size_t>{1});
  CHECK(g->order(el(1, c)) == std::optional<std::size_t>{3});
  CHECK_FALSE(g->order(juxtapose(el(1, c), el(2, c))));
  auto w = juxtapose(el(2, c), el(1, c), el(2, s3->inverse(c)));
  CHECK(g->order(w) == std::optional<std::size_t>{3});
}

TEST_CASE("cyclic associations", "[amalgam]") {
  auto z5   = share(cyclic_group(5));
  auto z7   = share(cyclic_group(7));
  auto left = TowerGroup::free_product(TowerGroup::base(1, z5),
                                       TowerGroup::base(2, z7));
  auto right = TowerGroup::free_product(TowerGroup::base(3, s3),
                                        TowerGroup::base(4, s3));
  auto c  = perm_index(*s3, {1, 2, 0});
  auto gl = juxtapose(el(1, 1), el(2, 1));
  auto gr = juxtapose(el(3, c), el(4, c));
  auto g  = TowerGroup::amalgam(left, right, Association::cyclic(gl, gr, 8));
  CHECK(g->is_trivial(juxtapose(left->power(gl, 3), right->power(gr, -3))));
  CHECK(g->length(juxtapose(left->power(gl, 5), right->power(gr, -2))) == 1);
  CHECK(g->length(juxtapose(el(1, 1), el(3, c))) == 2);
  CHECK(g->length(juxtapose(el(1, 2), el(3, c), el(1, 2))) == 3);
  // exponents far beyond the window are still found exactly
  CHECK(g->length(juxtapose(left->power(gl, 40), el(3, c))) == 1);
  CHECK(g->length(juxtapose(left->power(gl, 40), el(1, 1), el(3, c))) == 2);
  CHECK(left->power_exponent(gl, left->power(gl, -37)) == -37);
  CHECK_FALSE(left->power_exponent(gl, juxtapose(el(1, 1), el(2, 2))));
  CHECK_FALSE(left->power_exponent(gl, left->power(gl, 4).subword(0, 7)));
  std::mt19937_64 rng(8);
  for (int i = 0; i < 300; ++i) {
    auto w = random_word(rng, *g, 1 + rng() % 6);
    REQUIRE(g->is_trivial(juxtapose(w, g->inverse(w))));
  }
  // finite-order generators are expanded into explicit lists
  auto h = TowerGroup::amalgam(TowerGroup::base(5, s3), TowerGroup::base(6, s3),
                               Association::cyclic(el(5, c), el(6, c)));
  CHECK(h->association().kind == Association::Kind::finite);
  CHECK(h->association().size() == 3);
}

TEST_CASE("id shifting", "[amalgam]") {
  auto g = s3_amalgam();
  auto h = shift_ids(g, 10, 0);
  CHECK(h->factors().has(11));
  CHECK(h->factors().has(12));
  CHECK(g->fresh_factor_id() == 3);
  auto both = TowerGroup::free_product(g, h);
  CHECK(both->fresh_factor_id() == 13);
}
