#include <random>

#include "catch_amalgamated.hpp"
#include "forge/amalgam.hpp"

using namespace forge;

namespace {
  auto const s3 = share(symmetric_group(3));

  elem_t perm_index(FiniteGroup const& g, std::vector<std::uint32_t> p) {
    auto const& ps = g.permutations();
    return static_cast<elem_t>(std::find(ps.begin(), ps.end(), p) - ps.begin());
  }

  SyllableWord el(factor_t f, elem_t e) {
    return e == 0 && f == 0 ? SyllableWord{} : SyllableWord{GenRef::factor(f, e)};
  }

  std::vector<SyllableWord> all_of(factor_t f, FiniteGroup const& g) {
    std::vector<SyllableWord> out;
    for (elem_t x = 0; x < g.order(); ++x) {
      out.push_back(x == g.identity() ? SyllableWord{} : el(f, x));
    }
    return out;
  }

  TowerPtr s3_amalgam() {
    auto t = perm_index(*s3, {1, 0, 2});
    return TowerGroup::amalgam(TowerGroup::base(1, s3), TowerGroup::base(2, s3),
                               Association::finite({{}, el(1, t)},
                                                   {{}, el(2, t)}));
  }

  SyllableWord random_word(std::mt19937_64& rng, TowerGroup const& g,
                           std::size_t len) {
    std::vector<GenRef>   out;
    std::vector<factor_t> fs;
    for (auto const& [f, grp] : g.factors().all()) {
      fs.push_back(f);
    }
    for (std::size_t i = 0; i < len; ++i) {
      auto f = fs[rng() % fs.size()];
      out.push_back(GenRef::factor(
          f, static_cast<elem_t>(rng() % g.factors().group(f).order())));
    }
    return SyllableWord(std::move(out));
  }
}  // namespace

TEST_CASE("torsion conjugation examples", "[construct]") {
  auto g = s3_amalgam();
  auto x = perm_index(*s3, {1, 0, 2});  // in G0
  auto z = perm_index(*s3, {0, 2, 1});  // order 2, outside G0
  auto r = perm_index(*s3, {1, 2, 0});  // right syllable outside G0
  auto in_left = conjugate_torsion_into_factor(*g, {{}, el(1, z)});
  CHECK(in_left.y.empty());
  CHECK(in_left.side == Side::left);
  auto w   = juxtapose(el(2, r), el(1, z), el(2, s3->inverse(r)));
  auto res = conjugate_torsion_into_factor(*g, {{}, w});
  CHECK(res.y == el(2, r));
  CHECK(res.side == Side::left);
  CHECK(g->length(g->conjugate(w, res.y)) == 1);
  CHECK_THROWS_AS(conjugate_torsion_into_factor(
                      *g, {{}, juxtapose(el(1, z), el(2, r))}),
                  InputError);
  auto shared = conjugate_torsion_into_factor(*g, {{}, el(2, x)});
  CHECK(shared.y.empty());
}

TEST_CASE("torsion conjugation always verifies", "[construct][property]") {
  auto            g = s3_amalgam();
  std::mt19937_64 rng(31);
  for (int i = 0; i < 300; ++i) {
    factor_t f = rng() % 2 ? 1 : 2;
    auto     a = random_word(rng, *g, rng() % 7);
    std::vector<SyllableWord> hp;
    for (auto const& h : all_of(f, *s3)) {
      hp.push_back(g->conjugate(h, a));
    }
    auto res = conjugate_torsion_into_factor(*g, hp);
    for (auto const& h : hp) {
      auto seg = g->segments(g->conjugate(h, res.y));
      REQUIRE(seg.size() <= 1);
    }
  }
}

TEST_CASE("centralizer dichotomy", "[construct]") {
  auto c  = perm_index(*s3, {1, 2, 0});
  auto g  = s3_amalgam();
  auto v1 = centralizer_conclusion_check(*g, Side::left, all_of(1, *s3), el(1, c));
  CHECK(v1.outcome == CentralizerVerdict::Outcome::not_commuting);
  REQUIRE(v1.violating);
  auto v2 = centralizer_conclusion_check(*g, Side::left, {{}, el(1, c)},
                                         el(1, s3->mul(c, c)));
  CHECK(v2.outcome == CentralizerVerdict::Outcome::in_factor);

  // S3 *_{<t> = <2>} Z4: x = s r s^-1 commutes with t' = s t s^-1
  auto z4 = share(cyclic_group(4));
  auto t  = perm_index(*s3, {1, 0, 2});
  auto h  = TowerGroup::amalgam(TowerGroup::base(1, s3), TowerGroup::base(2, z4),
                                Association::finite({{}, el(1, t)},
                                                    {{}, el(2, 2)}));
  auto s  = perm_index(*s3, {0, 2, 1});  // s^-1 t' s = t for t' = s t s^-1
  auto tp = s3->conj(t, s3->inverse(s));
  auto x  = juxtapose(el(1, s), el(2, 1), el(1, s3->inverse(s)));
  REQUIRE(h->length(x) == 3);
  auto v3 = centralizer_conclusion_check(*h, Side::left, {{}, el(1, tp)}, x);
  CHECK(v3.outcome == CentralizerVerdict::Outcome::conjugate_into_shared);
  CHECK(v3.witness == el(1, s));
  CHECK(h->locate(Side::left, h->conjugate(el(1, tp), v3.witness)));
}

TEST_CASE("adjoining an automorphism group", "[construct]") {
  auto s5 = share(symmetric_group(5));
  auto a5 = share(alternating_group(5));
  // A5 inside S5: conjugation by S5 already induces Aut(A5)
  std::vector<SyllableWord> b;
  for (auto const& p : s5->permutations()) {
    int inv = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (std::size_t j = i + 1; j < p.size(); ++j) {
        inv += p[i] > p[j];
      }
    }
    if (inv % 2 == 0) {
      auto idx = perm_index(*s5, p);
      b.push_back(idx == s5->identity() ? SyllableWord{} : el(1, idx));
    }
  }
  REQUIRE(b.size() == 60);
  auto g   = TowerGroup::base(1, s5);
  auto res = adjoin_aut(g, b, a5);
  CHECK(res.unchanged);
  CHECK(res.group == g);
  CHECK(res.aut.group->order() == 120);

  // A5 alone: Aut(A5) is adjoined by amalgamating over A5 = Inn(A5)
  auto ga   = TowerGroup::base(1, a5);
  auto res2 = adjoin_aut(ga, all_of(1, *a5), a5);
  CHECK_FALSE(res2.unchanged);
  CHECK(res2.group->is_amalgam());
  CHECK(res2.group->association().size() == 60);
  for (auto const& r : {res, res2}) {
    auto const& grp = *r.group;
    auto const& bb  = r.group == g ? b : all_of(1, *a5);
    for (elem_t a = 0; a < r.aut.group->order(); ++a) {
      for (elem_t i : r.aut.base->generators()) {
        REQUIRE(grp.equal(grp.conjugate(bb[i], r.realizers[a]),
                          bb[r.aut.maps[a][i]]));
      }
    }
  }
  CHECK_THROWS_AS(adjoin_aut(TowerGroup::base(1, s3), all_of(1, *s3), a5),
                  InputError);
}

TEST_CASE("realizing isomorphisms by conjugation", "[construct]") {
  // S3 x S3 with element x*6+y; S3 is complete so Aut(S3) = S3
  auto d   = share(direct_product(*s3, *s3));
  auto aut = automorphism_group(s3);
  auto g   = TowerGroup::base(1, d);
  auto w   = [](elem_t e) { return e == 0 ? SyllableWord{} : el(1, e); };
  std::vector<SyllableWord> a, b, diag;
  for (elem_t h = 0; h < 6; ++h) {
    a.push_back(w(h * 6));
    b.push_back(w(h));
    diag.push_back(w(h * 6 + h));
  }
  auto ca = aut_copy_of_complete(aut, a);
  auto cb = aut_copy_of_complete(aut, b);
  auto cd = aut_copy_of_complete(aut, diag);

  auto same = realize_iso_by_hnn(g, aut, ca, ca, ca, aut.group->identity());
  CHECK(same.group == g);
  CHECK(same.conjugator.empty());
  CHECK(same.new_letters.empty());

  for (elem_t pi = 0; pi < aut.group->order(); ++pi) {
    auto one = realize_iso_by_hnn(g, aut, ca, ca, cb, pi);
    CHECK(one.new_letters.size() == 1);
    auto two = realize_iso_by_hnn(g, aut, cd, ca, cb, pi);
    CHECK(two.new_letters.size() == 2);
    for (auto const& r : {one, two}) {
      for (elem_t h = 0; h < 6; ++h) {
        REQUIRE(r.group->equal(r.group->conjugate(a[h], r.conjugator),
                               b[aut.maps[pi][h]]));
      }
    }
  }
  // pi inner: A to A needs no letter
  auto inner = realize_iso_by_hnn(g, aut, ca, ca, ca, aut.inner(1));
  CHECK(inner.new_letters.empty());
  CHECK_FALSE(inner.conjugator.empty());
}

TEST_CASE("socle witnesses", "[construct]") {
  auto z5 = share(cyclic_group(5));
  auto z7 = share(cyclic_group(7));
  auto g  = TowerGroup::free_product(TowerGroup::base(1, z5),
                                     TowerGroup::base(2, z7));
  auto x  = juxtapose(el(1, 1), el(2, 1));
  auto s  = adjoin_socle_witness(g, x, s3);
  CHECK_FALSE(s.unchanged);
  REQUIRE(s.factors.size() == 2);
  CHECK(s.group->equal(x, juxtapose(s.factors[0], s.factors[1])));
  for (std::size_t i = 0; i < s.factors.size(); ++i) {
    CHECK(s.factors[i].front().id() == s.copies[i]);
  }

  auto known = adjoin_socle_witness(g, x, s3, {x});
  CHECK(known.unchanged);
  CHECK(known.group == g);

  auto c  = perm_index(*s3, {1, 2, 0});
  auto h  = TowerGroup::base(1, s3);
  auto fs = adjoin_socle_witness(h, el(1, c), s3);
  REQUIRE(fs.factors.size() == 4);
  CHECK(fs.group->equal(el(1, c), juxtapose(fs.factors[0], fs.factors[1],
                                            fs.factors[2], fs.factors[3])));
  for (auto const& f : fs.factors) {
    CHECK(fs.group->factors().group(f.front().id()).order() == 6);
  }
}

TEST_CASE("forcing conjugacy", "[construct]") {
  auto z5 = share(cyclic_group(5));
  auto z7 = share(cyclic_group(7));
  auto g  = TowerGroup::free_product(TowerGroup::base(1, z5),
                                     TowerGroup::base(2, z7));
  auto f  = juxtapose(el(1, 1), el(2, 1));
  auto y  = juxtapose(el(1, 2), el(2, 1));
  auto r  = make_conjugate(g, f, y);
  SyllableWord t{GenRef::letter(r.letter, 1)};
  CHECK(r.group->equal(r.group->conjugate(f, t), y));
  CHECK(r.group->equal(r.group->conjugate(g->power(f, 2), t), g->power(y, 2)));
  CHECK(r.group->reduce(juxtapose(r.group->inverse(t), g->power(f, 2), t))
        == g->power(y, 2));
  CHECK_THROWS_AS(make_conjugate(g, f, f), InputError);
  CHECK_THROWS_AS(make_conjugate(g, el(1, 1), y), InputError);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 500; ++i) {
    auto w = random_word(rng, *r.group, 1 + rng() % 6);
    std::vector<GenRef> syl = w.syllables();
    syl.insert(syl.begin() + static_cast<long>(rng() % (syl.size() + 1)),
               GenRef::letter(r.letter, rng() % 2 ? 1 : -1));
    SyllableWord v(syl);
    REQUIRE(r.group->is_trivial(juxtapose(v, r.group->inverse(v))));
  }
}

TEST_CASE("copies of H in a free product have trivial centralizer",
          "[construct][property]") {
  auto            g = TowerGroup::free_product(TowerGroup::base(1, s3),
                                               TowerGroup::base(2, s3));
  std::mt19937_64 rng(12);
  std::size_t     commuting = 0;
  for (int i = 0; i < 200; ++i) {
    auto                      y = random_word(rng, *g, rng() % 4);
    std::vector<SyllableWord> hp;
    for (auto const& h : all_of(1 + rng() % 2, *s3)) {
      hp.push_back(g->conjugate(h, y));
    }
    for (int j = 0; j < 50; ++j) {
      auto x = j == 0 ? SyllableWord{} : random_word(rng, *g, 1 + rng() % 4);
      bool commutes = std::all_of(hp.begin(), hp.end(), [&](auto const& h) {
        return g->equal(juxtapose(h, x), juxtapose(x, h));
      });
      if (commutes) {
        ++commuting;
        REQUIRE(g->is_trivial(x));
      }
    }
  }
  CHECK(commuting >= 200);
}
