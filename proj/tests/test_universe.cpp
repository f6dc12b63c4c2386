#include <algorithm>
#include <numeric>

#include "catch_amalgamated.hpp"
#include "forge/universe.hpp"

using namespace forge;

namespace {
  SyllableWord el(factor_t f, elem_t e) {
    return SyllableWord{GenRef::factor(f, e)};
  }

  auto const z2 = share(cyclic_group(2));
  auto const z3 = share(cyclic_group(3));
  auto const s3 = share(symmetric_group(3));

  // Leaf f_k in block k for every listed k.
  std::pair<TowerPtr, NormPolicy> leaves(std::vector<std::pair<std::size_t, GroupPtr>> ls) {
    NormPolicy            pol;
    std::vector<TowerPtr> parts;
    for (auto& [b, g] : ls) {
      auto f = static_cast<factor_t>(b + 1);
      parts.push_back(TowerGroup::base(f, g));
      pol.factor[f] = b;
    }
    auto t = parts.front();
    for (std::size_t k = 1; k < parts.size(); ++k) {
      t = TowerGroup::free_product(t, parts[k]);
    }
    return {t, pol};
  }

  UGroup leaf_ugroup(std::vector<std::pair<std::size_t, GroupPtr>> ls,
                     std::vector<SyllableWord> extra = {}) {
    auto [t, pol] = leaves(ls);
    std::set<std::size_t> u;
    for (auto& [b, g] : ls) {
      u.insert(b);
    }
    auto tracked = leaf_elements(*t);
    tracked.insert(tracked.end(), extra.begin(), extra.end());
    return assign_addresses(t, tracked, u, pol);
  }

  // Exhaustive search over bijections of the tracked elements, judged by
  // the word problem of the two groups.
  bool brute_strong_iso(UGroup const& a, UGroup const& b) {
    if (a.size() != b.size()) {
      return false;
    }
    std::vector<std::size_t> pi(a.size());
    std::iota(pi.begin(), pi.end(), 0);
    auto const& ga = *a.group();
    auto const& gb = *b.group();
    do {
      bool ok = true;
      for (std::size_t i = 0; i < a.size() && ok; ++i) {
        ok = a.address(i).i == b.address(pi[i]).i;
        for (std::size_t j = 0; j < a.size() && ok; ++j) {
          ok = (a.address(i) < a.address(j)) == (b.address(pi[i]) < b.address(pi[j]));
        }
      }
      for (std::size_t i = 0; i < a.size() && ok; ++i) {
        for (std::size_t j = 0; j < a.size() && ok; ++j) {
          auto xa = ga.multiply(a.element(i), a.element(j));
          auto xb = gb.multiply(b.element(pi[i]), b.element(pi[j]));
          for (std::size_t k = 0; k < a.size() && ok; ++k) {
            ok = ga.equal(xa, a.element(k)) == gb.equal(xb, b.element(pi[k]));
          }
        }
      }
      if (ok) {
        return true;
      }
    } while (std::next_permutation(pi.begin(), pi.end()));
    return false;
  }
}  // namespace

TEST_CASE("addresses", "[universe]") {
  std::vector<Address> xs{{2, 0}, {0, 5}, {1, 3}, {0, 1}, {2, 7}};
  std::sort(xs.begin(), xs.end());
  CHECK(xs.front() == Address{0, 1});
  CHECK(xs.back() == Address{2, 7});
  for (std::size_t k = 1; k < xs.size(); ++k) {
    CHECK(xs[k - 1] < xs[k]);
    CHECK(xs[k - 1].norm() <= xs[k].norm());
  }
  CHECK(Address{3, 9}.norm() == 3);
}

TEST_CASE("address assignment", "[universe]") {
  SECTION("a single finite base sits in block 0") {
    auto g = leaf_ugroup({{0, s3}});
    CHECK(g.size() == 6);
    CHECK(g.dom() == std::set<std::size_t>{0});
    CHECK(g.address(g.identity()) == Address{0, 0});
    CHECK(check_ugroup(g).ok());
  }
  SECTION("mixed free product words take the largest norm") {
    auto mixed = SyllableWord{GenRef::factor(1, 1), GenRef::factor(4, 1)};
    auto g     = leaf_ugroup({{0, s3}, {3, z2}}, {mixed});
    CHECK(g.address_of(mixed)->alpha == 3);
    CHECK(g.address_of(el(1, 2))->alpha == 0);
    CHECK(g.address_of(el(4, 1))->alpha == 3);
    CHECK(check_ugroup(g).ok());
  }
  SECTION("shared elements of an amalgam take the smaller side") {
    // Z2 inside S3 (block 2) and inside Z2 (block 1)
    auto t   = s3->element_order(3) == 2 ? elem_t{3} : elem_t{1};
    auto l   = TowerGroup::base(1, s3);
    auto r   = TowerGroup::base(2, share(cyclic_group(2)));
    auto g   = TowerGroup::amalgam(l, r, Association::finite({{}, el(1, t)}, {{}, el(2, 1)}));
    NormPolicy pol{{{1, 2}, {2, 1}}, {}};
    CHECK(element_norm(*g, el(1, t), pol) == 1);
    CHECK(element_norm(*g, el(2, 1), pol) == 1);
    auto other = s3->element_order(1) == 3 ? elem_t{1} : elem_t{2};
    CHECK(element_norm(*g, el(1, other), pol) == 2);
  }
  SECTION("stable letters default to the block of their associated generators") {
    auto [b, pol] = leaves({{0, z3}, {2, z2}});
    auto x        = SyllableWord{GenRef::factor(1, 1), GenRef::factor(3, 1)};
    auto y        = SyllableWord{GenRef::factor(1, 2), GenRef::factor(3, 1)};
    auto h        = TowerGroup::hnn(b, 1, Association::cyclic(x, y));
    SyllableWord t{GenRef::letter(1, 1)};
    CHECK(element_norm(*h, t, pol) == 2);
    pol.letter[1] = 5;
    CHECK(element_norm(*h, juxtapose(t, el(1, 1)), pol) == 5);
  }
  SECTION("errors") {
    auto [t, pol] = leaves({{0, s3}});
    CHECK_THROWS_AS(assign_addresses(t, leaf_elements(*t), {}, pol), InputError);
    CHECK_THROWS_AS(assign_addresses(t, leaf_elements(*t), {0, 4}, pol), InputError);
    UniverseConfig small{4, 8};
    CHECK_THROWS_AS(assign_addresses(t, leaf_elements(*t), {0}, pol, small),
                    BudgetExceeded);
    auto [t2, pol2] = leaves({{0, z2}, {3, z2}});
    CHECK_THROWS_AS(assign_addresses(t2, leaf_elements(*t2), {0}, pol2), InputError);
  }
}

TEST_CASE("u-group clauses", "[universe]") {
  auto [t, pol] = leaves({{0, z3}});
  SECTION("a block of u without elements") {
    auto g = UGroup::make(t, {}, {0, 2}, {{}, el(1, 1), el(1, 2)},
                          {{0, 0}, {0, 1}, {0, 2}});
    auto v = check_ugroup(g);
    REQUIRE_FALSE(v.ok());
    CHECK(v.violations.front().clause == 'c');
  }
  SECTION("an inverse above the cut") {
    auto g = UGroup::make(t, {}, {0, 1}, {{}, el(1, 1), el(1, 2)},
                          {{0, 0}, {0, 1}, {1, 0}});
    auto v = check_ugroup(g);
    REQUIRE_FALSE(v.ok());
    CHECK(v.violations.front().clause == 'b');
  }
  SECTION("an address outside u") {
    auto g = UGroup::make(t, {}, {0}, {{}, el(1, 1), el(1, 2)},
                          {{0, 0}, {0, 1}, {1, 0}});
    CHECK(check_ugroup(g).violations.front().clause == 'a');
  }
  SECTION("one element at two addresses") {
    CHECK_THROWS_AS(UGroup::make(t, {}, {0}, {{}, el(1, 1), el(1, 1)},
                                 {{0, 0}, {0, 1}, {0, 2}}),
                    InputError);
  }
  SECTION("generated members pass") {
    for (auto const& g : generate_family(5, 30)) {
      CHECK(check_ugroup(g).ok());
    }
  }
}

TEST_CASE("strong isomorphism", "[universe]") {
  auto g = leaf_ugroup({{0, z3}, {2, z2}});
  SECTION("identity witness") {
    auto w = is_strong_iso(g, g);
    REQUIRE(w);
    for (auto [a, b] : w->pairs) {
      CHECK(a == b);
    }
  }
  SECTION("order isomorphic re-addressing") {
    auto h = g.readdress({{0, 0}, {2, 7}});
    CHECK(h.u() == std::set<std::size_t>{0, 7});
    auto w = is_strong_iso(g, h);
    REQUIRE(w);
    for (auto [a, b] : w->pairs) {
      CHECK(b.alpha == (a.alpha == 2 ? 7 : 0));
    }
    CHECK(brute_strong_iso(g, h));
  }
  SECTION("swapped offsets in one block") {
    auto k = g.swap_offsets(*g.address_of(el(1, 1)) == Address{0, 1} ? 1 : 2,
                            *g.address_of(el(1, 1)) == Address{0, 1} ? 2 : 1);
    CHECK(check_ugroup(k).ok());
    // swapping the two generators of Z3 is an automorphism of the tables
    CHECK(bool(is_strong_iso(g, k)) == brute_strong_iso(g, k));
  }
  SECTION("agrees with exhaustive search on small members") {
    auto fam = generate_family(11, 20, 4);
    std::vector<UGroup> small;
    for (auto const& x : fam) {
      if (x.size() <= 7) {
        small.push_back(x);
      }
    }
    REQUIRE(small.size() >= 4);
    for (auto const& a : small) {
      for (auto const& b : small) {
        CHECK(bool(is_strong_iso(a, b)) == brute_strong_iso(a, b));
      }
    }
  }
  SECTION("equivalence relation") {
    auto fam = generate_family(3, 25);
    auto n   = fam.size();
    std::vector<std::vector<bool>> rel(n, std::vector<bool>(n));
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        rel[a][b] = bool(is_strong_iso(fam[a], fam[b]));
      }
    }
    for (std::size_t a = 0; a < n; ++a) {
      CHECK(rel[a][a]);
      for (std::size_t b = 0; b < n; ++b) {
        CHECK(rel[a][b] == rel[b][a]);
        for (std::size_t c = 0; c < n; ++c) {
          if (rel[a][b] && rel[b][c]) {
            CHECK(rel[a][c]);
          }
        }
      }
    }
  }
}

TEST_CASE("codes", "[universe]") {
  CodeRegistry reg;
  auto         g = leaf_ugroup({{0, z3}, {2, z2}});
  auto         h = g.readdress({{0, 0}, {2, 9}});
  CHECK(reg.code(g).cod == reg.code(h).cod);
  CHECK(reg.code(h).dom == std::set<std::size_t>{0, 9});
  auto other = leaf_ugroup({{0, z3}, {2, z3}});
  CHECK(reg.code(other).cod != reg.code(g).cod);

  SECTION("chains registered in order code monotonically") {
    CodeRegistry r2;
    auto big  = leaf_ugroup({{0, s3}, {1, z2}, {3, z3}});
    auto mid  = restrict_below(big, 3);
    auto low  = restrict_below(big, 1);
    auto cl   = r2.code(low).cod;
    auto cm   = r2.code(mid).cod;
    auto cb   = r2.code(big).cod;
    CHECK(is_sub_ugroup(low, mid));
    CHECK(is_sub_ugroup(mid, big));
    CHECK(cl <= cm);
    CHECK(cm <= cb);
  }
  SECTION("code equality is strong isomorphism on a generated family") {
    CodeRegistry r3;
    auto         fam = generate_family(21, 50);
    std::vector<Code> codes;
    for (auto const& x : fam) {
      codes.push_back(r3.code(x));
    }
    for (std::size_t a = 0; a < fam.size(); ++a) {
      for (std::size_t b = 0; b < fam.size(); ++b) {
        CHECK((codes[a].cod == codes[b].cod) == bool(is_strong_iso(fam[a], fam[b])));
      }
    }
  }
}

TEST_CASE("uniform poset probe", "[universe]") {
  SECTION("a singleton family") {
    CodeRegistry reg;
    auto         rep = poset_axiom_probe({leaf_ugroup({{0, s3}})}, reg, 10, 1);
    CHECK(rep.passes());
    CHECK(rep.members == 1);
    CHECK(rep.clause[2].cases == 1);
  }
  SECTION("restrictions of a three step chain are unique maximal") {
    auto top = leaf_ugroup({{0, z2}, {1, z3}, {2, z2}});
    auto fam = close_under_restrictions({top});
    CHECK(fam.size() == 3);
    CodeRegistry reg;
    auto         rep = poset_axiom_probe(fam, reg, 20, 2);
    CHECK(rep.passes());
    // exhaustive: every subset of tracked elements that is a u-group on
    // dom top cut at alpha lies inside the restriction
    for (std::size_t alpha : {1, 2, 3}) {
      auto r     = restrict_below(top, alpha);
      auto n     = top.size();
      std::size_t maximal = 0;
      for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<bool> keep(n);
        for (std::size_t k = 0; k < n; ++k) {
          keep[k] = (mask >> k) & 1;
        }
        auto u = r.u();
        auto s = top.subset(keep, u);
        if (s.dom() != u || !check_ugroup(s).ok() || !is_sub_ugroup(s, top)) {
          continue;
        }
        CHECK(is_sub_ugroup(s, r));
        maximal += s.size() == r.size();
      }
      CHECK(maximal == 1);
    }
  }
  SECTION("missing restrictions are an input error") {
    CodeRegistry reg;
    auto         top = leaf_ugroup({{0, z2}, {1, z3}});
    CHECK_THROWS_AS(poset_axiom_probe({top}, reg, 5, 1), InputError);
  }
  SECTION("re-addressed images") {
    auto top = leaf_ugroup({{0, z2}, {2, z3}});
    auto img = top.readdress({{0, 0}, {2, 5}});
    auto fam = close_under_restrictions({top, img});
    CodeRegistry reg;
    auto rep = poset_axiom_probe(fam, reg, 20, 3);
    CHECK(rep.passes());
    CHECK(rep.clause[7].cases >= 2);
    CHECK(reg.code(img).cod == reg.code(top).cod);
  }
  SECTION("a generated family") {
    auto fam = close_under_restrictions(generate_family(7, 50));
    CodeRegistry reg;
    auto         rep = poset_axiom_probe(fam, reg, 100, 7);
    INFO(rep.to_text());
    CHECK(rep.passes());
    CHECK(rep.clause[8].cases == 100);
    CHECK(rep.clause[8].skipped == 0);
    CHECK(rep.clause[4].cases > 50);
    CHECK(rep.monotone_failures == 0);
  }
}

TEST_CASE("free pushout", "[universe]") {
  auto p = leaf_ugroup({{0, z2}, {1, z3}});
  auto q = leaf_ugroup({{0, z2}, {2, s3}}).readdress({{0, 0}, {2, 4}});
  auto r = free_pushout(p, q, 1);
  REQUIRE(r.group);
  CHECK(check_ugroup(*r.group).ok());
  CHECK(is_sub_ugroup(p, *r.group));
  CHECK(is_sub_ugroup(q, *r.group));
  CHECK(r.group->dom() == std::set<std::size_t>{0, 1, 4});
  CHECK(r.group->size() == p.size() + q.size() - 2);
}

TEST_CASE("density moves", "[universe]") {
  auto q = leaf_ugroup({{0, s3}});
  SECTION("domain: block already present") {
    auto s = density_domain_step(q, 0, {0, 3}, s3);
    CHECK(s.unchanged);
    CHECK(same_structure(s.group, q));
  }
  SECTION("domain: new block") {
    auto s = density_domain_step(q, 3, {0, 3}, s3);
    CHECK_FALSE(s.unchanged);
    CHECK(s.group.dom() == std::set<std::size_t>{0, 3});
    CHECK(check_ugroup(s.group).ok());
    CHECK(is_sub_ugroup(q, s.group));
  }
  SECTION("domain: outside the allowed blocks") {
    CHECK_THROWS_AS(density_domain_step(q, 5, {0, 3}, s3), InputError);
  }

  auto [t, pol] = leaves({{0, z3}, {1, z2}});
  auto x        = SyllableWord{GenRef::factor(1, 1), GenRef::factor(2, 1)};
  auto y        = SyllableWord{GenRef::factor(1, 2), GenRef::factor(2, 1)};
  auto z        = SyllableWord{GenRef::factor(2, 1)};
  auto G        = assign_addresses(t, {el(1, 1), el(2, 1), x, y}, {0, 1}, pol);
  auto replay   = [](SimplicityStep const& s, SyllableWord const& a,
                   SyllableWord const& b) {
    auto const& T = *s.group.group();
    SyllableWord prod;
    for (auto const& g : s.trace) {
      prod = juxtapose(prod, T.inverse(g), b, g);
    }
    return T.is_trivial(juxtapose(prod, T.inverse(a)));
  };

  SECTION("simplicity: already conjugate") {
    auto yi = G.group()->conjugate(y, el(1, 1));
    auto H  = assign_addresses(t, {el(1, 1), el(2, 1), yi, y}, {0, 1}, pol);
    auto s  = density_simplicity_step(H, yi, y);
    CHECK(s.kind == 0);
    CHECK(s.trace.size() == 1);
    CHECK(same_structure(s.group, H));
    CHECK(replay(s, yi, y));
  }
  SECTION("simplicity: both of infinite order") {
    auto s = density_simplicity_step(G, x, y);
    CHECK(s.kind == 1);
    REQUIRE(s.trace.size() == 1);
    CHECK(s.trace.front().size() == 1);
    CHECK(s.trace.front().front().is_letter());
    CHECK(s.group.group()->is_hnn());
    CHECK(replay(s, x, y));
    CHECK(is_sub_ugroup(G, s.group));
    auto v = check_ugroup(s.group);
    for (auto const& x : v.violations) {
      UNSCOPED_INFO(x.clause << " " << x.detail);
    }
    CHECK(v.ok());
  }
  SECTION("simplicity: x of finite order") {
    auto s = density_simplicity_step(G, z, y);
    CHECK(s.kind == 2);
    CHECK(s.trace.size() == 2);
    CHECK(replay(s, z, y));
    CHECK(is_sub_ugroup(G, s.group));
  }
  SECTION("simplicity: y of finite order") {
    auto s = density_simplicity_step(G, x, z);
    CHECK(s.kind == 3);
    CHECK(s.trace.size() == 2);
    CHECK(replay(s, x, z));
    auto s2 = density_simplicity_step(G, el(1, 1), z);
    CHECK(s2.kind == 3);
    CHECK(s2.trace.size() == 4);
    CHECK(replay(s2, el(1, 1), z));
    CHECK(check_ugroup(s2.group).ok());
  }
  SECTION("simplicity: untracked input") {
    CHECK_THROWS_AS(density_simplicity_step(G, juxtapose(x, x), y), InputError);
  }
}
