// Operations on tower groups that build new towers or certify facts about
// finite subgroups of amalgams: conjugating torsion into a factor, the
// centralizer dichotomy, adjoining automorphism groups, realizing
// isomorphisms between copies of H by conjugation, socle witnesses and
// forced conjugacy of infinite-order elements.

#ifndef FORGE_AMALGAM_HPP_
#define FORGE_AMALGAM_HPP_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "forge/errors.hpp"
#include "forge/fingrp.hpp"
#include "forge/tower.hpp"
#include "forge/words.hpp"

namespace forge {

  ////////////////////////////////////////////////////////////////////////
  // Torsion subgroups of an amalgam
  ////////////////////////////////////////////////////////////////////////

  struct TorsionConjugation {
    SyllableWord y;       // every h^y has length <= 1
    Side         side;    // factor containing the conjugated subgroup
    std::size_t  steps;   // syllables peeled
  };

  // hp lists the elements of a finite subgroup of the amalgam g.
  inline TorsionConjugation conjugate_torsion_into_factor(
      TowerGroup const& g, std::vector<SyllableWord> const& hp) {
    if (!g.is_amalgam()) {
      throw InputError("torsion conjugation needs an amalgam node");
    }
    std::size_t budget = 1;
    for (auto const& h : hp) {
      if (g.is_infinite_order(h)) {
        throw InputError("element " + to_string(g.reduce(h))
                         + " has infinite order; the list is not a finite "
                           "subgroup");
      }
      budget += g.length(h);
    }
    TorsionConjugation out{{}, Side::left, 0};
    for (; out.steps <= budget; ++out.steps) {
      std::size_t                  best_len = 0;
      std::vector<TowerGroup::Segment> best;
      std::optional<Side>          side;
      bool                         mixed = false;
      for (auto const& h : hp) {
        auto seg = g.segments(g.conjugate(h, out.y));
        if (seg.size() > best_len) {
          best_len = seg.size();
          best     = seg;
        }
        if (seg.size() == 1) {
          // a lone shared element is reported on the left, so only count
          // segments outside the shared subgroup
          auto const& s = seg.front();
          if (!g.locate(s.side, s.word)) {
            if (side && *side != s.side) {
              mixed = true;
            }
            side = s.side;
          }
        }
      }
      if (best_len <= 1) {
        if (mixed) {
          throw InputError("list has elements outside the shared subgroup "
                           "in both factors; it is not a finite subgroup");
        }
        out.side = side.value_or(Side::left);
        return out;
      }
      out.y = g.multiply(out.y, best.front().word);
    }
    throw Error("torsion conjugation did not terminate within "
                + std::to_string(budget) + " steps");
  }

  ////////////////////////////////////////////////////////////////////////
  // Centralizers
  ////////////////////////////////////////////////////////////////////////

  struct CentralizerVerdict {
    enum class Outcome { not_commuting, in_factor, conjugate_into_shared };

    Outcome                     outcome = Outcome::not_commuting;
    std::optional<SyllableWord> violating;  // an h with [h, x] != 1
    SyllableWord                witness;    // g with (Hp)^g inside G0
  };

  inline char const* to_string(CentralizerVerdict::Outcome o) {
    switch (o) {
      case CentralizerVerdict::Outcome::not_commuting:
        return "not-commuting";
      case CentralizerVerdict::Outcome::in_factor:
        return "in-factor";
      case CentralizerVerdict::Outcome::conjugate_into_shared:
        return "conjugate-into-shared";
    }
    return "?";
  }

  // hp lies in the factor on `side`; x commutes with every listed h.
  // Either x lies in that factor, or some g conjugates hp into G0.
  inline CentralizerVerdict centralizer_conclusion_check(
      TowerGroup const& g, Side side, std::vector<SyllableWord> const& hp,
      SyllableWord const& x) {
    if (!g.is_amalgam()) {
      throw InputError("centralizer check needs an amalgam node");
    }
    CentralizerVerdict v;
    for (auto const& h : hp) {
      auto comm = juxtapose(g.inverse(h), g.inverse(x), h, x);
      if (!g.is_trivial(comm)) {
        v.violating = g.reduce(h);
        return v;
      }
    }
    auto seg = g.segments(x);
    if (seg.empty()
        || (seg.size() == 1
            && (seg.front().side == side
                || g.locate(seg.front().side, seg.front().word)))) {
      v.outcome = CentralizerVerdict::Outcome::in_factor;
      return v;
    }
    if (seg.front().side == side) {
      v.witness = seg.front().word;
    }
    for (auto const& h : hp) {
      auto c = g.child(side)->conjugate(h, v.witness);
      if (!g.locate(side, c)) {
        throw Error("centralizer dichotomy failed: " + to_string(h)
                    + " conjugated by " + to_string(v.witness)
                    + " is outside the shared subgroup");
      }
    }
    v.outcome = CentralizerVerdict::Outcome::conjugate_into_shared;
    return v;
  }

  ////////////////////////////////////////////////////////////////////////
  // Adjoining Aut(B)
  ////////////////////////////////////////////////////////////////////////

  struct AdjoinedAut {
    TowerPtr          group;
    bool              unchanged = false;
    AutomorphismGroup aut;  // of B, B's elements indexed as in the input
    // realizers[a] conjugates b_i to b_{aut.maps[a][i]}
    std::vector<SyllableWord> realizers;
  };

  // g must be a finite base; b lists the elements of a subgroup isomorphic
  // to h.  If conjugation by N_G(B) already induces Aut(B) nothing is
  // added; otherwise G *_N Aut(B) with N embedded by conjugation.
  inline AdjoinedAut adjoin_aut(TowerPtr const& g,
                                std::vector<SyllableWord> const& b,
                                GroupPtr const& h, Budget const& bud = {}) {
    if (!g->is_base()) {
      throw InputError("adjoin_aut needs a finite base group");
    }
    auto const& f = *g->group();
    Subgroup    sb;
    for (auto const& w : b) {
      auto r = g->reduce(w);
      sb.elements.push_back(r.empty() ? f.identity() : r.front().elem());
    }
    auto order_in_input = sb.elements;
    std::sort(sb.elements.begin(), sb.elements.end());
    if (std::adjacent_find(sb.elements.begin(), sb.elements.end())
            != sb.elements.end()
        || !is_subgroup(f, sb)) {
      throw InputError("element list is not a subgroup");
    }
    // B as a group, element i = order_in_input[i]
    std::map<elem_t, elem_t> pos;
    for (std::size_t i = 0; i < order_in_input.size(); ++i) {
      pos[order_in_input[i]] = static_cast<elem_t>(i);
    }
    std::vector<std::vector<elem_t>> rows(order_in_input.size(),
                                          std::vector<elem_t>(order_in_input.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < rows.size(); ++j) {
        rows[i][j] = pos.at(f.mul(order_in_input[i], order_in_input[j]));
      }
    }
    auto bg = share(FiniteGroup::from_table("B", std::move(rows), bud));
    if (!are_isomorphic(bg, h, bud)) {
      throw InputError("listed subgroup is not isomorphic to " + h->name());
    }
    if (centralizer(f, sb).size() != 1) {
      throw InputError("listed subgroup has nontrivial centralizer");
    }
    AdjoinedAut out;
    out.aut = automorphism_group(bg, bud);
    auto n  = normalizer(f, sb);
    // conjugation action of the normalizer, as Aut(B) indices
    std::vector<elem_t> induced;
    for (elem_t x : n.elements) {
      std::vector<elem_t> m(order_in_input.size());
      for (std::size_t i = 0; i < m.size(); ++i) {
        m[i] = pos.at(f.conj(order_in_input[i], x));
      }
      induced.push_back(out.aut.index_of(m));
    }
    auto img = induced;
    std::sort(img.begin(), img.end());
    img.erase(std::unique(img.begin(), img.end()), img.end());
    out.realizers.resize(out.aut.group->order());
    auto fid = g->factor_id();
    if (img.size() == out.aut.group->order()) {
      out.group     = g;
      out.unchanged = true;
      for (std::size_t k = n.size(); k-- > 0;) {
        auto x = n.elements[k];
        out.realizers[induced[k]] =
            x == f.identity() ? SyllableWord{}
                              : SyllableWord{GenRef::factor(fid, x)};
      }
      return out;
    }
    auto                      aid = g->fresh_factor_id();
    std::vector<SyllableWord> l, r;
    for (std::size_t k = 0; k < n.size(); ++k) {
      auto x = n.elements[k];
      l.push_back(x == f.identity() ? SyllableWord{}
                                    : SyllableWord{GenRef::factor(fid, x)});
      r.push_back(induced[k] == out.aut.group->identity()
                      ? SyllableWord{}
                      : SyllableWord{GenRef::factor(aid, induced[k])});
    }
    out.group = TowerGroup::amalgam(g, TowerGroup::base(aid, out.aut.group),
                                    Association::finite(std::move(l), std::move(r)));
    for (elem_t a = 0; a < out.aut.group->order(); ++a) {
      out.realizers[a] = a == out.aut.group->identity()
                             ? SyllableWord{}
                             : SyllableWord{GenRef::factor(aid, a)};
    }
    return out;
  }

  ////////////////////////////////////////////////////////////////////////
  // Copies of H and of Aut(H)
  ////////////////////////////////////////////////////////////////////////

  // An injective hom Aut(H) -> G given by the image of every element.  Its
  // restriction to the inner automorphisms is the copy of H it carries:
  // h -> words[inner(h)].
  struct AutCopy {
    std::vector<SyllableWord> words;

    SyllableWord const& of_aut(elem_t a) const {
      return words[a];
    }
    SyllableWord const& of_h(AutomorphismGroup const& aut, elem_t h) const {
      return words[aut.inner(h)];
    }
  };

  // Checks that the copy is an injective hom into g.
  inline void check_aut_copy(TowerGroup const& g, AutomorphismGroup const& aut,
                             AutCopy const& c) {
    auto const& a = *aut.group;
    if (c.words.size() != a.order()) {
      throw InputError("copy of Aut(H) needs " + std::to_string(a.order())
                       + " words");
    }
    for (elem_t x = 0; x < a.order(); ++x) {
      if (x != a.identity() && g.is_trivial(c.words[x])) {
        throw InputError("copy of Aut(H) is not injective");
      }
      for (elem_t y = 0; y < a.order(); ++y) {
        if (!g.equal(juxtapose(c.words[x], c.words[y]),
                     c.words[a.mul(x, y)])) {
          throw InputError("copy of Aut(H) is not a homomorphism");
        }
      }
    }
  }

  // Words of a complete group H as its own automorphism group.
  inline AutCopy aut_copy_of_complete(AutomorphismGroup const& aut,
                                      std::vector<SyllableWord> const& h_words) {
    if (aut.group->order() != aut.base->order()
        || center(*aut.base).size() != 1) {
      throw InputError("group is not complete");
    }
    AutCopy c;
    c.words.resize(aut.group->order());
    for (elem_t h = 0; h < aut.base->order(); ++h) {
      c.words[aut.inner(h)] = h_words[h];
    }
    return c;
  }

  namespace detail {
    // A leaf element c with c^-1 from[a] c = to[a] for all a, when every
    // listed word is a single syllable of one finite leaf.
    inline std::optional<SyllableWord> leaf_conjugator(
        TowerGroup const& g, std::vector<SyllableWord> const& from,
        std::vector<SyllableWord> const& to) {
      std::optional<factor_t> fid;
      auto                    leaf_of = [&](SyllableWord const& w) -> bool {
        auto r = g.reduce(w);
        if (r.empty()) {
          return true;
        }
        if (r.size() != 1 || !r.front().is_factor()) {
          return false;
        }
        if (fid && *fid != r.front().id()) {
          return false;
        }
        fid = r.front().id();
        return true;
      };
      for (std::size_t i = 0; i < from.size(); ++i) {
        if (!leaf_of(from[i]) || !leaf_of(to[i])) {
          return std::nullopt;
        }
      }
      if (!fid) {
        return SyllableWord{};
      }
      auto const& f = g.factors().group(*fid);
      for (elem_t c = 0; c < f.order(); ++c) {
        SyllableWord cw = c == f.identity()
                              ? SyllableWord{}
                              : SyllableWord{GenRef::factor(*fid, c)};
        bool ok = true;
        for (std::size_t i = 0; i < from.size() && ok; ++i) {
          ok = g.equal(g.conjugate(from[i], cw), to[i]);
        }
        if (ok) {
          return cw;
        }
      }
      return std::nullopt;
    }
  }  // namespace detail

  struct RealizedIso {
    TowerPtr              group;
    SyllableWord          conjugator;  // c^-1 a c = phi(a)
    std::vector<letter_t> new_letters;
  };

  // a_copy, b_copy: copies of Aut(H) in g carrying the copies A, B of H;
  // ref: a reference copy.  phi maps A's element for h to B's element for
  // pi(h), pi an automorphism of H given as an Aut(H) index.  At most two
  // HNN extensions are added, one conjugating ref to a_copy and one
  // conjugating ref to b_copy, each skipped if a conjugator already exists.
  inline RealizedIso realize_iso_by_hnn(TowerPtr const& g,
                                        AutomorphismGroup const& aut,
                                        AutCopy const& ref,
                                        AutCopy const& a_copy,
                                        AutCopy const& b_copy, elem_t pi) {
    check_aut_copy(*g, aut, ref);
    check_aut_copy(*g, aut, a_copy);
    check_aut_copy(*g, aut, b_copy);
    if (pi >= aut.group->order()) {
      throw InputError("automorphism index out of range");
    }
    auto const& hg = *aut.base;
    std::vector<SyllableWord> a_words, phi_words;
    for (elem_t h = 0; h < hg.order(); ++h) {
      a_words.push_back(a_copy.of_h(aut, h));
      phi_words.push_back(b_copy.of_h(aut, aut.maps[pi][h]));
    }
    RealizedIso out{g, {}, {}};
    if (auto c = detail::leaf_conjugator(*g, a_words, phi_words)) {
      out.conjugator = *c;
      return out;
    }
    // conjugator u with u^-1 ref[a] u = to[a]; adds a letter if needed
    auto link = [&](AutCopy const& to) -> SyllableWord {
      bool same = true;
      for (std::size_t a = 0; a < to.words.size() && same; ++a) {
        same = out.group->equal(ref.words[a], to.words[a]);
      }
      if (same) {
        return {};
      }
      if (auto c = detail::leaf_conjugator(*out.group, ref.words, to.words)) {
        return *c;
      }
      letter_t t = out.group->fresh_letter_id();
      out.group  = TowerGroup::hnn(out.group, t,
                                    Association::finite(ref.words, to.words));
      out.new_letters.push_back(t);
      return SyllableWord{GenRef::letter(t, 1)};
    };
    auto t1 = link(a_copy);
    auto t2 = link(b_copy);
    // t1^-1 ref[pi] t2:  (a)^c = t2^-1 ref[pi]^-1 ref(h) ref[pi] t2
    //                          = t2^-1 ref(pi h) t2 = B(pi h)
    out.conjugator = out.group->reduce(
        juxtapose(out.group->inverse(t1), ref.of_aut(pi), t2));
    for (elem_t h = 0; h < hg.order(); ++h) {
      if (!out.group->equal(out.group->conjugate(a_words[h], out.conjugator),
                            phi_words[h])) {
        throw Error("realized conjugator fails on element " + std::to_string(h));
      }
    }
    return out;
  }

  ////////////////////////////////////////////////////////////////////////
  // Socle witnesses and forced conjugacy
  ////////////////////////////////////////////////////////////////////////

  struct SocleWitness {
    TowerPtr group;
    // g equals the product of these, each lying in a copy of H
    std::vector<SyllableWord> factors;
    std::vector<factor_t>     copies;  // leaf ids of the adjoined copies
    bool                      unchanged = false;
  };

  namespace detail {
    // G *_{<g> = <h1 h2>} (H1 * H2) for g of infinite order.
    inline SocleWitness socle_infinite(TowerPtr const& g, SyllableWord const& x,
                                       GroupPtr const& h) {
      if (h->order() < 2) {
        throw InputError("H must be nontrivial");
      }
      factor_t a  = g->fresh_factor_id();
      factor_t b  = a + 1;
      elem_t   e  = h->generators().front();
      auto     hh = TowerGroup::free_product(TowerGroup::base(a, h),
                                             TowerGroup::base(b, h));
      SyllableWord h1{GenRef::factor(a, e)}, h2{GenRef::factor(b, e)};
      SocleWitness out;
      out.group   = TowerGroup::amalgam(g, hh,
                                        Association::cyclic(x, juxtapose(h1, h2)));
      out.factors = {h1, h2};
      out.copies  = {a, b};
      return out;
    }
  }  // namespace detail

  // Extends g so that x becomes a product of elements of copies of h.
  // known: words already known to lie in the H-socle.
  inline SocleWitness adjoin_socle_witness(
      TowerPtr const& g, SyllableWord const& x, GroupPtr const& h,
      std::vector<SyllableWord> const& known = {}) {
    for (auto const& k : known) {
      if (g->equal(k, x)) {
        SocleWitness out;
        out.group     = g;
        out.factors   = {g->reduce(x)};
        out.unchanged = true;
        return out;
      }
    }
    auto n = g->order(x);
    if (!n) {
      auto out = detail::socle_infinite(g, x, h);
      if (!out.group->equal(x, juxtapose(out.factors[0], out.factors[1]))) {
        throw Error("socle relation does not hold");
      }
      return out;
    }
    if (*n == 1) {
      SocleWitness out;
      out.group     = g;
      out.unchanged = true;
      return out;
    }
    // K = <x1, x2 : (x1 x2)^n> as <t> * Z/n with x1 = t, x2 = t^-1 y
    factor_t triv = g->fresh_factor_id();
    factor_t zn   = triv + 1;
    letter_t t    = g->fresh_letter_id();
    auto     k    = TowerGroup::free_product(
        TowerGroup::hnn(TowerGroup::base(triv, share(cyclic_group(1))), t,
                        Association::trivial()),
        TowerGroup::base(zn, share(cyclic_group(*n))));
    SyllableWord y{GenRef::factor(zn, 1)};
    SyllableWord x1{GenRef::letter(t, 1)};
    SyllableWord x2 = juxtapose(SyllableWord{GenRef::letter(t, -1)}, y);
    auto         g1 = TowerGroup::amalgam(g, k, Association::cyclic(x, y));
    auto         s1 = detail::socle_infinite(g1, x1, h);
    auto         s2 = detail::socle_infinite(s1.group, x2, h);
    SocleWitness out;
    out.group   = s2.group;
    out.factors = {s1.factors[0], s1.factors[1], s2.factors[0], s2.factors[1]};
    out.copies  = {s1.copies[0], s1.copies[1], s2.copies[0], s2.copies[1]};
    auto prod   = juxtapose(out.factors[0], out.factors[1], out.factors[2],
                            out.factors[3]);
    if (!out.group->equal(x, prod) || !out.group->equal(x, juxtapose(x1, x2))) {
      throw Error("socle relation chain does not hold");
    }
    return out;
  }

  struct ForcedConjugacy {
    TowerPtr group;
    letter_t letter;  // t^-1 f t = g
  };

  inline ForcedConjugacy make_conjugate(TowerPtr const& g, SyllableWord const& f,
                                        SyllableWord const& target) {
    if (!g->is_infinite_order(f) || !g->is_infinite_order(target)) {
      throw InputError("both elements must have certified infinite order");
    }
    if (g->equal(f, target)) {
      throw InputError("elements are already equal");
    }
    letter_t t = g->fresh_letter_id();
    return {TowerGroup::hnn(g, t, Association::cyclic(f, target)), t};
  }

}  // namespace forge

#endif  // FORGE_AMALGAM_HPP_
