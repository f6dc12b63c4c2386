// Finite groups given by multiplication tables, and the brute-force
// machinery around them: homomorphism enumeration, automorphism groups,
// centralizers, socles, suitability, completeness and localization checks.

#ifndef FORGE_FINGRP_HPP_
#define FORGE_FINGRP_HPP_

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "forge/errors.hpp"
#include "forge/text.hpp"
#include "forge/words.hpp"

namespace forge {

  struct Budget {
    // Upper bound on candidate image tuples visited by a hom search.
    std::uint64_t candidates = 100'000'000;
    // Exhaustive associativity check up to this order, sampling above.
    std::size_t exhaustive_assoc_order = 200;
  };

  class FiniteGroup {
   public:
    static constexpr std::size_t max_order = 20000;

    FiniteGroup() = default;

    // rows[i][j] = i*j
    static FiniteGroup from_table(std::string                     name,
                                  std::vector<std::vector<elem_t>> rows,
                                  Budget const&                   b = {}) {
      FiniteGroup g;
      g.name_ = std::move(name);
      g.n_    = rows.size();
      if (g.n_ == 0) {
        throw InputError("group must have at least one element");
      }
      if (g.n_ > max_order) {
        throw InputError("group order exceeds " + std::to_string(max_order));
      }
      g.table_.resize(g.n_ * g.n_);
      for (std::size_t i = 0; i < g.n_; ++i) {
        if (rows[i].size() != g.n_) {
          throw InputError("multiplication table row " + std::to_string(i)
                           + " has wrong length");
        }
        for (std::size_t j = 0; j < g.n_; ++j) {
          if (rows[i][j] >= g.n_) {
            throw InputError("table entry out of range in row "
                             + std::to_string(i));
          }
          g.table_[i * g.n_ + j] = static_cast<std::uint16_t>(rows[i][j]);
        }
      }
      g.finish(b);
      return g;
    }

    // Permutations in image notation; product p*q applies p first.
    static FiniteGroup from_permutations(
        std::string name, std::vector<std::vector<std::uint32_t>> gens,
        Budget const& b = {}) {
      std::size_t degree = gens.empty() ? 1 : gens.front().size();
      for (auto const& p : gens) {
        if (p.size() != degree) {
          throw InputError("permutations of different degree");
        }
        std::vector<bool> seen(degree, false);
        for (auto x : p) {
          if (x >= degree || seen[x]) {
            throw InputError("not a permutation");
          }
          seen[x] = true;
        }
      }
      using perm = std::vector<std::uint32_t>;
      perm id(degree);
      std::iota(id.begin(), id.end(), 0);
      std::map<perm, elem_t> index;
      std::vector<perm>      elems{id};
      index.emplace(id, 0);
      for (std::size_t k = 0; k < elems.size(); ++k) {
        for (auto const& s : gens) {
          perm q(degree);
          for (std::size_t i = 0; i < degree; ++i) {
            q[i] = s[elems[k][i]];
          }
          if (index.emplace(q, static_cast<elem_t>(elems.size())).second) {
            elems.push_back(std::move(q));
            if (elems.size() > max_order) {
              throw InputError("permutation group order exceeds "
                               + std::to_string(max_order));
            }
          }
        }
      }
      FiniteGroup g;
      g.name_ = std::move(name);
      g.n_    = elems.size();
      g.table_.resize(g.n_ * g.n_);
      perm q(degree);
      for (std::size_t a = 0; a < g.n_; ++a) {
        for (std::size_t c = 0; c < g.n_; ++c) {
          for (std::size_t i = 0; i < degree; ++i) {
            q[i] = elems[c][elems[a][i]];
          }
          g.table_[a * g.n_ + c] = static_cast<std::uint16_t>(index.at(q));
        }
      }
      g.perms_ = std::move(elems);
      g.finish(b);
      return g;
    }

    std::string const& name() const noexcept {
      return name_;
    }
    std::size_t order() const noexcept {
      return n_;
    }
    elem_t identity() const noexcept {
      return id_;
    }
    elem_t mul(elem_t a, elem_t b) const noexcept {
      return table_[a * n_ + b];
    }
    elem_t inverse(elem_t a) const noexcept {
      return inv_[a];
    }
    std::size_t element_order(elem_t a) const noexcept {
      return orders_[a];
    }
    elem_t conj(elem_t x, elem_t g) const noexcept {  // g^-1 x g
      return mul(mul(inv_[g], x), g);
    }
    elem_t power(elem_t a, long k) const noexcept {
      elem_t base = k < 0 ? inv_[a] : a;
      elem_t r    = id_;
      for (long i = 0; i < (k < 0 ? -k : k); ++i) {
        r = mul(r, base);
      }
      return r;
    }
    std::vector<elem_t> const& generators() const noexcept {
      return gens_;
    }
    bool is_abelian() const noexcept {
      for (elem_t a = 0; a < n_; ++a) {
        for (elem_t b = a + 1; b < n_; ++b) {
          if (mul(a, b) != mul(b, a)) {
            return false;
          }
        }
      }
      return true;
    }
    std::vector<std::vector<std::uint32_t>> const& permutations() const {
      return perms_;
    }

    std::vector<std::vector<elem_t>> rows() const {
      std::vector<std::vector<elem_t>> r(n_, std::vector<elem_t>(n_));
      for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < n_; ++j) {
          r[i][j] = mul(static_cast<elem_t>(i), static_cast<elem_t>(j));
        }
      }
      return r;
    }

   private:
    void finish(Budget const& b) {
      // identity
      bool found = false;
      for (elem_t e = 0; e < n_ && !found; ++e) {
        bool ok = true;
        for (elem_t x = 0; x < n_ && ok; ++x) {
          ok = mul(e, x) == x && mul(x, e) == x;
        }
        if (ok) {
          id_   = e;
          found = true;
        }
      }
      if (!found) {
        throw InputError("table '" + name_ + "' has no two-sided identity");
      }
      inv_.assign(n_, 0);
      for (elem_t x = 0; x < n_; ++x) {
        bool ok = false;
        for (elem_t y = 0; y < n_ && !ok; ++y) {
          if (mul(x, y) == id_ && mul(y, x) == id_) {
            inv_[x] = y;
            ok      = true;
          }
        }
        if (!ok) {
          throw InputError("element " + std::to_string(x) + " of '" + name_
                           + "' has no two-sided inverse");
        }
      }
      if (n_ <= b.exhaustive_assoc_order) {
        for (elem_t x = 0; x < n_; ++x) {
          for (elem_t y = 0; y < n_; ++y) {
            elem_t xy = mul(x, y);
            for (elem_t z = 0; z < n_; ++z) {
              if (mul(xy, z) != mul(x, mul(y, z))) {
                throw InputError("table '" + name_ + "' is not associative");
              }
            }
          }
        }
      } else {
        std::mt19937_64                       rng(0x5eed);
        std::uniform_int_distribution<elem_t> d(0, static_cast<elem_t>(n_ - 1));
        for (int i = 0; i < 200000; ++i) {
          elem_t x = d(rng), y = d(rng), z = d(rng);
          if (mul(mul(x, y), z) != mul(x, mul(y, z))) {
            throw InputError("table '" + name_ + "' is not associative");
          }
        }
      }
      orders_.assign(n_, 0);
      for (elem_t x = 0; x < n_; ++x) {
        std::size_t k = 1;
        for (elem_t p = x; p != id_; p = mul(p, x)) {
          ++k;
        }
        orders_[x] = k;
      }
      pick_generators();
    }

    // Greedy: repeatedly add an element of largest order outside the
    // subgroup generated so far.
    void pick_generators() {
      std::vector<bool> in(n_, false);
      in[id_] = true;
      std::size_t covered = 1;
      gens_.clear();
      while (covered < n_) {
        elem_t best = 0;
        bool   have = false;
        for (elem_t x = 0; x < n_; ++x) {
          if (!in[x] && (!have || orders_[x] > orders_[best])) {
            best = x;
            have = true;
          }
        }
        gens_.push_back(best);
        std::vector<elem_t> stack;
        std::fill(in.begin(), in.end(), false);
        in[id_] = true;
        stack.push_back(id_);
        covered = 1;
        while (!stack.empty()) {
          elem_t h = stack.back();
          stack.pop_back();
          for (elem_t s : gens_) {
            elem_t hs = mul(h, s);
            if (!in[hs]) {
              in[hs] = true;
              ++covered;
              stack.push_back(hs);
            }
          }
        }
      }
    }

    std::string                             name_;
    std::size_t                             n_ = 0;
    std::vector<std::uint16_t>              table_;
    elem_t                                  id_ = 0;
    std::vector<elem_t>                     inv_;
    std::vector<std::size_t>                orders_;
    std::vector<elem_t>                     gens_;
    std::vector<std::vector<std::uint32_t>> perms_;
  };

  using GroupPtr = std::shared_ptr<FiniteGroup const>;

  inline GroupPtr share(FiniteGroup g) {
    return std::make_shared<FiniteGroup const>(std::move(g));
  }

  // A sorted set of element indices of some parent group.
  struct Subgroup {
    std::vector<elem_t> elements;

    std::size_t size() const noexcept {
      return elements.size();
    }
    bool contains(elem_t x) const {
      return std::binary_search(elements.begin(), elements.end(), x);
    }
    bool operator==(Subgroup const&) const = default;
  };

  struct GroupHom {
    GroupPtr            source;
    GroupPtr            target;
    std::vector<elem_t> images;

    elem_t operator()(elem_t x) const {
      return images[x];
    }
    bool is_injective() const {
      std::vector<elem_t> s = images;
      std::sort(s.begin(), s.end());
      return std::adjacent_find(s.begin(), s.end()) == s.end();
    }
    bool is_hom() const {
      for (elem_t x = 0; x < source->order(); ++x) {
        for (elem_t y = 0; y < source->order(); ++y) {
          if (images[source->mul(x, y)]
              != target->mul(images[x], images[y])) {
            return false;
          }
        }
      }
      return true;
    }
  };

  ////////////////////////////////////////////////////////////////////////
  // Standard groups
  ////////////////////////////////////////////////////////////////////////

  inline FiniteGroup cyclic_group(std::size_t n) {
    std::vector<std::vector<elem_t>> rows(n, std::vector<elem_t>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        rows[i][j] = static_cast<elem_t>((i + j) % n);
      }
    }
    return FiniteGroup::from_table("Z" + std::to_string(n), std::move(rows));
  }

  inline FiniteGroup symmetric_group(std::size_t n) {
    std::vector<std::vector<std::uint32_t>> gens;
    if (n >= 2) {
      std::vector<std::uint32_t> t(n), c(n);
      std::iota(t.begin(), t.end(), 0);
      std::swap(t[0], t[1]);
      for (std::size_t i = 0; i < n; ++i) {
        c[i] = static_cast<std::uint32_t>((i + 1) % n);
      }
      gens = {t, c};
    }
    return FiniteGroup::from_permutations("S" + std::to_string(n),
                                          std::move(gens));
  }

  inline FiniteGroup alternating_group(std::size_t n) {
    std::vector<std::vector<std::uint32_t>> gens;
    if (n >= 3) {
      std::vector<std::uint32_t> a(n), c(n);
      std::iota(a.begin(), a.end(), 0);
      a[0] = 1;
      a[1] = 2;
      a[2] = 0;
      std::iota(c.begin(), c.end(), 0);
      std::size_t start = (n % 2 == 1) ? 0 : 1;
      for (std::size_t i = start; i < n; ++i) {
        c[i] = static_cast<std::uint32_t>(i + 1 < n ? i + 1 : start);
      }
      gens = {a, c};
    }
    return FiniteGroup::from_permutations("A" + std::to_string(n),
                                          std::move(gens));
  }

  inline FiniteGroup dihedral_group(std::size_t n) {  // order 2n
    std::vector<std::uint32_t> r(n), s(n);
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = static_cast<std::uint32_t>((i + 1) % n);
      s[i] = static_cast<std::uint32_t>((n - i) % n);
    }
    return FiniteGroup::from_permutations("D" + std::to_string(2 * n),
                                          {r, s});
  }

  inline FiniteGroup quaternion_group() {
    // Q8 as the regular permutation representation on {±1,±i,±j,±k}
    // indexed 1,-1,i,-i,j,-j,k,-k.
    std::vector<std::uint32_t> li = {2, 3, 1, 0, 6, 7, 5, 4};
    std::vector<std::uint32_t> lj = {4, 5, 7, 6, 1, 0, 2, 3};
    return FiniteGroup::from_permutations("Q8", {li, lj});
  }

  inline FiniteGroup direct_product(FiniteGroup const& a, FiniteGroup const& b) {
    std::size_t                      n = a.order() * b.order();
    std::vector<std::vector<elem_t>> rows(n, std::vector<elem_t>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        auto x = a.mul(static_cast<elem_t>(i / b.order()),
                       static_cast<elem_t>(j / b.order()));
        auto y = b.mul(static_cast<elem_t>(i % b.order()),
                       static_cast<elem_t>(j % b.order()));
        rows[i][j] = static_cast<elem_t>(x * b.order() + y);
      }
    }
    return FiniteGroup::from_table(a.name() + "x" + b.name(), std::move(rows));
  }

  ////////////////////////////////////////////////////////////////////////
  // Subgroups
  ////////////////////////////////////////////////////////////////////////

  inline Subgroup generated_subgroup(FiniteGroup const&         g,
                                     std::vector<elem_t> const& gens) {
    std::vector<bool>   in(g.order(), false);
    std::vector<elem_t> stack{g.identity()};
    in[g.identity()] = true;
    while (!stack.empty()) {
      elem_t h = stack.back();
      stack.pop_back();
      for (elem_t s : gens) {
        elem_t hs = g.mul(h, s);
        if (!in[hs]) {
          in[hs] = true;
          stack.push_back(hs);
        }
      }
    }
    Subgroup out;
    for (elem_t x = 0; x < g.order(); ++x) {
      if (in[x]) {
        out.elements.push_back(x);
      }
    }
    return out;
  }

  inline Subgroup whole_group(FiniteGroup const& g) {
    Subgroup s;
    s.elements.resize(g.order());
    std::iota(s.elements.begin(), s.elements.end(), 0);
    return s;
  }

  inline Subgroup trivial_subgroup(FiniteGroup const& g) {
    return Subgroup{{g.identity()}};
  }

  inline bool is_subgroup(FiniteGroup const& g, Subgroup const& s) {
    if (!s.contains(g.identity())) {
      return false;
    }
    for (elem_t x : s.elements) {
      if (!s.contains(g.inverse(x))) {
        return false;
      }
      for (elem_t y : s.elements) {
        if (!s.contains(g.mul(x, y))) {
          return false;
        }
      }
    }
    return true;
  }

  inline Subgroup centralizer(FiniteGroup const& g, Subgroup const& s) {
    Subgroup out;
    for (elem_t x = 0; x < g.order(); ++x) {
      bool ok = true;
      for (elem_t y : s.elements) {
        if (g.mul(x, y) != g.mul(y, x)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        out.elements.push_back(x);
      }
    }
    return out;
  }

  inline Subgroup center(FiniteGroup const& g) {
    return centralizer(g, whole_group(g));
  }

  inline Subgroup conjugate_subgroup(FiniteGroup const& g, Subgroup const& s,
                                     elem_t x) {  // s^x = x^-1 s x
    Subgroup out;
    for (elem_t y : s.elements) {
      out.elements.push_back(g.conj(y, x));
    }
    std::sort(out.elements.begin(), out.elements.end());
    return out;
  }

  inline Subgroup normalizer(FiniteGroup const& g, Subgroup const& s) {
    Subgroup out;
    for (elem_t x = 0; x < g.order(); ++x) {
      if (conjugate_subgroup(g, s, x) == s) {
        out.elements.push_back(x);
      }
    }
    return out;
  }

  // Some g with a = b^g, the least such index.
  inline std::optional<elem_t> subgroup_conjugacy(FiniteGroup const& g,
                                                  Subgroup const&    a,
                                                  Subgroup const&    b) {
    if (a.size() != b.size()) {
      return std::nullopt;
    }
    for (elem_t x = 0; x < g.order(); ++x) {
      if (conjugate_subgroup(g, b, x) == a) {
        return x;
      }
    }
    return std::nullopt;
  }

  // The subgroup as a group in its own right: element k of the result is
  // s.elements[k].
  inline FiniteGroup subgroup_as_group(FiniteGroup const& g, Subgroup const& s,
                                       std::string name) {
    std::map<elem_t, elem_t> pos;
    for (std::size_t k = 0; k < s.size(); ++k) {
      pos[s.elements[k]] = static_cast<elem_t>(k);
    }
    std::vector<std::vector<elem_t>> rows(s.size(),
                                          std::vector<elem_t>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = 0; j < s.size(); ++j) {
        auto it = pos.find(g.mul(s.elements[i], s.elements[j]));
        if (it == pos.end()) {
          throw InputError("element list is not closed under multiplication");
        }
        rows[i][j] = it->second;
      }
    }
    return FiniteGroup::from_table(std::move(name), std::move(rows));
  }

  ////////////////////////////////////////////////////////////////////////
  // Homomorphism enumeration
  ////////////////////////////////////////////////////////////////////////

  namespace detail {
    constexpr elem_t unset = static_cast<elem_t>(-1);

    // Extend generator images to <gens[0..j)>; false on inconsistency.
    inline bool extend_images(FiniteGroup const& h, FiniteGroup const& g,
                              std::vector<elem_t> const& gen_imgs,
                              std::size_t j, std::vector<elem_t>& img) {
      std::fill(img.begin(), img.end(), unset);
      auto const&         gens = h.generators();
      std::vector<elem_t> queue{h.identity()};
      img[h.identity()] = g.identity();
      for (std::size_t k = 0; k < queue.size(); ++k) {
        elem_t x = queue[k];
        for (std::size_t i = 0; i < j; ++i) {
          elem_t xs = h.mul(x, gens[i]);
          elem_t v  = g.mul(img[x], gen_imgs[i]);
          if (img[xs] == unset) {
            img[xs] = v;
            queue.push_back(xs);
          } else if (img[xs] != v) {
            return false;
          }
        }
      }
      return true;
    }
  }  // namespace detail

  // Every hom H -> G (only injective ones with mono_only), sorted by image
  // arrays.
  inline std::vector<GroupHom> enumerate_homs(GroupPtr const& h,
                                              GroupPtr const& g,
                                              bool           mono_only,
                                              Budget const&  b = {}) {
    auto const&                      gens = h->generators();
    std::vector<std::vector<elem_t>> cand(gens.size());
    for (std::size_t i = 0; i < gens.size(); ++i) {
      auto o = h->element_order(gens[i]);
      for (elem_t y = 0; y < g->order(); ++y) {
        auto oy = g->element_order(y);
        if (mono_only ? oy == o : o % oy == 0) {
          cand[i].push_back(y);
        }
      }
    }
    std::vector<GroupHom> out;
    std::vector<elem_t>   choice(gens.size(), 0), img(h->order());
    std::uint64_t         visited = 0;

    auto rec = [&](auto&& self, std::size_t i) -> void {
      if (i == gens.size()) {
        detail::extend_images(*h, *g, choice, gens.size(), img);
        GroupHom f{h, g, img};
        if (!mono_only || f.is_injective()) {
          out.push_back(std::move(f));
        }
        return;
      }
      for (elem_t y : cand[i]) {
        if (++visited > b.candidates) {
          throw BudgetExceeded("hom enumeration " + h->name() + " -> "
                               + g->name() + " exceeded "
                               + std::to_string(b.candidates)
                               + " candidate images");
        }
        choice[i] = y;
        if (detail::extend_images(*h, *g, choice, i + 1, img)) {
          self(self, i + 1);
        }
      }
    };
    if (gens.empty()) {
      out.push_back(GroupHom{h, g, std::vector<elem_t>{g->identity()}});
    } else {
      rec(rec, 0);
    }
    std::sort(out.begin(), out.end(), [](auto const& x, auto const& y) {
      return x.images < y.images;
    });
    return out;
  }

  inline Subgroup image(GroupHom const& f) {
    Subgroup s{f.images};
    std::sort(s.elements.begin(), s.elements.end());
    s.elements.erase(std::unique(s.elements.begin(), s.elements.end()),
                     s.elements.end());
    return s;
  }

  inline bool are_isomorphic(GroupPtr const& a, GroupPtr const& b,
                             Budget const& bud = {}) {
    if (a->order() != b->order()) {
      return false;
    }
    // any mono between groups of equal finite order is an isomorphism
    auto const& gens = a->generators();
    (void) gens;
    return !enumerate_homs(a, b, true, bud).empty();
  }

  ////////////////////////////////////////////////////////////////////////
  // Automorphisms
  ////////////////////////////////////////////////////////////////////////

  // Aut(G) as a finite group.  Element k decodes to maps[k]; the product
  // a*b applies a first, then b, so that g -> g* (x -> g^-1 x g) is a
  // homomorphism G -> Aut(G).
  struct AutomorphismGroup {
    GroupPtr                         base;
    GroupPtr                         group;
    std::vector<std::vector<elem_t>> maps;
    GroupHom                         inner;  // G -> Aut(G), g -> g*

    Subgroup inner_copy() const {
      return forge::image(inner);
    }
    elem_t index_of(std::vector<elem_t> const& m) const {
      auto it = std::lower_bound(maps.begin() + 1, maps.end(), m);
      if (maps[0] == m) {
        return 0;
      }
      if (it == maps.end() || *it != m) {
        throw InputError("map is not an automorphism");
      }
      return static_cast<elem_t>(it - maps.begin());
    }
  };

  inline AutomorphismGroup automorphism_group(GroupPtr const& g,
                                              Budget const&   b = {}) {
    auto homs = enumerate_homs(g, g, true, b);
    std::vector<std::vector<elem_t>> maps;
    std::vector<elem_t>              id(g->order());
    std::iota(id.begin(), id.end(), 0);
    maps.push_back(id);
    for (auto& f : homs) {
      if (f.images != id) {
        maps.push_back(std::move(f.images));
      }
    }
    std::sort(maps.begin() + 1, maps.end());
    AutomorphismGroup out;
    out.base = g;
    out.maps = std::move(maps);
    std::size_t const                n = out.maps.size();
    std::vector<std::vector<elem_t>> rows(n, std::vector<elem_t>(n));
    std::vector<elem_t>              c(g->order());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t x = 0; x < g->order(); ++x) {
          c[x] = out.maps[j][out.maps[i][x]];
        }
        rows[i][j] = out.index_of(c);
      }
    }
    out.group = share(
        FiniteGroup::from_table("Aut(" + g->name() + ")", std::move(rows), b));
    out.inner.source = g;
    out.inner.target = out.group;
    out.inner.images.resize(g->order());
    for (elem_t y = 0; y < g->order(); ++y) {
      for (elem_t x = 0; x < g->order(); ++x) {
        c[x] = g->conj(x, y);
      }
      out.inner.images[y] = out.index_of(c);
    }
    return out;
  }

  inline bool is_complete(GroupPtr const& g, Budget const& b = {}) {
    if (center(*g).size() != 1) {
      return false;
    }
    return automorphism_group(g, b).group->order() == g->order();
  }

  // Subgroup generated by the images of all homs H -> G.
  inline Subgroup h_socle(GroupPtr const& h, GroupPtr const& g,
                          Budget const& b = {}) {
    std::vector<elem_t> gens;
    for (auto const& f : enumerate_homs(h, g, false, b)) {
      gens.insert(gens.end(), f.images.begin(), f.images.end());
    }
    std::sort(gens.begin(), gens.end());
    gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
    return generated_subgroup(*g, gens);
  }

  ////////////////////////////////////////////////////////////////////////
  // Suitability
  ////////////////////////////////////////////////////////////////////////

  struct SuitabilityVerdict {
    enum class Failure { none, center, unique_copy, complete_in_aut };

    bool    suitable = false;
    Failure failure  = Failure::none;
    // nontrivial central element of H
    std::optional<elem_t> central_witness;
    // a copy of H in Aut(H) other than the inner one
    std::optional<Subgroup> stray_copy;
    // an automorphism of H (index in Aut(H)) not induced by conjugation
    std::optional<elem_t> unextended_aut;
  };

  inline char const* to_string(SuitabilityVerdict::Failure f) {
    switch (f) {
      case SuitabilityVerdict::Failure::none:
        return "none";
      case SuitabilityVerdict::Failure::center:
        return "center";
      case SuitabilityVerdict::Failure::unique_copy:
        return "unique-copy";
      case SuitabilityVerdict::Failure::complete_in_aut:
        return "complete-in-aut";
    }
    return "?";
  }

  // Finite groups are torsion, so only the centre, the uniqueness of the
  // inner copy and the extension condition are checked.
  inline SuitabilityVerdict is_suitable(GroupPtr const& h,
                                        Budget const&   b = {}) {
    SuitabilityVerdict v;
    auto               z = center(*h);
    if (z.size() != 1) {
      v.failure = SuitabilityVerdict::Failure::center;
      for (elem_t x : z.elements) {
        if (x != h->identity()) {
          v.central_witness = x;
          break;
        }
      }
      return v;
    }
    auto aut   = automorphism_group(h, b);
    auto inner = aut.inner_copy();
    for (auto const& f : enumerate_homs(h, aut.group, true, b)) {
      auto im = image(f);
      if (im != inner) {
        v.failure    = SuitabilityVerdict::Failure::unique_copy;
        v.stray_copy = std::move(im);
        return v;
      }
    }
    auto const& A = *aut.group;
    for (elem_t alpha = 0; alpha < A.order(); ++alpha) {
      bool extended = false;
      for (elem_t a = 0; a < A.order() && !extended; ++a) {
        extended = true;
        for (elem_t x : h->generators()) {
          elem_t lhs = A.conj(aut.inner(x), a);
          elem_t rhs = aut.inner(aut.maps[alpha][x]);
          if (lhs != rhs) {
            extended = false;
            break;
          }
        }
      }
      if (!extended) {
        v.failure        = SuitabilityVerdict::Failure::complete_in_aut;
        v.unextended_aut = alpha;
        return v;
      }
    }
    v.suitable = true;
    return v;
  }

  ////////////////////////////////////////////////////////////////////////
  // Localization
  ////////////////////////////////////////////////////////////////////////

  struct LocalizationVerdict {
    bool is_localization = false;
    // a phi: H -> G with zero or several extensions through eta
    std::optional<GroupHom>              phi;
    std::vector<std::vector<elem_t>>     extensions;  // at most two listed
    std::size_t                          extension_count = 0;
  };

  // Counterexamples without any extension are reported first, then ones
  // with several extensions, nontrivial phi before the zero map.
  inline LocalizationVerdict is_localization(GroupHom const& eta,
                                             Budget const&   b = {}) {
    auto phis = enumerate_homs(eta.source, eta.target, false, b);
    auto ends = enumerate_homs(eta.target, eta.target, false, b);
    auto const& hg = eta.source->generators();
    LocalizationVerdict best;
    int                 best_rank = 3;
    for (auto const& phi : phis) {
      std::vector<std::vector<elem_t>> ext;
      std::size_t                      count = 0;
      for (auto const& e : ends) {
        bool ok = true;
        for (elem_t x : hg) {
          if (e.images[eta.images[x]] != phi.images[x]) {
            ok = false;
            break;
          }
        }
        if (ok) {
          ++count;
          if (ext.size() < 2) {
            ext.push_back(e.images);
          }
        }
      }
      if (count == 1) {
        continue;
      }
      bool trivial = image(phi).size() == 1;
      int  rank    = count == 0 ? 0 : (trivial ? 2 : 1);
      if (rank < best_rank) {
        best_rank            = rank;
        best.phi             = phi;
        best.extensions      = std::move(ext);
        best.extension_count = count;
      }
    }
    best.is_localization = best_rank == 3;
    return best;
  }

  ////////////////////////////////////////////////////////////////////////
  // Text format
  //
  //   group <name>
  //   order <n>
  //   table            (then n rows of n indices)
  //   perms <k>        (then k permutations in image notation)
  ////////////////////////////////////////////////////////////////////////

  inline FiniteGroup read_group(LineCursor& c, Budget const& b = {}) {
    auto head = split_ws(c.peek());
    if (head.size() != 2 || head[0] != "group") {
      c.fail("expected 'group <name>'");
    }
    c.next();
    std::string name = head[1];
    auto        ord  = split_ws(c.peek());
    if (ord.size() != 2 || ord[0] != "order") {
      c.fail("expected 'order <n>'");
    }
    std::size_t n = parse_count(ord[1], c);
    if (n == 0 || n > FiniteGroup::max_order) {
      c.fail("order out of range");
    }
    c.next();
    auto kind = split_ws(c.peek());
    try {
      if (kind.size() == 1 && kind[0] == "table") {
        c.next();
        std::vector<std::vector<elem_t>> rows;
        for (std::size_t i = 0; i < n; ++i) {
          auto toks = split_ws(c.peek());
          if (toks.size() != n) {
            c.fail("table row needs " + std::to_string(n) + " entries");
          }
          std::vector<elem_t> row;
          for (auto const& t : toks) {
            row.push_back(static_cast<elem_t>(parse_count(t, c)));
          }
          rows.push_back(std::move(row));
          c.next();
        }
        return FiniteGroup::from_table(name, std::move(rows), b);
      }
      if (kind.size() == 2 && kind[0] == "perms") {
        std::size_t k = parse_count(kind[1], c);
        c.next();
        std::vector<std::vector<std::uint32_t>> gens;
        for (std::size_t i = 0; i < k; ++i) {
          std::vector<std::uint32_t> p;
          for (auto const& t : split_ws(c.peek())) {
            p.push_back(static_cast<std::uint32_t>(parse_count(t, c)));
          }
          gens.push_back(std::move(p));
          c.next();
        }
        auto g = FiniteGroup::from_permutations(name, std::move(gens), b);
        if (g.order() != n) {
          throw InputError("permutations generate a group of order "
                               + std::to_string(g.order()) + ", declared "
                               + std::to_string(n),
                           c.line_no());
        }
        return g;
      }
    } catch (InputError const& e) {
      if (e.line() != 0) {
        throw;
      }
      throw InputError(e.what(), c.line_no());
    }
    c.fail("expected 'table' or 'perms <k>'");
  }

  inline FiniteGroup read_group(std::istream& in, Budget const& b = {}) {
    LineCursor c(in);
    return read_group(c, b);
  }

  inline std::string write_group(FiniteGroup const& g) {
    std::string out = "group " + g.name() + "\norder "
                      + std::to_string(g.order()) + "\ntable\n";
    for (elem_t i = 0; i < g.order(); ++i) {
      for (elem_t j = 0; j < g.order(); ++j) {
        out += (j ? " " : "") + std::to_string(g.mul(i, j));
      }
      out += "\n";
    }
    return out;
  }

  // Leaf groups addressed by factor id; the SyllableMerger used for words
  // over several finite factors.
  class FactorTable {
   public:
    void add(factor_t f, GroupPtr g) {
      auto [it, inserted] = groups_.emplace(f, g);
      if (!inserted && it->second != g) {
        throw InputError("factor id f" + std::to_string(f)
                         + " bound to two different groups");
      }
    }
    void merge(FactorTable const& other) {
      for (auto const& [f, g] : other.groups_) {
        add(f, g);
      }
    }
    bool has(factor_t f) const {
      return groups_.count(f) != 0;
    }
    FiniteGroup const& group(factor_t f) const {
      auto it = groups_.find(f);
      if (it == groups_.end()) {
        throw InputError("unknown factor f" + std::to_string(f));
      }
      return *it->second;
    }
    GroupPtr const& group_ptr(factor_t f) const {
      auto it = groups_.find(f);
      if (it == groups_.end()) {
        throw InputError("unknown factor f" + std::to_string(f));
      }
      return it->second;
    }
    std::map<factor_t, GroupPtr> const& all() const noexcept {
      return groups_;
    }

    elem_t multiply(factor_t f, elem_t a, elem_t b) const {
      auto const& g = group(f);
      check(g, f, a);
      check(g, f, b);
      return g.mul(a, b);
    }
    elem_t identity(factor_t f) const {
      return group(f).identity();
    }
    elem_t inverse(factor_t f, elem_t a) const {
      auto const& g = group(f);
      check(g, f, a);
      return g.inverse(a);
    }

   private:
    static void check(FiniteGroup const& g, factor_t f, elem_t a) {
      if (a >= g.order()) {
        throw InputError("element " + std::to_string(a)
                         + " out of range for factor f" + std::to_string(f));
      }
    }
    std::map<factor_t, GroupPtr> groups_;
  };

}  // namespace forge

#endif  // FORGE_FINGRP_HPP_
