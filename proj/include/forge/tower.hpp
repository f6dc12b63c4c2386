// Tower groups: finite bases, amalgamated free products, HNN extensions and
// quotients by a normal closure, with a word problem at every node.
//
// Words at a node use the factor ids of the finite leaves and the letter ids
// of the HNN nodes below it.  Leaf ids are disjoint across a tree.

#ifndef FORGE_TOWER_HPP_
#define FORGE_TOWER_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "forge/errors.hpp"
#include "forge/fingrp.hpp"
#include "forge/words.hpp"

namespace forge {

  class TowerGroup;
  using TowerPtr = std::shared_ptr<TowerGroup const>;

  // Decides triviality in a quotient of an ambient tower group.
  class WordProblemOracle {
   public:
    virtual ~WordProblemOracle() = default;
    // Throws Undecidable when no verdict can be certified.
    virtual bool        is_trivial(SyllableWord const& w) const = 0;
    virtual std::string describe() const                        = 0;
  };

  enum class Side : std::uint8_t { left = 0, right = 1 };

  inline Side other(Side s) noexcept {
    return s == Side::left ? Side::right : Side::left;
  }

  inline char const* to_string(Side s) noexcept {
    return s == Side::left ? "left" : "right";
  }

  // A pair of isomorphic subgroups, one per side; for HNN nodes both sides
  // live in the base and the pairing is the map phi: left -> right.
  //
  // Finite: explicit index-aligned element lists.  Cyclic: a generator per
  // side, both of infinite order; the window only matters in quotients.
  struct Association {
    enum class Kind { finite, cyclic };

    Kind                      kind = Kind::finite;
    std::vector<SyllableWord> left, right;
    SyllableWord              left_gen, right_gen;
    std::size_t               window = 16;

    static Association trivial() {
      Association a;
      a.left  = {SyllableWord{}};
      a.right = {SyllableWord{}};
      return a;
    }
    static Association finite(std::vector<SyllableWord> l,
                              std::vector<SyllableWord> r) {
      Association a;
      a.left  = std::move(l);
      a.right = std::move(r);
      return a;
    }
    static Association cyclic(SyllableWord l, SyllableWord r,
                              std::size_t window = 16) {
      Association a;
      a.kind      = Kind::cyclic;
      a.left_gen  = std::move(l);
      a.right_gen = std::move(r);
      a.window    = window;
      return a;
    }

    std::vector<SyllableWord> const& list(Side s) const {
      return s == Side::left ? left : right;
    }
    SyllableWord const& gen(Side s) const {
      return s == Side::left ? left_gen : right_gen;
    }
    bool is_trivial_subgroup() const {
      return kind == Kind::finite && left.size() == 1;
    }
    std::size_t size() const {
      return kind == Kind::finite ? left.size() : 0;
    }
  };

  class TowerGroup : public std::enable_shared_from_this<TowerGroup> {
   public:
    enum class Kind { base, amalgam, hnn, quotient };

    // A reduced segment of an amalgam normal form.
    struct Segment {
      Side         side;
      SyllableWord word;
    };

    ////////////////////////////////////////////////////////////////////////
    // Construction
    ////////////////////////////////////////////////////////////////////////

    static TowerPtr base(factor_t id, GroupPtr g) {
      auto t       = std::shared_ptr<TowerGroup>(new TowerGroup(Kind::base));
      t->factor_   = id;
      t->group_    = g;
      t->factors_.add(id, g);
      return t;
    }

    static TowerPtr base(factor_t id, FiniteGroup g) {
      return base(id, share(std::move(g)));
    }

    static TowerPtr amalgam(TowerPtr l, TowerPtr r, Association a) {
      auto t = std::shared_ptr<TowerGroup>(new TowerGroup(Kind::amalgam));
      for (auto const& [f, g] : r->factors().all()) {
        if (l->factors().has(f)) {
          throw InputError("amalgam factors share leaf id f"
                           + std::to_string(f));
        }
      }
      for (auto x : r->letters()) {
        if (l->letters().count(x)) {
          throw InputError("amalgam factors share stable letter t"
                           + std::to_string(x));
        }
      }
      t->left_  = std::move(l);
      t->right_ = std::move(r);
      t->factors_.merge(t->left_->factors());
      t->factors_.merge(t->right_->factors());
      t->letters_ = t->left_->letters();
      t->letters_.insert(t->right_->letters().begin(),
                         t->right_->letters().end());
      t->assoc_ = std::move(a);
      t->prepare_association(*t->left_, *t->right_);
      return t;
    }

    static TowerPtr free_product(TowerPtr l, TowerPtr r) {
      return amalgam(std::move(l), std::move(r), Association::trivial());
    }

    static TowerPtr hnn(TowerPtr b, letter_t letter, Association a) {
      auto t = std::shared_ptr<TowerGroup>(new TowerGroup(Kind::hnn));
      if (b->letters().count(letter)) {
        throw InputError("stable letter t" + std::to_string(letter)
                         + " already used in the base");
      }
      t->left_    = std::move(b);
      t->letter_  = letter;
      t->factors_ = t->left_->factors();
      t->letters_ = t->left_->letters();
      t->letters_.insert(letter);
      t->assoc_ = std::move(a);
      t->prepare_association(*t->left_, *t->left_);
      return t;
    }

    static TowerPtr quotient(TowerPtr ambient,
                             std::shared_ptr<WordProblemOracle const> o) {
      auto t      = std::shared_ptr<TowerGroup>(new TowerGroup(Kind::quotient));
      t->left_    = std::move(ambient);
      t->oracle_  = std::move(o);
      t->factors_ = t->left_->factors();
      t->letters_ = t->left_->letters();
      return t;
    }

    ////////////////////////////////////////////////////////////////////////
    // Accessors
    ////////////////////////////////////////////////////////////////////////

    Kind kind() const noexcept {
      return kind_;
    }
    bool is_base() const noexcept {
      return kind_ == Kind::base;
    }
    bool is_amalgam() const noexcept {
      return kind_ == Kind::amalgam;
    }
    bool is_hnn() const noexcept {
      return kind_ == Kind::hnn;
    }
    bool is_quotient() const noexcept {
      return kind_ == Kind::quotient;
    }
    FactorTable const& factors() const noexcept {
      return factors_;
    }
    std::set<letter_t> const& letters() const noexcept {
      return letters_;
    }
    // base: the finite group; otherwise null
    GroupPtr const& group() const noexcept {
      return group_;
    }
    factor_t factor_id() const noexcept {
      return factor_;
    }
    // amalgam: left factor; hnn: base; quotient: ambient
    TowerPtr const& left() const noexcept {
      return left_;
    }
    TowerPtr const& right() const noexcept {
      return right_;
    }
    TowerPtr const& child(Side s) const noexcept {
      return s == Side::left || kind_ == Kind::hnn ? left_ : right_;
    }
    Association const& association() const noexcept {
      return assoc_;
    }
    letter_t letter() const noexcept {
      return letter_;
    }
    std::shared_ptr<WordProblemOracle const> const& oracle() const noexcept {
      return oracle_;
    }

    bool owns(GenRef g) const {
      return g.is_factor() ? factors_.has(g.id()) : letters_.count(g.id()) != 0;
    }
    void check_word(SyllableWord const& w) const {
      for (auto g : w) {
        if (!owns(g)) {
          throw InputError("syllable " + forge::to_string(g)
                           + " references an unknown factor or letter");
        }
        if (g.is_factor() && g.elem() >= factors_.group(g.id()).order()) {
          throw InputError("element index out of range in "
                           + forge::to_string(g));
        }
      }
    }

    factor_t fresh_factor_id() const {
      return factors_.all().empty() ? 1 : factors_.all().rbegin()->first + 1;
    }
    letter_t fresh_letter_id() const {
      return letters_.empty() ? 1 : *letters_.rbegin() + 1;
    }

    std::string describe() const {
      switch (kind_) {
        case Kind::base:
          return "base f" + std::to_string(factor_) + " " + group_->name()
                 + " order " + std::to_string(group_->order());
        case Kind::amalgam:
          return "amalgam (" + left_->describe() + ") * ("
                 + right_->describe() + ") over "
                 + describe_association();
        case Kind::hnn:
          return "hnn t" + std::to_string(letter_) + " over ("
                 + left_->describe() + ") associating "
                 + describe_association();
        case Kind::quotient:
          return "quotient of (" + left_->describe() + ") by "
                 + oracle_->describe();
      }
      return "?";
    }

    ////////////////////////////////////////////////////////////////////////
    // Word problem
    ////////////////////////////////////////////////////////////////////////

    // Empty iff w is the identity.  At amalgam nodes the syllable count of
    // the result is the normal-form length; at HNN nodes the result is
    // Britton reduced.
    SyllableWord reduce(SyllableWord const& w) const {
      check_word(w);
      return reduce_unchecked(w);
    }

    bool is_trivial(SyllableWord const& w) const {
      return reduce(w).empty();
    }
    bool equal(SyllableWord const& u, SyllableWord const& v) const {
      return is_trivial(juxtapose(u, inverse(v)));
    }
    SyllableWord multiply(SyllableWord const& u, SyllableWord const& v) const {
      return reduce(juxtapose(u, v));
    }
    SyllableWord inverse(SyllableWord const& w) const {
      return invert(w, factors_);
    }
    SyllableWord conjugate(SyllableWord const& x, SyllableWord const& y) const {
      return reduce(juxtapose(inverse(y), x, y));  // y^-1 x y
    }
    SyllableWord power(SyllableWord const& w, long k) const {
      return reduce(forge::power(w, k, factors_));
    }

    // Amalgam nodes: reduced segments (maximal runs in one factor, none in
    // the shared subgroup unless the element itself lies there).
    std::vector<Segment> segments(SyllableWord const& w) const {
      require(Kind::amalgam, "segments");
      check_word(w);
      return amalgam_segments(w);
    }

    // Normal-form length: segments at amalgam nodes, stable letters of the
    // Britton-reduced form at HNN nodes, 0 or 1 at bases.
    std::size_t length(SyllableWord const& w) const {
      switch (kind_) {
        case Kind::base:
          return reduce(w).empty() ? 0 : 1;
        case Kind::amalgam:
          return segments(w).size();
        case Kind::hnn:
          return count_letters(reduce(w));
        case Kind::quotient:
          throw Undecidable("normal-form length is not defined in a quotient");
      }
      return 0;
    }

    std::size_t count_letters(SyllableWord const& w) const {
      return static_cast<std::size_t>(std::count_if(
          w.begin(), w.end(), [this](GenRef g) {
            return g.is_letter() && g.id() == letter_;
          }));
    }

    // Side of a syllable at an amalgam node.
    Side side_of(GenRef g) const {
      if (left_->owns(g)) {
        return Side::left;
      }
      if (right_->owns(g)) {
        return Side::right;
      }
      throw InputError("syllable " + forge::to_string(g)
                       + " is in neither factor");
    }

    // Index (finite) or exponent (cyclic) of w in the associated subgroup on
    // side s, or nothing.
    std::optional<long> locate(Side s, SyllableWord const& w) const {
      if (kind_ != Kind::amalgam && kind_ != Kind::hnn) {
        throw InputError("locate needs an amalgam or HNN node");
      }
      return locate_in(s, *child(s), w);
    }

    // Word on side s for a located key.
    SyllableWord shared_word(Side s, long key) const {
      if (assoc_.kind == Association::Kind::finite) {
        return assoc_.list(s)[static_cast<std::size_t>(key)];
      }
      return child(s)->power(assoc_.gen(s), key);
    }

    ////////////////////////////////////////////////////////////////////////
    // Cyclic reduction and orders
    ////////////////////////////////////////////////////////////////////////

    struct CyclicCore {
      SyllableWord conjugator;  // y
      SyllableWord core;        // y^-1 w y
    };

    // A reduced w at an amalgam node is weakly cyclically reduced when its
    // length m is even, or m = 1, or the last and first segments multiply
    // outside the shared subgroup.
    bool is_weakly_cyclically_reduced(SyllableWord const& w) const {
      auto seg = segments(w);
      auto m   = seg.size();
      if (m % 2 == 0 || m == 1) {
        return true;
      }
      auto prod = child(seg.back().side)
                      ->reduce(juxtapose(seg.back().word, seg.front().word));
      return !locate(seg.back().side, prod).has_value();
    }

    // Amalgam: weakly cyclically reduced conjugate.  HNN: cyclically
    // Britton-reduced conjugate.
    CyclicCore cyclic_core(SyllableWord const& w) const {
      if (kind_ == Kind::amalgam) {
        return weakly_cyclic_reduce(w);
      }
      if (kind_ == Kind::hnn) {
        return cyclic_britton_reduce(w);
      }
      throw InputError("cyclic reduction needs an amalgam or HNN node");
    }

    // Conjugates until the length is even or 1, so the core also has
    // minimal length in its conjugacy class.
    CyclicCore weakly_cyclic_reduce(SyllableWord const& w) const {
      require(Kind::amalgam, "weakly_cyclic_reduce");
      CyclicCore out{{}, reduce(w)};
      while (true) {
        auto seg = amalgam_segments(out.core);
        auto m   = seg.size();
        if (m % 2 == 0 || m == 1) {
          return out;
        }
        auto prod = child(seg.back().side)
                        ->reduce(juxtapose(seg.back().word, seg.front().word));
        bool fuse = !locate(seg.back().side, prod).has_value();
        auto const& s1 = seg.front().word;
        out.conjugator = reduce(juxtapose(out.conjugator, s1));
        out.core       = reduce(juxtapose(inverse(s1), out.core, s1));
        if (fuse) {
          // s_m s_1 is a single syllable outside G0: even length now
          return out;
        }
      }
    }

    CyclicCore cyclic_britton_reduce(SyllableWord const& w) const {
      require(Kind::hnn, "cyclic_britton_reduce");
      CyclicCore out{{}, reduce(w)};
      while (count_letters(out.core) > 0) {
        auto const& c = out.core;
        if (!is_own_letter(c.front())) {
          std::size_t k = 0;
          while (!is_own_letter(c[k])) {
            ++k;
          }
          auto g         = c.subword(0, k);
          out.conjugator = reduce(juxtapose(out.conjugator, g));
          out.core       = reduce(juxtapose(inverse(g), c, g));
          continue;
        }
        SyllableWord t{c.front()};
        auto         cand = reduce(juxtapose(inverse(t), c, t));
        if (count_letters(cand) >= count_letters(c)) {
          return out;
        }
        out.conjugator = reduce(juxtapose(out.conjugator, t));
        out.core       = std::move(cand);
      }
      return out;
    }

    // Element order, nothing for infinite order.  Throws Undecidable when
    // the implemented criteria do not apply.
    std::optional<std::size_t> order(SyllableWord const& w) const {
      switch (kind_) {
        case Kind::base: {
          auto r = reduce(w);
          return r.empty() ? 1 : group_->element_order(r.front().elem());
        }
        case Kind::amalgam: {
          auto core = weakly_cyclic_reduce(w).core;
          auto seg  = amalgam_segments(core);
          if (seg.empty()) {
            return 1;
          }
          if (seg.size() >= 2) {
            return std::nullopt;
          }
          return child(seg.front().side)->order(seg.front().word);
        }
        case Kind::hnn: {
          auto core = cyclic_britton_reduce(w).core;
          if (count_letters(core) > 0) {
            return std::nullopt;
          }
          return left_->order(core);
        }
        case Kind::quotient: {
          if (oracle_->is_trivial(w)) {
            return 1;
          }
          if (!left_->is_amalgam()) {
            throw Undecidable("order in a quotient needs an amalgam ambient");
          }
          auto core = left_->weakly_cyclic_reduce(w).core;
          auto seg  = left_->segments(core);
          if (seg.size() == 1) {
            return left_->child(seg.front().side)->order(seg.front().word);
          }
          throw Undecidable("order of a length " + std::to_string(seg.size())
                            + " element in a quotient is not certified");
        }
      }
      return std::nullopt;
    }

    bool is_infinite_order(SyllableWord const& w) const {
      return !order(w).has_value();
    }

    // Some k with w = g^k, or nothing.  Exact at bases, amalgams and HNN
    // nodes: for g = y c y^-1 with c cyclically reduced the length of c^k
    // is |k| times that of c, which fixes k; cores of length 0 recurse into
    // the factor holding them.  Quotients search |k| <= window and throw
    // Undecidable past it.
    std::optional<long> power_exponent(SyllableWord const& g,
                                       SyllableWord const& w,
                                       std::size_t         window = 16) const {
      auto r = reduce(w);
      if (r.empty()) {
        return 0;
      }
      auto n = kind_ == Kind::quotient ? std::optional<std::size_t>{}
                                       : order(g);
      if (n) {
        auto p = reduce(g);
        auto x = SyllableWord{};
        for (std::size_t k = 0; k < *n; ++k, x = multiply(x, p)) {
          if (equal(x, r)) {
            return static_cast<long>(k);
          }
        }
        return std::nullopt;
      }
      auto test = [&](SyllableWord const& c, SyllableWord const& u,
                      std::size_t lu, std::size_t lc) -> std::optional<long> {
        if (lu % lc != 0) {
          return std::nullopt;
        }
        long k = static_cast<long>(lu / lc);
        for (long e : {k, -k}) {
          if (is_trivial(juxtapose(u, power(c, -e)))) {
            return e;
          }
        }
        return std::nullopt;
      };
      switch (kind_) {
        case Kind::base:
          return std::nullopt;
        case Kind::amalgam: {
          auto cc = weakly_cyclic_reduce(g);
          auto u  = conjugate(r, cc.conjugator);
          auto cs = amalgam_segments(cc.core);
          if (cs.size() >= 2) {
            return test(cc.core, u, amalgam_segments(u).size(), cs.size());
          }
          auto us = amalgam_segments(u);
          if (us.size() != 1) {
            return std::nullopt;
          }
          Side        side = cs.front().side;
          auto        seg  = us.front();
          if (seg.side != side) {
            auto key = locate(seg.side, seg.word);
            if (!key) {
              return std::nullopt;
            }
            seg = {side, shared_word(side, *key)};
          }
          return child(side)->power_exponent(cs.front().word, seg.word,
                                             window);
        }
        case Kind::hnn: {
          auto cc = cyclic_britton_reduce(g);
          auto u  = conjugate(r, cc.conjugator);
          auto lc = count_letters(cc.core);
          if (lc > 0) {
            return test(cc.core, u, count_letters(u), lc);
          }
          if (count_letters(u) > 0) {
            return std::nullopt;
          }
          return left_->power_exponent(cc.core, u, window);
        }
        case Kind::quotient: {
          auto ginv = inverse(g);
          SyllableWord up = r, down = r;  // r g^-k and r g^k
          for (long k = 1; k <= static_cast<long>(window); ++k) {
            up   = left_->reduce(juxtapose(up, ginv));
            down = left_->reduce(juxtapose(down, g));
            if (oracle_->is_trivial(up)) {
              return k;
            }
            if (oracle_->is_trivial(down)) {
              return -k;
            }
          }
          throw Undecidable("membership of " + forge::to_string(r)
                            + " in the cyclic subgroup <"
                            + forge::to_string(g) + "> exceeds the window of "
                            + std::to_string(window));
        }
      }
      return std::nullopt;
    }

    ////////////////////////////////////////////////////////////////////////
    // Canonical forms
    ////////////////////////////////////////////////////////////////////////

    // Available at bases, and at amalgam / HNN nodes with finite
    // associations over nodes that have them.
    bool has_canonical() const {
      switch (kind_) {
        case Kind::base:
          return true;
        case Kind::amalgam:
          return assoc_.kind == Association::Kind::finite
                 && left_->has_canonical() && right_->has_canonical();
        case Kind::hnn:
          return assoc_.kind == Association::Kind::finite
                 && left_->has_canonical();
        case Kind::quotient:
          return false;
      }
      return false;
    }

    // Unique word per element.  Amalgams: every segment but the last is the
    // lexicographically least canonical word of its left coset of the
    // shared subgroup, the shared part being pushed right.  HNN nodes:
    // likewise with the cosets of A before t and of B before t^-1.
    SyllableWord canonical(SyllableWord const& w) const {
      if (!has_canonical()) {
        throw InputError("no canonical form at this node");
      }
      check_word(w);
      return canonical_unchecked(w);
    }

    // Amalgam nodes with canonical forms: the segments of the canonical
    // word; all but the last are coset representatives.
    std::vector<Segment> canonical_segments(SyllableWord const& w) const {
      require(Kind::amalgam, "canonical_segments");
      if (!has_canonical()) {
        throw InputError("no canonical form at this node");
      }
      check_word(w);
      return canonical_amalgam_segments(w);
    }

    // Least canonical word of the left coset x G0, x in the factor on side
    // s.
    SyllableWord coset_representative(Side s, SyllableWord const& x) const {
      require(Kind::amalgam, "coset_representative");
      if (!has_canonical()) {
        throw InputError("no canonical form at this node");
      }
      return coset_rep(*child(s), s, child(s)->reduce(x)).first;
    }

    bool is_own_letter(GenRef g) const noexcept {
      return g.is_letter() && g.id() == letter_;
    }

   private:
    explicit TowerGroup(Kind k) : kind_(k) {}

    void require(Kind k, char const* what) const {
      if (kind_ != k) {
        throw InputError(std::string(what) + " is not available at this node");
      }
    }

    std::string describe_association() const {
      if (assoc_.kind == Association::Kind::cyclic) {
        return "<" + forge::to_string(assoc_.left_gen) + "> = <"
               + forge::to_string(assoc_.right_gen) + ">";
      }
      return "subgroup of order " + std::to_string(assoc_.left.size());
    }

    ////////////////////////////////////////////////////////////////////////
    // Association setup
    ////////////////////////////////////////////////////////////////////////

    void prepare_association(TowerGroup const& lc, TowerGroup const& rc) {
      auto& a = assoc_;
      if (a.kind == Association::Kind::cyclic) {
        lc.check_word(a.left_gen);
        rc.check_word(a.right_gen);
        a.left_gen  = lc.reduce(a.left_gen);
        a.right_gen = rc.reduce(a.right_gen);
        auto ol     = lc.order(a.left_gen);
        auto orr    = rc.order(a.right_gen);
        if (ol != orr) {
          throw InputError("cyclic association generators have different "
                           "orders");
        }
        if (ol) {
          // finite cyclic: list the powers explicitly
          std::vector<SyllableWord> l, r;
          for (std::size_t k = 0; k < *ol; ++k) {
            l.push_back(lc.power(a.left_gen, static_cast<long>(k)));
            r.push_back(rc.power(a.right_gen, static_cast<long>(k)));
          }
          auto window = a.window;
          a           = Association::finite(std::move(l), std::move(r));
          a.window    = window;
        } else {
          return;
        }
      }
      if (a.left.size() != a.right.size() || a.left.empty()) {
        throw InputError("associated element lists must be non-empty and "
                         "of equal length");
      }
      for (auto& x : a.left) {
        lc.check_word(x);
        x = lc.reduce(x);
      }
      for (auto& x : a.right) {
        rc.check_word(x);
        x = rc.reduce(x);
      }
      // identity pair first
      std::optional<std::size_t> id;
      for (std::size_t k = 0; k < a.left.size(); ++k) {
        if (a.left[k].empty()) {
          id = k;
          break;
        }
      }
      if (!id || !a.right[*id].empty()) {
        throw InputError("association must pair the identity with the "
                         "identity");
      }
      std::swap(a.left[0], a.left[*id]);
      std::swap(a.right[0], a.right[*id]);
      index_[0] = build_index(lc, a.left);
      index_[1] = build_index(rc, a.right);
      // closed under products, and the same index on both sides
      std::size_t n = a.left.size();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          auto kl = locate_in(Side::left, lc,
                              juxtapose(a.left[i], a.left[j]));
          auto kr = locate_in(Side::right, rc,
                              juxtapose(a.right[i], a.right[j]));
          if (!kl || !kr) {
            throw InputError("associated element list is not a subgroup");
          }
          if (*kl != *kr) {
            throw InputError("association is not an isomorphism (product of "
                             "entries "
                             + std::to_string(i) + " and " + std::to_string(j)
                             + ")");
          }
        }
      }
    }

    struct ListIndex {
      bool                          canonical = false;
      std::map<SyllableWord, long> by_word;  // canonical word -> index
    };

    static ListIndex build_index(TowerGroup const&                child,
                                 std::vector<SyllableWord> const& list) {
      ListIndex ix;
      if (!child.has_canonical()) {
        for (std::size_t i = 0; i < list.size(); ++i) {
          for (std::size_t j = 0; j < i; ++j) {
            if (child.equal(list[i], list[j])) {
              throw InputError("associated element list repeats an element");
            }
          }
        }
        return ix;
      }
      ix.canonical = true;
      for (std::size_t k = 0; k < list.size(); ++k) {
        if (!ix.by_word.emplace(child.canonical_unchecked(list[k]),
                                static_cast<long>(k))
                 .second) {
          throw InputError("associated element list repeats an element");
        }
      }
      return ix;
    }

    std::optional<long> locate_in(Side s, TowerGroup const& child,
                                  SyllableWord const& w) const {
      auto const& a = assoc_;
      if (a.kind == Association::Kind::finite) {
        auto const& ix = index_[static_cast<int>(s)];
        if (ix.canonical) {
          auto it = ix.by_word.find(child.canonical_unchecked(w));
          if (it == ix.by_word.end()) {
            return std::nullopt;
          }
          return it->second;
        }
        auto const& list = a.list(s);
        for (std::size_t k = 0; k < list.size(); ++k) {
          if (child.is_trivial(juxtapose(w, child.inverse(list[k])))) {
            return static_cast<long>(k);
          }
        }
        return std::nullopt;
      }
      return child.power_exponent(a.gen(s), w, a.window);
    }

    ////////////////////////////////////////////////////////////////////////
    // Reduction
    ////////////////////////////////////////////////////////////////////////

    SyllableWord reduce_unchecked(SyllableWord const& w) const {
      switch (kind_) {
        case Kind::base:
          return normalize(w, factors_);
        case Kind::amalgam: {
          SyllableWord out;
          for (auto const& s : amalgam_segments(w)) {
            out.append(s.word);
          }
          return out;
        }
        case Kind::hnn:
          return britton(w);
        case Kind::quotient:
          if (oracle_->is_trivial(w)) {
            return {};
          }
          return left_->reduce(w);
      }
      return {};
    }

    std::vector<Segment> amalgam_segments(SyllableWord const& w) const {
      std::vector<Segment> stack;
      std::optional<long>  carry;  // leading shared element, left side key
      auto const&          syl = w.syllables();

      // Push one run, reduced in its factor.  Loops instead of recursing
      // while merges cascade.
      auto push = [&](Side side, SyllableWord run) {
        while (true) {
          if (stack.empty() && carry) {
            run = child(side)->reduce(
                juxtapose(shared_word(side, convert(Side::left, side, *carry)),
                          run));
            carry.reset();
          }
          if (run.empty()) {
            return;
          }
          if (!stack.empty() && stack.back().side == side) {
            run = child(side)->reduce(juxtapose(stack.back().word, run));
            stack.pop_back();
            continue;
          }
          auto key = locate_in(side, *child(side), run);
          if (!key) {
            stack.push_back({side, std::move(run)});
            return;
          }
          Side o = other(side);
          if (stack.empty()) {
            carry = convert(side, Side::left, *key);
            return;
          }
          // stack top is on the other side: absorb there
          run = child(o)->reduce(juxtapose(stack.back().word,
                                           shared_word(o, convert(side, o,
                                                                  *key))));
          stack.pop_back();
          side = o;
        }
      };

      std::size_t i = 0;
      while (i < syl.size()) {
        Side        s = side_of(syl[i]);
        std::size_t j = i + 1;
        while (j < syl.size() && side_of(syl[j]) == s) {
          ++j;
        }
        push(s, child(s)->reduce_unchecked(w.subword(i, j - i)));
        i = j;
      }
      if (carry && *carry != 0) {
        return {{Side::left, shared_word(Side::left, *carry)}};
      }
      return stack;
    }

    // Keys are shared between sides: same index, same exponent.
    static long convert(Side, Side, long key) {
      return key;
    }

    SyllableWord britton(SyllableWord const& w) const {
      struct Item {
        bool         is_letter;
        int          sign;
        SyllableWord seg;
      };
      std::vector<Item> stack;

      auto push_seg = [&](SyllableWord seg) {
        if (!stack.empty() && !stack.back().is_letter) {
          seg = left_->reduce(juxtapose(stack.back().seg, seg));
          stack.pop_back();
        }
        if (!seg.empty()) {
          stack.push_back({false, 0, std::move(seg)});
        }
      };

      auto push_letter = [&](int e) {
        if (!stack.empty() && stack.back().is_letter
            && stack.back().sign == -e) {
          stack.pop_back();
          return;
        }
        if (stack.size() >= 2 && !stack.back().is_letter
            && stack[stack.size() - 2].is_letter
            && stack[stack.size() - 2].sign == -e) {
          // t^-1 a t with a in A, or t b t^-1 with b in B
          Side from = e == 1 ? Side::left : Side::right;
          auto key  = locate_in(from, *left_, stack.back().seg);
          if (key) {
            auto img = shared_word(other(from), *key);
            stack.pop_back();
            stack.pop_back();
            push_seg(std::move(img));
            return;
          }
        }
        stack.push_back({true, e, {}});
      };

      auto const& syl = w.syllables();
      std::size_t i   = 0;
      while (i < syl.size()) {
        if (is_own_letter(syl[i])) {
          push_letter(syl[i].sign());
          ++i;
          continue;
        }
        std::size_t j = i;
        while (j < syl.size() && !is_own_letter(syl[j])) {
          ++j;
        }
        push_seg(left_->reduce_unchecked(w.subword(i, j - i)));
        i = j;
      }
      SyllableWord out;
      for (auto const& it : stack) {
        if (it.is_letter) {
          out.push_back(GenRef::letter(letter_, it.sign));
        } else {
          out.append(it.seg);
        }
      }
      return out;
    }

    SyllableWord canonical_unchecked(SyllableWord const& w) const {
      switch (kind_) {
        case Kind::base:
          return normalize(w, factors_);
        case Kind::amalgam:
          return canonical_amalgam(w);
        case Kind::hnn:
          return canonical_hnn(w);
        case Kind::quotient:
          break;
      }
      throw InputError("no canonical form at this node");
    }

    // Least canonical word of the coset x * (shared list on side s), and the
    // index of the shared element h with x = rep * h.
    std::pair<SyllableWord, long> coset_rep(TowerGroup const&   c,
                                            Side                s,
                                            SyllableWord const& x) const {
      auto const&                list = assoc_.list(s);
      std::optional<SyllableWord> best;
      long                        best_k = 0;
      for (std::size_t k = 0; k < list.size(); ++k) {
        auto cand = c.canonical_unchecked(juxtapose(x, list[k]));
        if (!best || cand < *best) {
          best   = std::move(cand);
          best_k = static_cast<long>(k);
        }
      }
      // x * list[best_k] = rep, so x = rep * list[best_k]^-1
      auto inv = locate_in(s, c, c.inverse(list[static_cast<std::size_t>(best_k)]));
      return {std::move(*best), *inv};
    }

    std::vector<Segment> canonical_amalgam_segments(
        SyllableWord const& w) const {
      auto seg = amalgam_segments(w);
      if (seg.size() <= 1) {
        for (auto& x : seg) {
          x.word = child(x.side)->canonical_unchecked(x.word);
        }
        return seg;
      }
      std::vector<Segment> out;
      long                 carry = 0;
      for (std::size_t i = 0; i < seg.size(); ++i) {
        Side        s = seg[i].side;
        auto const& c = *child(s);
        auto        x = juxtapose(shared_word(s, carry), seg[i].word);
        if (i + 1 == seg.size()) {
          out.push_back({s, c.canonical_unchecked(x)});
          break;
        }
        auto [rep, h] = coset_rep(c, s, x);
        out.push_back({s, std::move(rep)});
        carry = h;  // same key names the element on the other side
      }
      return out;
    }

    SyllableWord canonical_amalgam(SyllableWord const& w) const {
      SyllableWord out;
      for (auto const& x : canonical_amalgam_segments(w)) {
        out.append(x.word);
      }
      return out;
    }

    SyllableWord canonical_hnn(SyllableWord const& w) const {
      auto r = britton(w);
      // split into g0 t^e1 g1 ... t^en gn
      std::vector<SyllableWord> gs{{}};
      std::vector<int>          es;
      for (auto g : r) {
        if (is_own_letter(g)) {
          es.push_back(g.sign());
          gs.emplace_back();
        } else {
          gs.back().push_back(g);
        }
      }
      SyllableWord out;
      SyllableWord carry;  // element of the base pushed to the right
      for (std::size_t i = 0; i < es.size(); ++i) {
        auto x    = juxtapose(carry, gs[i]);
        Side from = es[i] == 1 ? Side::left : Side::right;
        // x = rep * h with h in A (t) or B (t^-1);  h t^e = t^e phi^e(h)
        auto [rep, h] = coset_rep(*left_, from, x);
        out.append(rep);
        out.push_back(GenRef::letter(letter_, es[i]));
        carry = shared_word(other(from), h);
      }
      out.append(left_->canonical_unchecked(juxtapose(carry, gs.back())));
      return out;
    }

    Kind                                     kind_;
    factor_t                                 factor_ = 0;
    GroupPtr                                 group_;
    TowerPtr                                 left_, right_;
    Association                              assoc_;
    letter_t                                 letter_ = 0;
    std::shared_ptr<WordProblemOracle const> oracle_;
    FactorTable                              factors_;
    std::set<letter_t>                       letters_;
    ListIndex                                index_[2];
  };

  // Leaf ids and letters shifted so a copy can sit beside the original.
  inline SyllableWord shift_ids(SyllableWord const& w, factor_t df,
                                letter_t dl) {
    std::vector<GenRef> out;
    for (auto g : w) {
      out.push_back(g.is_factor() ? GenRef::factor(g.id() + df, g.elem())
                                  : GenRef::letter(g.id() + dl, g.sign()));
    }
    return SyllableWord(std::move(out));
  }

  inline TowerPtr shift_ids(TowerPtr const& t, factor_t df, letter_t dl) {
    auto shift_assoc = [&](Association a) {
      for (auto& x : a.left) {
        x = shift_ids(x, df, dl);
      }
      for (auto& x : a.right) {
        x = shift_ids(x, df, dl);
      }
      a.left_gen  = shift_ids(a.left_gen, df, dl);
      a.right_gen = shift_ids(a.right_gen, df, dl);
      return a;
    };
    switch (t->kind()) {
      case TowerGroup::Kind::base:
        return TowerGroup::base(t->factor_id() + df, t->group());
      case TowerGroup::Kind::amalgam:
        return TowerGroup::amalgam(shift_ids(t->left(), df, dl),
                                   shift_ids(t->right(), df, dl),
                                   shift_assoc(t->association()));
      case TowerGroup::Kind::hnn:
        return TowerGroup::hnn(shift_ids(t->left(), df, dl), t->letter() + dl,
                               shift_assoc(t->association()));
      case TowerGroup::Kind::quotient:
        break;
    }
    throw InputError("quotient nodes cannot be copied");
  }

}  // namespace forge

#endif  // FORGE_TOWER_HPP_
