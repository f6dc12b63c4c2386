// Finite model of the addressed universe: blocks alpha < lambda_plus of
// lambda offsets each, groups whose tracked elements carry addresses,
// strong isomorphism and codes, uniform-poset clause sampling and the two
// single-step density moves.

#ifndef FORGE_UNIVERSE_HPP_
#define FORGE_UNIVERSE_HPP_

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "forge/amalgam.hpp"
#include "forge/errors.hpp"
#include "forge/fingrp.hpp"
#include "forge/tower.hpp"
#include "forge/words.hpp"

namespace forge {

  struct UniverseConfig {
    std::size_t lambda      = 4096;  // offsets per block
    std::size_t lambda_plus = 64;    // number of blocks
  };

  struct Address {
    std::size_t alpha = 0;
    std::size_t i     = 0;

    std::size_t norm() const noexcept {
      return alpha;
    }
    auto operator<=>(Address const&) const = default;
  };

  inline std::string to_string(Address a) {
    return std::to_string(a.alpha) + "." + std::to_string(a.i);
  }

  inline std::string to_string(std::set<std::size_t> const& s) {
    std::string out = "{";
    for (auto it = s.begin(); it != s.end(); ++it) {
      out += (it == s.begin() ? "" : ",") + std::to_string(*it);
    }
    return out + "}";
  }

  // Block of every leaf factor and stable letter.  Missing factors sit in
  // block 0; a missing letter takes the largest block of its associated
  // generators.
  struct NormPolicy {
    std::map<factor_t, std::size_t> factor;
    std::map<letter_t, std::size_t> letter;
  };

  namespace detail {

    inline std::size_t leaf_norm(NormPolicy const& p, factor_t f) {
      auto it = p.factor.find(f);
      return it == p.factor.end() ? 0 : it->second;
    }

    std::size_t word_norm(TowerGroup const& g, SyllableWord const& w,
                          NormPolicy const& p);

    inline std::size_t letter_norm(TowerGroup const& g, NormPolicy const& p) {
      auto it = p.letter.find(g.letter());
      if (it != p.letter.end()) {
        return it->second;
      }
      auto const& a = g.association();
      std::size_t best = 0;
      if (a.kind == Association::Kind::cyclic) {
        best = std::max(word_norm(*g.left(), a.left_gen, p),
                        word_norm(*g.left(), a.right_gen, p));
      } else {
        for (auto const& x : a.left) {
          best = std::max(best, word_norm(*g.left(), x, p));
        }
        for (auto const& x : a.right) {
          best = std::max(best, word_norm(*g.left(), x, p));
        }
      }
      return best;
    }

    // Free products take the largest norm of the syllables; amalgams over a
    // finite shared subgroup the least such maximum over all ways of
    // sliding shared elements across segment boundaries; HNN words the
    // largest norm among letters and base pieces of the reduced form.
    inline std::size_t word_norm(TowerGroup const& g, SyllableWord const& w,
                                 NormPolicy const& p) {
      switch (g.kind()) {
        case TowerGroup::Kind::base: {
          auto r = g.reduce(w);
          return r.empty() ? 0 : leaf_norm(p, g.factor_id());
        }
        case TowerGroup::Kind::quotient:
          return word_norm(*g.left(), g.left()->reduce(w), p);
        case TowerGroup::Kind::hnn: {
          auto        r    = g.reduce(w);
          std::size_t best = 0;
          std::vector<GenRef> piece;
          auto flush = [&] {
            if (!piece.empty()) {
              best = std::max(best, word_norm(*g.left(), SyllableWord(piece), p));
              piece.clear();
            }
          };
          for (auto s : r) {
            if (s.is_letter() && s.id() == g.letter()) {
              flush();
              best = std::max(best, letter_norm(g, p));
            } else {
              piece.push_back(s);
            }
          }
          flush();
          return best;
        }
        case TowerGroup::Kind::amalgam:
          break;
      }
      auto seg = g.segments(w);
      if (seg.empty()) {
        return 0;
      }
      auto const& a = g.association();
      if (a.kind != Association::Kind::finite) {
        std::size_t best = 0;
        for (auto const& s : seg) {
          best = std::max(best, word_norm(*g.child(s.side), s.word, p));
        }
        return best;
      }
      std::size_t const k = a.size();
      if (seg.size() == 1) {
        auto side = seg.front().side;
        auto n    = word_norm(*g.child(side), seg.front().word, p);
        if (auto key = g.locate(side, seg.front().word)) {
          auto other = side == Side::left ? Side::right : Side::left;
          n = std::min(n, word_norm(*g.child(other),
                                    g.shared_word(other, *key), p));
        }
        return n;
      }
      // cost[j]: best maximum so far with shared element j pushed right
      constexpr auto    inf = std::numeric_limits<std::size_t>::max();
      std::vector<std::size_t> cost(k, inf);
      cost[0] = 0;
      for (std::size_t t = 0; t < seg.size(); ++t) {
        auto const& c    = *g.child(seg[t].side);
        auto const& list = a.list(seg[t].side);
        bool        last = t + 1 == seg.size();
        std::vector<std::size_t> next(k, inf);
        for (std::size_t i = 0; i < k; ++i) {
          if (cost[i] == inf) {
            continue;
          }
          for (std::size_t j = 0; j < (last ? 1 : k); ++j) {
            auto piece = c.reduce(
                juxtapose(list[i], seg[t].word, c.inverse(list[j])));
            next[j] = std::min(next[j],
                               std::max(cost[i], word_norm(c, piece, p)));
          }
        }
        cost = std::move(next);
      }
      return cost[0];
    }

    inline SyllableWord element_key(TowerGroup const& g, SyllableWord const& w) {
      return g.has_canonical() ? g.canonical(w) : g.reduce(w);
    }

  }  // namespace detail

  inline std::size_t element_norm(TowerGroup const& g, SyllableWord const& w,
                                  NormPolicy const& p) {
    g.check_word(w);
    return detail::word_norm(g, w, p);
  }

  // A group together with addresses for a finite set of tracked elements.
  // Elements are kept sorted by address; mul and inv record the products
  // and inverses that are again tracked, npos otherwise.
  class UGroup {
   public:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    static UGroup make(TowerPtr g, UniverseConfig cfg, std::set<std::size_t> u,
                       std::vector<SyllableWord> elems,
                       std::vector<Address>      addr) {
      if (elems.size() != addr.size()) {
        throw InputError("every tracked element needs one address");
      }
      UGroup out;
      out.group_ = std::move(g);
      out.cfg_   = cfg;
      out.u_     = std::move(u);
      std::vector<std::size_t> order(elems.size());
      for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
      }
      std::sort(order.begin(), order.end(),
                [&](auto a, auto b) { return addr[a] < addr[b]; });
      for (auto i : order) {
        if (!out.addr_.empty() && out.addr_.back() == addr[i]) {
          throw InputError("address " + to_string(addr[i]) + " used twice");
        }
        out.elems_.push_back(detail::element_key(*out.group_, elems[i]));
        out.addr_.push_back(addr[i]);
      }
      out.build_tables();
      return out;
    }

    TowerPtr const& group() const noexcept {
      return group_;
    }
    UniverseConfig const& config() const noexcept {
      return cfg_;
    }
    std::set<std::size_t> const& u() const noexcept {
      return u_;
    }
    std::size_t size() const noexcept {
      return elems_.size();
    }
    SyllableWord const& element(std::size_t k) const {
      return elems_.at(k);
    }
    Address address(std::size_t k) const {
      return addr_.at(k);
    }
    std::vector<Address> const& addresses() const noexcept {
      return addr_;
    }
    std::size_t mul(std::size_t a, std::size_t b) const {
      return mul_[a * size() + b];
    }
    std::size_t inv(std::size_t a) const {
      return inv_[a];
    }
    std::size_t identity() const noexcept {
      return identity_;
    }

    // Norms actually carried by an element.
    std::set<std::size_t> dom() const {
      std::set<std::size_t> out;
      for (auto a : addr_) {
        out.insert(a.alpha);
      }
      return out;
    }

    std::size_t index_of(Address a) const {
      auto it = std::lower_bound(addr_.begin(), addr_.end(), a);
      return it != addr_.end() && *it == a
                 ? static_cast<std::size_t>(it - addr_.begin())
                 : npos;
    }

    std::size_t find(SyllableWord const& w) const {
      auto k = detail::element_key(*group_, w);
      if (auto it = by_key_.find(k); it != by_key_.end()) {
        return it->second;
      }
      if (!group_->has_canonical()) {
        for (std::size_t i = 0; i < size(); ++i) {
          if (group_->equal(elems_[i], k)) {
            return i;
          }
        }
      }
      return npos;
    }

    std::optional<Address> address_of(SyllableWord const& w) const {
      auto k = find(w);
      return k == npos ? std::nullopt : std::optional<Address>(addr_[k]);
    }

    // Same tables on the tracked elements kept, addresses unchanged.
    UGroup subset(std::vector<bool> const& keep, std::set<std::size_t> u) const {
      UGroup out;
      out.group_ = group_;
      out.cfg_   = cfg_;
      out.u_     = std::move(u);
      std::vector<std::size_t> pos(size(), npos);
      for (std::size_t i = 0; i < size(); ++i) {
        if (keep[i]) {
          pos[i] = out.elems_.size();
          out.elems_.push_back(elems_[i]);
          out.addr_.push_back(addr_[i]);
        }
      }
      auto n = out.size();
      out.mul_.assign(n * n, npos);
      out.inv_.assign(n, npos);
      out.identity_ = identity_ == npos ? npos : pos[identity_];
      for (std::size_t i = 0; i < size(); ++i) {
        if (!keep[i]) {
          continue;
        }
        out.inv_[pos[i]] = inv_[i] == npos ? npos : pos[inv_[i]];
        for (std::size_t j = 0; j < size(); ++j) {
          if (keep[j] && mul(i, j) != npos) {
            out.mul_[pos[i] * n + pos[j]] = pos[mul(i, j)];
          }
        }
      }
      out.index_keys();
      return out;
    }

    // Same tables with every block moved by phi.
    UGroup readdress(std::map<std::size_t, std::size_t> const& phi) const {
      UGroup out = *this;
      out.u_.clear();
      for (auto x : u_) {
        auto it = phi.find(x);
        if (it == phi.end()) {
          throw InputError("block map undefined on " + std::to_string(x));
        }
        out.u_.insert(it->second);
      }
      for (auto& a : out.addr_) {
        a.alpha = phi.at(a.alpha);
      }
      for (std::size_t i = 1; i < out.size(); ++i) {
        if (!(out.addr_[i - 1] < out.addr_[i])) {
          throw InputError("block map is not order preserving");
        }
      }
      return out;
    }

    // Two offsets swapped inside one block: same group, other addressing.
    UGroup swap_offsets(std::size_t a, std::size_t b) const {
      if (addr_.at(a).alpha != addr_.at(b).alpha) {
        throw InputError("swapped elements must share a block");
      }
      auto elems = elems_;
      auto addr  = addr_;
      std::swap(addr[a], addr[b]);
      return make(group_, cfg_, u_, std::move(elems), std::move(addr));
    }

    std::string to_text() const {
      std::ostringstream os;
      os << "ugroup u " << to_string(u_) << " elements " << size() << "\n";
      for (std::size_t i = 0; i < size(); ++i) {
        os << "  " << to_string(addr_[i]) << " "
           << (elems_[i].empty() ? std::string("1") : to_string(elems_[i]))
           << "\n";
      }
      return os.str();
    }

   private:
    void index_keys() {
      by_key_.clear();
      for (std::size_t i = 0; i < size(); ++i) {
        by_key_.emplace(elems_[i], i);
      }
    }

    void build_tables() {
      auto n = size();
      by_key_.clear();
      for (std::size_t i = 0; i < n; ++i) {
        bool fresh = by_key_.emplace(elems_[i], i).second;
        if (fresh && !group_->has_canonical()) {
          for (std::size_t j = 0; j < i && fresh; ++j) {
            fresh = !group_->equal(elems_[i], elems_[j]);
          }
        }
        if (!fresh) {
          throw InputError("element " + to_string(elems_[i])
                           + " tracked at two addresses");
        }
      }
      identity_ = find({});
      mul_.assign(n * n, npos);
      inv_.assign(n, npos);
      for (std::size_t i = 0; i < n; ++i) {
        inv_[i] = find(group_->inverse(elems_[i]));
        for (std::size_t j = 0; j < n; ++j) {
          mul_[i * n + j] = find(group_->multiply(elems_[i], elems_[j]));
        }
      }
    }

    TowerPtr                          group_;
    UniverseConfig                    cfg_;
    std::set<std::size_t>             u_;
    std::vector<SyllableWord>         elems_;
    std::vector<Address>              addr_;
    std::vector<std::size_t>          mul_, inv_;
    std::size_t                       identity_ = npos;
    std::map<SyllableWord, std::size_t> by_key_;
  };

  struct UGroupVerdict {
    struct Violation {
      char        clause;  // 'a', 'b' or 'c'
      std::string detail;
    };
    std::vector<Violation> violations;

    bool ok() const noexcept {
      return violations.empty();
    }
  };

  inline UGroupVerdict check_ugroup(UGroup const& g) {
    UGroupVerdict out;
    auto const&   cfg = g.config();
    auto          bad = [&](char c, std::string d) {
      out.violations.push_back({c, std::move(d)});
    };
    for (std::size_t k = 0; k < g.size(); ++k) {
      auto a = g.address(k);
      if (!g.u().count(a.alpha)) {
        bad('a', "element at " + to_string(a) + " outside u");
      }
      if (a.alpha >= cfg.lambda_plus || a.i >= cfg.lambda) {
        bad('a', "address " + to_string(a) + " outside the universe");
      }
    }
    // boundaries (beta, 0) for beta in u above the least block, and the top
    std::vector<std::size_t> cuts;
    for (auto b : g.u()) {
      if (b != *g.u().begin()) {
        cuts.push_back(b);
      }
    }
    cuts.push_back(std::numeric_limits<std::size_t>::max());
    for (auto cut : cuts) {
      auto below = [&](std::size_t k) {
        return k != UGroup::npos && g.address(k).alpha < cut;
      };
      std::string at = cut == cuts.back() ? std::string("top")
                                          : "(" + std::to_string(cut) + ",0)";
      if (!below(g.identity())) {
        bad('b', "identity not below " + at);
        continue;
      }
      for (std::size_t x = 0; x < g.size(); ++x) {
        if (!below(x)) {
          continue;
        }
        if (!below(g.inv(x))) {
          bad('b', "inverse of " + to_string(g.address(x)) + " not below " + at);
        }
        for (std::size_t y = 0; y < g.size(); ++y) {
          auto z = g.mul(x, y);
          if (below(y) && z != UGroup::npos && !below(z)) {
            bad('b', "product " + to_string(g.address(x)) + "*"
                         + to_string(g.address(y)) + " leaves " + at);
          }
        }
      }
    }
    auto d = g.dom();
    for (auto b : g.u()) {
      if (!d.count(b)) {
        bad('c', "block " + std::to_string(b) + " of u holds no element");
      }
    }
    return out;
  }

  // Every block given by norm, next free offsets, identity at 0.0.
  // New elements come after the base ones in each block, ordered by
  // syllable length and then by word.
  inline UGroup extend_addresses(
      UGroup const* base, TowerPtr g, UniverseConfig cfg,
      std::set<std::size_t> u,
      std::vector<std::pair<SyllableWord, std::size_t>> fresh) {
    std::vector<SyllableWord> elems;
    std::vector<Address>      addr;
    std::map<std::size_t, std::size_t> next;
    std::set<SyllableWord>    seen;
    if (base) {
      for (std::size_t k = 0; k < base->size(); ++k) {
        auto key = detail::element_key(*g, base->element(k));
        seen.insert(key);
        elems.push_back(key);
        addr.push_back(base->address(k));
        auto& n = next[base->address(k).alpha];
        n       = std::max(n, base->address(k).i + 1);
      }
      u.insert(base->u().begin(), base->u().end());
    }
    std::vector<std::pair<SyllableWord, std::size_t>> todo;
    for (auto& [w, alpha] : fresh) {
      auto key = detail::element_key(*g, w);
      if (seen.insert(key).second) {
        todo.emplace_back(std::move(key), alpha);
      }
    }
    std::sort(todo.begin(), todo.end(), [](auto const& a, auto const& b) {
      return std::tuple(a.first.size(), a.first) < std::tuple(b.first.size(), b.first);
    });
    for (auto& [w, alpha] : todo) {
      if (!u.count(alpha)) {
        throw InputError("element " + (w.empty() ? std::string("1") : to_string(w))
                         + " has norm " + std::to_string(alpha) + " outside u");
      }
      if (alpha >= cfg.lambda_plus) {
        throw InputError("block " + std::to_string(alpha) + " beyond lambda_plus");
      }
      auto& n = next[alpha];
      if (n >= cfg.lambda) {
        throw BudgetExceeded("block " + std::to_string(alpha)
                             + " overflows its " + std::to_string(cfg.lambda)
                             + " offsets");
      }
      elems.push_back(std::move(w));
      addr.push_back({alpha, n++});
    }
    return UGroup::make(std::move(g), cfg, std::move(u), std::move(elems),
                        std::move(addr));
  }

  // Tracked set: the given words, their inverses and the identity.
  inline UGroup assign_addresses(TowerPtr g, std::vector<SyllableWord> const& tracked,
                                 std::set<std::size_t> u, NormPolicy const& policy,
                                 UniverseConfig cfg = {}) {
    if (!u.count(0)) {
      throw InputError("u must contain block 0");
    }
    std::vector<std::pair<SyllableWord, std::size_t>> fresh{{SyllableWord{}, 0}};
    for (auto const& w : tracked) {
      auto n = element_norm(*g, w, policy);
      fresh.emplace_back(w, n);
      fresh.emplace_back(g->inverse(w), n);
    }
    auto out = extend_addresses(nullptr, g, cfg, u, std::move(fresh));
    for (auto b : out.u()) {
      if (!out.dom().count(b)) {
        throw InputError("block " + std::to_string(b)
                         + " of u holds no tracked element");
      }
    }
    return out;
  }

  // Closure of the generators under products, at most cap elements.
  inline std::vector<SyllableWord> tracked_closure(TowerGroup const& g,
                                                   std::vector<SyllableWord> gens,
                                                   std::size_t cap = 4096) {
    std::set<SyllableWord>    seen{detail::element_key(g, {})};
    std::vector<SyllableWord> out{{}};
    for (std::size_t k = 0; k < out.size(); ++k) {
      for (auto const& s : gens) {
        auto x = detail::element_key(g, g.multiply(out[k], s));
        if (seen.insert(x).second) {
          if (out.size() >= cap) {
            throw BudgetExceeded("tracked closure exceeds "
                                 + std::to_string(cap) + " elements");
          }
          out.push_back(std::move(x));
        }
      }
    }
    return out;
  }

  // Every element of every leaf factor, as single syllables.
  inline std::vector<SyllableWord> leaf_elements(TowerGroup const& g) {
    std::vector<SyllableWord> out;
    for (auto const& [f, grp] : g.factors().all()) {
      for (elem_t e = 0; e < grp->order(); ++e) {
        if (e != grp->identity()) {
          out.push_back(SyllableWord({GenRef::factor(f, e)}));
        }
      }
    }
    return out;
  }

  // Strong isomorphism: the only order preserving bijection between the
  // address sets is the one matching positions, so it suffices to compare
  // offsets and the tables position by position.  Blocks need not map to
  // blocks.
  struct StrongIso {
    std::vector<std::pair<Address, Address>> pairs;
  };

  inline std::optional<StrongIso> is_strong_iso(UGroup const& a, UGroup const& b) {
    if (a.size() != b.size()) {
      return std::nullopt;
    }
    StrongIso w;
    for (std::size_t k = 0; k < a.size(); ++k) {
      auto x = a.address(k), y = b.address(k);
      if (x.i != y.i) {
        return std::nullopt;
      }
      w.pairs.emplace_back(x, y);
    }
    if (a.identity() != b.identity()) {
      return std::nullopt;
    }
    for (std::size_t x = 0; x < a.size(); ++x) {
      if (a.inv(x) != b.inv(x)) {
        return std::nullopt;
      }
      for (std::size_t y = 0; y < a.size(); ++y) {
        if (a.mul(x, y) != b.mul(x, y)) {
          return std::nullopt;
        }
      }
    }
    return w;
  }

  struct Code {
    std::size_t           cod = 0;
    std::set<std::size_t> dom;

    auto operator<=>(Code const&) const = default;
  };

  inline std::string to_string(Code const& c) {
    return "code " + std::to_string(c.cod) + " dom " + to_string(c.dom);
  }

  // Per-run enumeration of strong isomorphism classes in order of first
  // registration.  Registration is serialized; lookups of existing
  // classes are read-only on the representatives.
  class CodeRegistry {
   public:
    Code code(UGroup const& g) {
      std::lock_guard lock(m_);
      for (std::size_t k = 0; k < reps_.size(); ++k) {
        if (is_strong_iso(reps_[k], g)) {
          return {k, g.u()};
        }
      }
      reps_.push_back(g);
      return {reps_.size() - 1, g.u()};
    }
    std::size_t size() const {
      std::lock_guard lock(m_);
      return reps_.size();
    }
    UGroup const& representative(std::size_t cod) const {
      std::lock_guard lock(m_);
      return reps_.at(cod);
    }

   private:
    mutable std::mutex  m_;
    std::vector<UGroup> reps_;
  };

  // a <= b: every address of a is tracked in b and the recorded products,
  // inverses and identity agree.
  inline bool is_sub_ugroup(UGroup const& a, UGroup const& b) {
    std::vector<std::size_t> to(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      to[k] = b.index_of(a.address(k));
      if (to[k] == UGroup::npos) {
        return false;
      }
    }
    if (!std::includes(b.u().begin(), b.u().end(), a.u().begin(), a.u().end())) {
      return false;
    }
    auto map = [&](std::size_t k) { return k == UGroup::npos ? k : to[k]; };
    if (a.identity() == UGroup::npos || map(a.identity()) != b.identity()) {
      return false;
    }
    for (std::size_t x = 0; x < a.size(); ++x) {
      if (a.inv(x) != UGroup::npos && map(a.inv(x)) != b.inv(to[x])) {
        return false;
      }
      for (std::size_t y = 0; y < a.size(); ++y) {
        if (a.mul(x, y) != UGroup::npos && map(a.mul(x, y)) != b.mul(to[x], to[y])) {
          return false;
        }
      }
    }
    return true;
  }

  inline bool same_structure(UGroup const& a, UGroup const& b) {
    return a.u() == b.u() && a.addresses() == b.addresses() && is_sub_ugroup(a, b)
           && is_sub_ugroup(b, a);
  }

  // Tracked elements with norm in blocks, on domain blocks.
  inline UGroup restrict_to(UGroup const& g, std::set<std::size_t> const& blocks) {
    std::vector<bool> keep(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
      keep[k] = blocks.count(g.address(k).alpha) != 0;
    }
    std::set<std::size_t> u;
    std::set_intersection(g.u().begin(), g.u().end(), blocks.begin(), blocks.end(),
                          std::inserter(u, u.end()));
    return g.subset(keep, std::move(u));
  }

  inline UGroup restrict_below(UGroup const& g, std::size_t alpha) {
    std::set<std::size_t> blocks;
    for (auto b : g.u()) {
      if (b < alpha) {
        blocks.insert(b);
      }
    }
    return restrict_to(g, blocks);
  }

  // Cut points alpha > 0 at which restriction changes the domain, the last
  // one keeping everything.
  inline std::vector<std::size_t> restriction_points(UGroup const& g) {
    std::vector<std::size_t> out;
    for (auto b : g.u()) {
      if (b > 0) {
        out.push_back(b);
      }
    }
    out.push_back(g.u().empty() ? 1 : *g.u().rbegin() + 1);
    return out;
  }

  namespace detail {

    // Leaves of a tower built from finite bases by free products only.
    inline bool free_leaves(TowerPtr const& t, std::vector<TowerPtr>& out) {
      if (t->is_base()) {
        out.push_back(t);
        return true;
      }
      if (t->is_amalgam() && t->association().is_trivial_subgroup()) {
        return free_leaves(t->left(), out) && free_leaves(t->right(), out);
      }
      return false;
    }

    inline TowerPtr free_product_of(std::vector<TowerPtr> const& leaves) {
      auto out = leaves.front();
      for (std::size_t k = 1; k < leaves.size(); ++k) {
        out = TowerGroup::free_product(out, leaves[k]);
      }
      return out;
    }

  }  // namespace detail

  struct PushoutResult {
    std::optional<UGroup> group;
    std::string           note;  // why no witness was built
  };

  // Amalgam of p and q over the part of p below alpha, for groups that are
  // free products of finite leaves with every leaf fully tracked.  Leaves
  // of q met below alpha are identified with the leaves of p at the same
  // addresses; the others are copied under fresh ids.
  inline PushoutResult free_pushout(UGroup const& p, UGroup const& q,
                                    std::size_t alpha) {
    std::vector<TowerPtr> lp, lq;
    if (!detail::free_leaves(p.group(), lp) || !detail::free_leaves(q.group(), lq)) {
      return {std::nullopt, "not a free product of finite leaves"};
    }
    factor_t fresh = std::max(p.group()->fresh_factor_id(),
                              q.group()->fresh_factor_id());
    std::map<factor_t, std::pair<factor_t, std::vector<elem_t>>> rename;
    std::vector<TowerPtr> leaves = lp;
    for (auto const& leaf : lq) {
      auto const& g = *leaf->group();
      std::vector<elem_t> to(g.order(), 0);
      std::size_t below = 0, total = 0;
      std::optional<factor_t> target;
      bool consistent = true;
      for (elem_t e = 0; e < g.order(); ++e) {
        if (e == g.identity()) {
          to[e] = e;
          continue;
        }
        ++total;
        auto a = q.address_of(SyllableWord({GenRef::factor(leaf->factor_id(), e)}));
        auto k = a && a->alpha < alpha ? p.index_of(*a) : UGroup::npos;
        if (k == UGroup::npos) {
          continue;
        }
        ++below;
        auto const& w = p.element(k);
        if (w.size() != 1 || (target && *target != w.front().id())) {
          consistent = false;
          continue;
        }
        target = w.front().id();
        to[e]  = w.front().elem();
      }
      if (below == 0) {
        rename[leaf->factor_id()] = {fresh, {}};
        leaves.push_back(TowerGroup::base(fresh++, leaf->group()));
      } else if (below == total && consistent) {
        rename[leaf->factor_id()] = {*target, std::move(to)};
      } else {
        return {std::nullopt, "leaf f" + std::to_string(leaf->factor_id())
                                  + " only partly below the cut"};
      }
    }
    auto star = detail::free_product_of(leaves);
    auto move = [&](SyllableWord const& w) {
      std::vector<GenRef> out;
      for (auto s : w) {
        auto const& [f, map] = rename.at(s.id());
        out.push_back(GenRef::factor(f, map.empty() ? s.elem() : map[s.elem()]));
      }
      return SyllableWord(std::move(out));
    };
    std::vector<SyllableWord> elems;
    std::vector<Address>      addr;
    for (std::size_t k = 0; k < p.size(); ++k) {
      elems.push_back(p.element(k));
      addr.push_back(p.address(k));
    }
    for (std::size_t k = 0; k < q.size(); ++k) {
      auto w = move(q.element(k));
      auto j = p.index_of(q.address(k));
      if (j != UGroup::npos) {
        if (!star->equal(w, p.element(j))) {
          return {std::nullopt, "address " + to_string(q.address(k))
                                    + " names different elements"};
        }
        continue;
      }
      elems.push_back(std::move(w));
      addr.push_back(q.address(k));
    }
    auto u = p.u();
    u.insert(q.u().begin(), q.u().end());
    try {
      return {UGroup::make(star, p.config(), std::move(u), std::move(elems),
                           std::move(addr)),
              {}};
    } catch (InputError const& e) {
      return {std::nullopt, e.what()};
    }
  }

  struct ClauseResult {
    std::size_t cases = 0, failures = 0, skipped = 0;
    std::string note;  // first failure, or why a clause is vacuous
  };

  struct PosetReport {
    std::size_t                 members = 0;
    std::map<int, ClauseResult> clause;        // 1..8
    std::size_t                 eligible = 0;  // amalgamation triples
    std::size_t                 monotone_cases = 0, monotone_failures = 0;

    bool passes() const {
      for (auto const& [k, c] : clause) {
        if (c.failures) {
          return false;
        }
      }
      return true;
    }

    std::string to_text() const {
      std::ostringstream os;
      os << "members: " << members << "\n";
      for (auto const& [k, c] : clause) {
        os << "clause " << k << ": cases " << c.cases << " failures "
           << c.failures << " skipped " << c.skipped;
        if (!c.note.empty()) {
          os << " note " << c.note;
        }
        os << "\n";
      }
      os << "amalgamation eligible: " << eligible << "\n";
      os << "monotone coding: cases " << monotone_cases << " failures "
         << monotone_failures << "\n";
      os << "verdict: " << (passes() ? "passes" : "fails") << "\n";
      return os.str();
    }
  };

  namespace detail {

    inline std::optional<std::size_t> member_like(std::vector<UGroup> const& fam,
                                                  UGroup const&              g) {
      for (std::size_t k = 0; k < fam.size(); ++k) {
        if (same_structure(fam[k], g)) {
          return k;
        }
      }
      return std::nullopt;
    }

    // Order isomorphisms of u fixing block 0: shift by one, doubling, and
    // a seeded random increasing map.
    inline std::vector<std::map<std::size_t, std::size_t>> block_maps(
        std::set<std::size_t> const& u, std::size_t limit, std::mt19937_64& rng) {
      std::vector<std::map<std::size_t, std::size_t>> out;
      auto make = [&](auto f) {
        std::map<std::size_t, std::size_t> m;
        for (auto b : u) {
          auto c = b == 0 ? 0 : f(b);
          if (c >= limit) {
            return;
          }
          m[b] = c;
        }
        out.push_back(std::move(m));
      };
      make([](std::size_t b) { return b + 1; });
      make([](std::size_t b) { return 2 * b; });
      std::vector<std::size_t> pool;
      for (std::size_t b = 1; b < limit; ++b) {
        pool.push_back(b);
      }
      std::shuffle(pool.begin(), pool.end(), rng);
      auto n = u.size() - (u.count(0) ? 1 : 0);
      if (n <= pool.size()) {
        std::vector<std::size_t> pick(pool.begin(), pool.begin() + static_cast<long>(n));
        std::sort(pick.begin(), pick.end());
        std::size_t k = 0;
        make([&](std::size_t) { return pick[k++]; });
      }
      return out;
    }

  }  // namespace detail

  // Adds every restriction below a cut point until the family is closed.
  inline std::vector<UGroup> close_under_restrictions(std::vector<UGroup> fam) {
    for (std::size_t k = 0; k < fam.size(); ++k) {
      for (auto a : restriction_points(fam[k])) {
        auto r = restrict_below(fam[k], a);
        if (!detail::member_like(fam, r)) {
          fam.push_back(std::move(r));
        }
      }
    }
    return fam;
  }

  // Clauses 1, 2, 4, 7 over every member and pair, 3 and 6 over the
  // restriction chains, 8 on sampled eligible triples.  Clause 5 needs a
  // limit cut and is vacuous on finitely many blocks.
  inline PosetReport poset_axiom_probe(std::vector<UGroup> const& input,
                                       CodeRegistry& registry, std::size_t samples,
                                       std::uint64_t seed) {
    std::mt19937_64     rng(seed);
    std::vector<UGroup> fam;
    for (auto const& g : input) {
      if (!detail::member_like(fam, g)) {
        fam.push_back(g);
      }
    }
    auto const  N = fam.size();
    PosetReport rep;
    rep.members = N;
    // smaller members first, so a fresh registry codes monotonically
    std::vector<std::size_t> by_size(N);
    for (std::size_t k = 0; k < N; ++k) {
      by_size[k] = k;
    }
    std::stable_sort(by_size.begin(), by_size.end(), [&](auto a, auto b) {
      return fam[a].size() < fam[b].size();
    });
    std::vector<Code> code(N);
    for (auto k : by_size) {
      code[k] = registry.code(fam[k]);
    }
    std::vector<std::vector<bool>> leq(N, std::vector<bool>(N));
    for (std::size_t a = 0; a < N; ++a) {
      for (std::size_t b = 0; b < N; ++b) {
        leq[a][b] = is_sub_ugroup(fam[a], fam[b]);
      }
    }
    // restriction index of every (member, cut)
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> cut(N);
    for (std::size_t p = 0; p < N; ++p) {
      for (auto a : restriction_points(fam[p])) {
        auto k = detail::member_like(fam, restrict_below(fam[p], a));
        if (!k) {
          throw InputError("family not restriction-closed: member "
                           + std::to_string(p) + " below block "
                           + std::to_string(a));
        }
        cut[p].emplace_back(a, *k);
      }
    }
    auto fail = [](ClauseResult& c, std::string why) {
      if (!c.failures++) {
        c.note = std::move(why);
      }
    };

    auto& c1 = rep.clause[1];
    for (std::size_t a = 0; a < N; ++a) {
      for (std::size_t b = 0; b < N; ++b) {
        if (leq[a][b]) {
          ++c1.cases;
          if (!std::includes(fam[b].u().begin(), fam[b].u().end(),
                             fam[a].u().begin(), fam[a].u().end())) {
            fail(c1, std::to_string(a) + " <= " + std::to_string(b));
          }
          ++rep.monotone_cases;
          rep.monotone_failures += code[a].cod > code[b].cod;
        }
      }
    }

    auto& c2 = rep.clause[2];
    for (std::size_t r = 0; r < N; ++r) {
      std::map<std::set<std::size_t>, std::optional<UGroup>> made;
      for (std::size_t p = 0; p < N; ++p) {
        for (std::size_t q = p; q < N; ++q) {
          if (!leq[p][r] || !leq[q][r]) {
            continue;
          }
          ++c2.cases;
          auto s = fam[p].u();
          s.insert(fam[q].u().begin(), fam[q].u().end());
          auto& w = made[s];
          if (!w) {
            w = restrict_to(fam[r], s);
          }
          if (!check_ugroup(*w).ok() || w->u() != s || !is_sub_ugroup(fam[p], *w)
              || !is_sub_ugroup(fam[q], *w) || !is_sub_ugroup(*w, fam[r])) {
            fail(c2, "no join of " + std::to_string(p) + "," + std::to_string(q)
                         + " below " + std::to_string(r));
          }
        }
      }
    }

    auto& c3 = rep.clause[3];
    auto& c6 = rep.clause[6];
    for (std::size_t p = 0; p < N; ++p) {
      std::vector<std::size_t> chain;
      for (auto [a, k] : cut[p]) {
        chain.push_back(k);
      }
      ++c3.cases;
      std::set<std::size_t> uni;
      bool ok = true;
      for (std::size_t i = 0; i < chain.size(); ++i) {
        uni.insert(fam[chain[i]].u().begin(), fam[chain[i]].u().end());
        ok = ok && (i == 0 || leq[chain[i - 1]][chain[i]]);
      }
      auto top = chain.back();
      ok = ok && uni == fam[top].u();
      for (std::size_t b = 0; b < N && ok; ++b) {
        bool upper = true;
        for (auto k : chain) {
          upper = upper && leq[k][b];
        }
        ok = !upper || leq[top][b];
      }
      if (!ok) {
        fail(c3, "restriction chain of " + std::to_string(p));
      }
      for (auto [a, k] : cut[p]) {
        ++c6.cases;
        bool inc = true;
        std::optional<std::size_t> prev;
        for (auto m : chain) {
          auto r = detail::member_like(fam, restrict_below(fam[m], a));
          inc    = inc && r && (!prev || leq[*prev][*r]);
          prev   = r;
        }
        if (!inc || !prev || !same_structure(fam[*prev], restrict_below(fam[top], a))) {
          fail(c6, "chain of " + std::to_string(p) + " cut at " + std::to_string(a));
        }
      }
    }

    auto& c4 = rep.clause[4];
    for (std::size_t p = 0; p < N; ++p) {
      for (auto [a, k] : cut[p]) {
        ++c4.cases;
        auto want = restrict_below(fam[p], a).u();
        bool ok   = leq[k][p] && fam[k].u() == want;
        for (std::size_t j = 0; j < N && ok; ++j) {
          if (leq[j][p] && fam[j].u() == want) {
            ok = leq[j][k];
          }
        }
        if (!ok) {
          fail(c4, "restriction of " + std::to_string(p) + " below "
                       + std::to_string(a));
        }
      }
    }

    auto& c5 = rep.clause[5];
    c5.note  = "vacuous: no limit cut among finitely many blocks";

    auto& c7 = rep.clause[7];
    for (std::size_t p = 0; p < N; ++p) {
      for (auto const& phi :
           detail::block_maps(fam[p].u(), fam[p].config().lambda_plus, rng)) {
        ++c7.cases;
        auto img = fam[p].readdress(phi);
        bool ok  = check_ugroup(img).ok() && registry.code(img).cod == code[p].cod;
        for (std::size_t q = 0; q < N && ok; ++q) {
          if (leq[q][p]) {
            std::map<std::size_t, std::size_t> sub;
            for (auto b : fam[q].u()) {
              sub[b] = phi.at(b);
            }
            ok = is_sub_ugroup(fam[q].readdress(sub), img);
          }
        }
        if (!ok) {
          fail(c7, "image of " + std::to_string(p));
        }
      }
    }

    auto& c8 = rep.clause[8];
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> triples;
    for (std::size_t p = 0; p < N; ++p) {
      for (auto [a, k] : cut[p]) {
        auto low = fam[k].u();
        for (std::size_t q = 0; q < N; ++q) {
          if (!leq[k][q]) {
            continue;
          }
          std::set<std::size_t> both;
          std::set_intersection(fam[p].u().begin(), fam[p].u().end(),
                                fam[q].u().begin(), fam[q].u().end(),
                                std::inserter(both, both.end()));
          if (both == low) {
            triples.emplace_back(p, q, a);
          }
        }
      }
    }
    rep.eligible = triples.size();
    for (std::size_t s = 0; s < samples && !triples.empty(); ++s) {
      auto [p, q, a] = triples[rng() % triples.size()];
      auto r         = free_pushout(fam[p], fam[q], a);
      if (!r.group) {
        ++c8.skipped;
        if (c8.note.empty()) {
          c8.note = r.note;
        }
        continue;
      }
      ++c8.cases;
      if (!check_ugroup(*r.group).ok() || !is_sub_ugroup(fam[p], *r.group)
          || !is_sub_ugroup(fam[q], *r.group)) {
        fail(c8, "amalgam of " + std::to_string(p) + "," + std::to_string(q)
                     + " over block " + std::to_string(a));
      }
    }
    return rep;
  }

  // Seeded family: free products of fully tracked finite leaves, one leaf
  // group per block, some with a tracked mixed word; re-addressed copies
  // and offset swaps of earlier members.  Not yet restriction-closed.
  inline std::vector<UGroup> generate_family(std::uint64_t seed, std::size_t count,
                                             std::size_t blocks = 6,
                                             UniverseConfig cfg  = {}) {
    std::mt19937_64       rng(seed);
    std::vector<GroupPtr> pool{share(cyclic_group(2)), share(cyclic_group(3)),
                               share(symmetric_group(3)), share(cyclic_group(4)),
                               share(direct_product(cyclic_group(2), cyclic_group(2)))};
    std::vector<TowerPtr> leaf;
    NormPolicy            policy;
    for (std::size_t b = 0; b < blocks; ++b) {
      auto f = static_cast<factor_t>(b + 1);
      leaf.push_back(TowerGroup::base(f, pool[rng() % pool.size()]));
      policy.factor[f] = b;
    }
    std::vector<UGroup> out;
    while (out.size() < count) {
      auto kind = out.size() % 5;
      if (kind == 3 && !out.empty()) {
        auto const& src = out[rng() % out.size()];
        auto        maps = detail::block_maps(src.u(), cfg.lambda_plus, rng);
        out.push_back(src.readdress(maps.back()));
        continue;
      }
      if (kind == 4 && !out.empty()) {
        auto const& src = out[rng() % out.size()];
        std::map<std::size_t, std::vector<std::size_t>> by_block;
        for (std::size_t k = 0; k < src.size(); ++k) {
          if (k != src.identity()) {
            by_block[src.address(k).alpha].push_back(k);
          }
        }
        std::vector<std::vector<std::size_t>> many;
        for (auto& [b, ks] : by_block) {
          if (ks.size() >= 2) {
            many.push_back(ks);
          }
        }
        if (!many.empty()) {
          auto const& ks = many[rng() % many.size()];
          out.push_back(src.swap_offsets(ks[0], ks[1 + rng() % (ks.size() - 1)]));
          continue;
        }
      }
      std::set<std::size_t> u{0};
      auto extra = rng() % 4;
      for (std::size_t k = 0; k < extra; ++k) {
        u.insert(1 + rng() % (blocks - 1));
      }
      std::vector<TowerPtr> parts;
      for (auto b : u) {
        parts.push_back(leaf[b]);
      }
      auto g       = detail::free_product_of(parts);
      auto tracked = leaf_elements(*g);
      if (u.size() >= 2 && rng() % 2) {
        auto a = *std::next(u.begin(), static_cast<long>(rng() % u.size()));
        auto b = *std::next(u.begin(), static_cast<long>(rng() % u.size()));
        if (a != b) {
          auto x = GenRef::factor(leaf[a]->factor_id(), 1);
          auto y = GenRef::factor(leaf[b]->factor_id(), 1);
          tracked.push_back(SyllableWord({x, y}));
        }
      }
      out.push_back(assign_addresses(g, tracked, u, policy, cfg));
    }
    return out;
  }

  struct DomainStep {
    UGroup group;
    bool   unchanged = false;
  };

  // Adjoins a copy of h addressed into block alpha unless alpha is already
  // in the domain.
  inline DomainStep density_domain_step(UGroup const& q, std::size_t alpha,
                                        std::set<std::size_t> const& v, GroupPtr h) {
    if (!v.count(alpha)) {
      throw InputError("target block " + std::to_string(alpha)
                       + " outside the allowed domain");
    }
    if (q.u().count(alpha)) {
      return {q, true};
    }
    auto leaf = TowerGroup::base(q.group()->fresh_factor_id(), std::move(h));
    auto g    = TowerGroup::free_product(q.group(), leaf);
    std::vector<std::pair<SyllableWord, std::size_t>> fresh;
    for (auto const& w : leaf_elements(*leaf)) {
      fresh.emplace_back(w, alpha);
    }
    auto u = q.u();
    u.insert(alpha);
    return {extend_addresses(&q, g, q.config(), std::move(u), std::move(fresh)),
            false};
  }

  // Product of the conjugates g^-1 y g over the trace.
  inline SyllableWord conjugate_product(TowerGroup const& g, SyllableWord const& y,
                                        std::vector<SyllableWord> const& trace) {
    SyllableWord out;
    for (auto const& c : trace) {
      out = juxtapose(out, g.inverse(c), y, c);
    }
    return g.reduce(out);
  }

  struct SimplicityStep {
    UGroup                    group;
    int                       kind = 0;  // 0 already, 1 both infinite, 2 x finite, 3 y finite
    std::vector<SyllableWord> trace;     // x = prod over g of g^-1 y g
    std::vector<std::string>  log;
  };

  // Extends G so that x is a product of conjugates of y.  Finite y is
  // first traded for w = y y^c with c a fresh involution; finite x is
  // split as (x z)(z^-1) with both parts of infinite order, z = w when
  // that works and z = d w for a further fresh involution d otherwise.
  // Every part of infinite order is then made conjugate to w by a fresh
  // stable letter placed in the block of x.
  inline SimplicityStep density_simplicity_step(UGroup const& G, SyllableWord const& x,
                                                SyllableWord const& y) {
    auto T = G.group();
    auto ix = G.find(x), iy = G.find(y);
    if (ix == UGroup::npos || iy == UGroup::npos) {
      throw InputError("x and y must be tracked elements");
    }
    if (T->is_trivial(x) || T->is_trivial(y)) {
      throw InputError("x and y must be nontrivial");
    }
    auto infinite = [&](TowerGroup const& g, SyllableWord const& w) {
      try {
        return g.is_infinite_order(w);
      } catch (Undecidable const& e) {
        throw Undecidable(std::string("order certification failure: ") + e.what());
      }
    };
    bool x_inf = infinite(*T, x), y_inf = infinite(*T, y);
    auto nx = G.address(ix).alpha;
    SimplicityStep out{G, 0, {}, {}};
    for (std::size_t k = 0; k < G.size(); ++k) {
      if (T->equal(x, T->conjugate(y, G.element(k)))) {
        out.trace = {G.element(k)};
        out.log.push_back("x is the conjugate of y by " + to_string(G.address(k)));
        return out;
      }
    }
    out.kind = !y_inf ? 3 : x_inf ? 1 : 2;
    std::vector<std::pair<SyllableWord, std::size_t>> fresh;
    auto involution = [&](char const* name) {
      auto f = T->fresh_factor_id();
      T      = TowerGroup::free_product(T, TowerGroup::base(f, cyclic_group(2)));
      SyllableWord c({GenRef::factor(f, 1)});
      fresh.emplace_back(c, nx);
      out.log.push_back(std::string("adjoined involution ") + name + " = "
                        + to_string(c));
      return c;
    };
    // w^g as conjugates of y
    std::vector<SyllableWord> w_parts{{}};
    SyllableWord              w = y;
    if (!y_inf) {
      auto c  = involution("c");
      w       = T->multiply(y, T->conjugate(y, c));
      w_parts = {{}, c};
    }
    std::vector<SyllableWord> parts{x};
    if (!x_inf) {
      auto a = T->multiply(x, w);
      if (!infinite(*T, a)) {
        auto d = involution("d");
        parts  = {T->multiply(x, juxtapose(d, w)), T->inverse(juxtapose(d, w))};
      } else {
        parts = {a, T->inverse(w)};
      }
    }
    for (auto const& part : parts) {
      SyllableWord g;
      if (!T->equal(part, w)) {
        auto step = make_conjugate(T, w, part);
        T         = step.group;
        g         = SyllableWord({GenRef::letter(step.letter, 1)});
        fresh.emplace_back(g, nx);
        fresh.emplace_back(T->inverse(g), nx);
        out.log.push_back("stable letter " + to_string(g) + " conjugates w to "
                          + to_string(part));
      }
      for (auto const& h : w_parts) {
        out.trace.push_back(T->reduce(juxtapose(h, g)));
      }
    }
    if (!T->equal(x, conjugate_product(*T, y, out.trace))) {
      throw Error("conjugate trace does not replay");
    }
    out.group = extend_addresses(&G, T, G.config(), G.u(), std::move(fresh));
    return out;
  }

}  // namespace forge

#endif  // FORGE_UNIVERSE_HPP_
