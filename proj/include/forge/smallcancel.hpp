// Small cancellation over an amalgam node: the long relator tau, symmetrized
// relator sets, pieces, the metric condition C'(lambda) and a Dehn decision
// procedure for the quotient by the normal closure of the relators.
//
// Relators are compared as sequences of segments.  Every segment but the
// last is replaced by the least representative of its left coset of the
// shared subgroup G0, so a common prefix of two sequences is a common
// prefix up to a G0 element at the boundary.

#ifndef FORGE_SMALLCANCEL_HPP_
#define FORGE_SMALLCANCEL_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

#include "forge/errors.hpp"
#include "forge/tower.hpp"
#include "forge/words.hpp"

namespace forge {

  using Rational = boost::rational<long long>;

  inline std::string to_string(Rational const& q) {
    return std::to_string(q.numerator()) + "/" +
           std::to_string(q.denominator());
  }

  namespace detail {

    // Suffix array by prefix doubling.
    inline std::vector<std::size_t> suffix_array(
        std::vector<std::uint32_t> const& s) {
      std::size_t const        n = s.size();
      std::vector<std::size_t> sa(n);
      std::iota(sa.begin(), sa.end(), std::size_t{0});
      if (n == 0) {
        return sa;
      }
      std::vector<std::uint64_t> rank(s.begin(), s.end()), tmp(n);
      for (std::size_t k = 1;; k <<= 1) {
        auto key = [&](std::size_t i) {
          return std::pair<std::uint64_t, std::uint64_t>(
              rank[i], i + k < n ? rank[i + k] + 1 : 0);
        };
        std::sort(sa.begin(), sa.end(),
                  [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
        tmp[sa[0]] = 0;
        for (std::size_t i = 1; i < n; ++i) {
          tmp[sa[i]] = tmp[sa[i - 1]] + (key(sa[i - 1]) < key(sa[i]) ? 1 : 0);
        }
        rank.swap(tmp);
        if (rank[sa[n - 1]] == n - 1 || k >= n) {
          break;
        }
      }
      return sa;
    }

    // Kasai: lcp[i] = LCP(suffix sa[i-1], suffix sa[i]), lcp[0] = 0.
    inline std::vector<std::size_t> lcp_array(
        std::vector<std::uint32_t> const& s,
        std::vector<std::size_t> const&   sa) {
      std::size_t const        n = s.size();
      std::vector<std::size_t> rank(n), lcp(n, 0);
      for (std::size_t i = 0; i < n; ++i) {
        rank[sa[i]] = i;
      }
      std::size_t h = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (rank[i] == 0) {
          h = 0;
          continue;
        }
        std::size_t j = sa[rank[i] - 1];
        while (i + h < n && j + h < n && s[i + h] == s[j + h]) {
          ++h;
        }
        lcp[rank[i]] = h;
        if (h > 0) {
          --h;
        }
      }
      return lcp;
    }

    // Smallest p with s a power of its length-p prefix.
    inline std::size_t primitive_period(std::vector<std::uint32_t> const& s) {
      std::size_t const        m = s.size();
      std::vector<std::size_t> pi(m, 0);
      for (std::size_t i = 1; i < m; ++i) {
        std::size_t k = pi[i - 1];
        while (k > 0 && s[i] != s[k]) {
          k = pi[k - 1];
        }
        if (s[i] == s[k]) {
          ++k;
        }
        pi[i] = k;
      }
      if (m == 0) {
        return 0;
      }
      std::size_t p = m - pi[m - 1];
      return m % p == 0 ? p : m;
    }

    inline bool is_rotation(std::vector<std::uint32_t> const& a,
                            std::vector<std::uint32_t> const& b) {
      if (a.size() != b.size()) {
        return false;
      }
      if (a.empty()) {
        return true;
      }
      auto aa = a;
      aa.insert(aa.end(), a.begin(), a.end());
      return std::search(aa.begin(), aa.end(), b.begin(), b.end()) !=
             aa.end();
    }

    template <typename A, typename B>
    std::size_t common_prefix(A const& a, B const& b, std::size_t cap) {
      std::size_t k = 0;
      while (k < cap && a(k) == b(k)) {
        ++k;
      }
      return k;
    }

  }  // namespace detail

  ////////////////////////////////////////////////////////////////////////////
  // The relator tau
  ////////////////////////////////////////////////////////////////////////////

  // prod_{k=1..n} (x0 x1)^k (x0 x1^2)^k, reduced, with no preconditions.
  inline SyllableWord tau_word(TowerGroup const& g, SyllableWord const& x0,
                               SyllableWord const& x1, unsigned n) {
    auto         x1sq = g.multiply(x1, x1);
    SyllableWord raw;
    for (unsigned k = 1; k <= n; ++k) {
      for (unsigned i = 0; i < k; ++i) {
        raw.append(x0).append(x1);
      }
      for (unsigned i = 0; i < k; ++i) {
        raw.append(x0).append(x1sq);
      }
    }
    return g.reduce(raw);
  }

  inline SyllableWord build_tau(TowerGroup const& g, SyllableWord const& x0,
                                SyllableWord const& x1, unsigned n) {
    if (!g.is_amalgam()) {
      throw InputError("tau needs an amalgam node");
    }
    if (n < 1) {
      throw InputError("tau needs n >= 1");
    }
    auto single = [&](SyllableWord const& x, char const* name) {
      auto seg = g.segments(x);
      if (seg.size() != 1 || g.locate(seg[0].side, seg[0].word)) {
        throw InputError(std::string(name) +
                         " must be one syllable outside the shared subgroup");
      }
      return seg[0].side;
    };
    Side s0 = single(x0, "x0");
    Side s1 = single(x1, "x1");
    if (s0 == s1) {
      throw InputError("x0 and x1 lie in the same factor");
    }
    auto x1sq = g.multiply(x1, x1);
    if (x1sq.empty()) {
      throw InputError("x1 squared is trivial");
    }
    auto seg = g.segments(x1sq);
    if (seg.size() != 1 || g.locate(seg[0].side, seg[0].word)) {
      throw InputError("x1 squared lies in the shared subgroup");
    }
    return tau_word(g, x0, x1, n);
  }

  // z^-1 tau for z in the shared subgroup.
  inline SyllableWord build_relator(TowerGroup const&   g,
                                    SyllableWord const& z,
                                    SyllableWord const& tau) {
    if (!g.is_amalgam()) {
      throw InputError("relator needs an amalgam node");
    }
    auto zs = g.segments(z);
    if (!zs.empty() &&
        (zs.size() != 1 || !g.locate(zs[0].side, zs[0].word))) {
      throw InputError("z is not in the shared subgroup");
    }
    return g.reduce(juxtapose(g.inverse(z), tau));
  }

  ////////////////////////////////////////////////////////////////////////////
  // Relator systems
  ////////////////////////////////////////////////////////////////////////////

  struct PieceWitness {
    std::size_t length = 0;
    std::size_t first = 0, second = 0;  // relator indices
    std::size_t first_offset = 0, second_offset = 0;
    bool        self_overlap = false;  // a relator against its own shift
  };

  struct MetricCertificate {
    std::size_t  relators        = 0;
    std::size_t  max_piece_len   = 0;
    std::size_t  min_relator_len = 0;
    Rational     ratio, bound;
    bool         passes = false;
    PieceWitness witness;

    std::string to_text() const {
      std::ostringstream os;
      os << "relators: " << relators << "\n"
         << "min_relator_len: " << min_relator_len << "\n"
         << "max_piece_len: " << max_piece_len << "\n"
         << "ratio: " << to_string(ratio) << "\n"
         << "bound: " << to_string(bound) << "\n"
         << "passes: " << (passes ? "true" : "false") << "\n"
         << "piece: " << witness.first << "@" << witness.first_offset << " "
         << witness.second << "@" << witness.second_offset
         << (witness.self_overlap ? " self" : "") << "\n";
      return os.str();
    }
  };

  enum class MatchMethod { automatic, naive, suffix_array };

  struct DehnStep {
    SyllableWord conjugator;  // Y
    std::size_t  relator = 0;
    SyllableWord relator_word;  // r; next = r^-1 Y^-1 u Y
    std::size_t  matched       = 0;
    std::size_t  length_before = 0;  // core length
    std::size_t  length_after  = 0;
  };

  struct DehnVerdict {
    enum class Kind { member, non_member, undecided };

    Kind                  kind = Kind::non_member;
    std::vector<DehnStep> trace;
    Rational              best_fraction{0};
    bool                  by_length = false;  // fraction is |w| / min |r|
    SyllableWord          residue;            // terminal core
  };

  inline char const* to_string(DehnVerdict::Kind k) noexcept {
    switch (k) {
      case DehnVerdict::Kind::member:
        return "Member";
      case DehnVerdict::Kind::non_member:
        return "NonMember";
      case DehnVerdict::Kind::undecided:
        return "Undecided";
    }
    return "?";
  }

  // Applies a trace to w in the ambient group and returns the result.
  inline SyllableWord replay(TowerGroup const& g, SyllableWord const& w,
                             std::vector<DehnStep> const& trace) {
    auto u = g.reduce(w);
    for (auto const& st : trace) {
      u = g.reduce(juxtapose(g.inverse(st.relator_word),
                             g.conjugate(u, st.conjugator)));
    }
    return u;
  }

  struct RelatorOptions {
    bool        force_explicit = false;
    MatchMethod matching       = MatchMethod::automatic;
  };

  class RelatorSystem {
   public:
    enum class Mode { rotations, explicit_list };

    using Options = RelatorOptions;

    static RelatorSystem symmetrize(TowerPtr                         ambient,
                                    std::vector<SyllableWord> const& bases,
                                    Options                          opt = {}) {
      if (!ambient || !ambient->is_amalgam()) {
        throw InputError("relator systems live at an amalgam node");
      }
      if (ambient->association().kind != Association::Kind::finite) {
        throw InputError("relator systems need a finite shared subgroup");
      }
      if (!ambient->has_canonical()) {
        throw InputError("relator systems need canonical forms");
      }
      RelatorSystem R(std::move(ambient), opt);
      auto const&   G = *R.ambient_;
      R.init_leaves();
      if (bases.empty()) {
        throw InputError("no relators");
      }
      std::vector<SyllableWord> reduced;
      bool                      all_cyclic = true;
      for (auto const& b : bases) {
        auto r = G.reduce(b);
        if (r.empty()) {
          throw InputError("trivial relator");
        }
        if (!G.is_weakly_cyclically_reduced(r)) {
          throw InputError("relator is not weakly cyclically reduced");
        }
        auto m = G.length(r);
        all_cyclic = all_cyclic && (m == 1 || m % 2 == 0);
        reduced.push_back(std::move(r));
      }
      bool trivial_g0 = G.association().size() == 1;
      if (trivial_g0 && all_cyclic && !opt.force_explicit) {
        R.mode_ = Mode::rotations;
        R.build_rotations(reduced);
      } else {
        R.mode_ = Mode::explicit_list;
        R.build_explicit(reduced);
      }
      R.min_len_ = R.length_of(0);
      for (std::size_t i = 1; i < R.size(); ++i) {
        R.min_len_ = std::min(R.min_len_, R.length_of(i));
      }
      return R;
    }

    static RelatorSystem symmetrize(TowerPtr ambient, SyllableWord const& r,
                                    Options opt = {}) {
      return symmetrize(std::move(ambient), std::vector<SyllableWord>{r}, opt);
    }

    TowerPtr const& ambient() const noexcept {
      return ambient_;
    }
    Mode mode() const noexcept {
      return mode_;
    }
    std::size_t size() const noexcept {
      return mode_ == Mode::rotations ? rot_count_ : entries_.size();
    }
    std::size_t min_length() const noexcept {
      return min_len_;
    }
    std::size_t length_of(std::size_t i) const {
      if (mode_ == Mode::rotations) {
        return blocks_[locate_rotation(i).first].seq.size();
      }
      return entries_.at(i).reps.size();
    }

    SyllableWord relator(std::size_t i) const {
      if (i >= size()) {
        throw InputError("relator index out of range");
      }
      if (mode_ == Mode::explicit_list) {
        return entries_[i].word;
      }
      auto [b, o]     = locate_rotation(i);
      auto const& seq = blocks_[b].seq;
      SyllableWord w;
      for (std::size_t k = 0; k < seq.size(); ++k) {
        w.append(symbols_[seq[(o + k) % seq.size()]]);
      }
      return w;
    }

    std::vector<SyllableWord> relators() const {
      std::vector<SyllableWord> out;
      out.reserve(size());
      for (std::size_t i = 0; i < size(); ++i) {
        out.push_back(relator(i));
      }
      return out;
    }

    // Coset representative sequence of relator i.
    std::vector<std::uint32_t> reps_of(std::size_t i) const {
      if (mode_ == Mode::explicit_list) {
        return entries_.at(i).reps;
      }
      auto [b, o]     = locate_rotation(i);
      auto const& seq = blocks_[b].seq;
      std::vector<std::uint32_t> out(seq.size());
      for (std::size_t k = 0; k < seq.size(); ++k) {
        out[k] = seq[(o + k) % seq.size()];
      }
      return out;
    }

    // Longest piece.  The suffix route is the default; the pairwise route
    // compares every pair of relators directly.
    PieceWitness max_piece(MatchMethod how = MatchMethod::automatic) const {
      PieceWitness best = self_overlaps();
      auto         take = [&](PieceWitness const& p) {
        if (p.length > best.length) {
          best = p;
        }
      };
      if (how == MatchMethod::naive) {
        take(pairwise_piece());
      } else if (mode_ == Mode::rotations) {
        take(suffix_piece());
      } else {
        take(sorted_piece());
      }
      return best;
    }

    MetricCertificate check_metric(Rational bound) const {
      MetricCertificate c;
      c.relators        = size();
      c.witness         = max_piece();
      c.max_piece_len   = c.witness.length;
      c.min_relator_len = min_len_;
      c.ratio  = Rational(static_cast<long long>(c.max_piece_len),
                          static_cast<long long>(min_len_));
      c.bound  = bound;
      c.passes = c.ratio <= bound;
      return c;
    }

    // Stores the certificate used by decide.
    MetricCertificate const& certify(Rational bound = Rational(1, 10)) {
      cert_ = check_metric(bound);
      return *cert_;
    }
    std::optional<MetricCertificate> const& certificate() const noexcept {
      return cert_;
    }

    // Dehn's algorithm on the cyclic word.  A match may differ from the
    // relator at its two end syllables inside the same factor (a
    // semi-reduced occurrence); each such end costs one syllable.
    DehnVerdict decide(SyllableWord const& w) const {
      if (!cert_) {
        throw InputError("relator system has no metric certificate");
      }
      if (!cert_->passes || cert_->ratio > Rational(1, 10)) {
        throw InputError("metric certificate does not establish C'(1/10)");
      }
      auto const& G = *ambient_;
      DehnVerdict v;
      auto        u = G.reduce(w);
      while (true) {
        auto        cc = G.weakly_cyclic_reduce(u);
        std::size_t m  = G.length(cc.core);
        if (m == 0) {
          v.kind = DehnVerdict::Kind::member;
          return v;
        }
        if (2 * m < min_len_) {
          v.kind          = DehnVerdict::Kind::non_member;
          v.by_length     = true;
          v.best_fraction = Rational(static_cast<long long>(m),
                                     static_cast<long long>(min_len_));
          v.residue       = cc.core;
          return v;
        }
        auto core  = to_pairs(cc.core);
        auto cands = candidates(core);
        auto gain = [&](Candidate const& c) {
          return 2 * static_cast<long long>(c.length) -
                 static_cast<long long>(length_of(c.relator)) -
                 static_cast<long long>(c.fuzz);
        };
        // effective fraction (k - fuzz/2) / |r|: above 1/2 iff gain > 0
        v.best_fraction = Rational(0);
        for (auto const& c : cands) {
          v.best_fraction = std::max(
              v.best_fraction,
              Rational(2 * static_cast<long long>(c.length) -
                           static_cast<long long>(c.fuzz),
                       2 * static_cast<long long>(length_of(c.relator))));
        }
        std::stable_sort(cands.begin(), cands.end(),
                         [&](Candidate const& a, Candidate const& b) {
                           return gain(a) > gain(b);
                         });
        bool moved = false;
        for (auto const& c : cands) {
          if (gain(c) <= 0) {
            break;
          }
          DehnStep st;
          SyllableWord prefix;
          for (std::size_t k = 0; k < c.rotation; ++k) {
            prefix.append(single(core[k].side, core[k].e));
          }
          st.conjugator =
              G.reduce(juxtapose(cc.conjugator, prefix, c.adjust));
          st.relator       = c.relator;
          st.relator_word  = relator(c.relator);
          st.matched       = c.length;
          st.length_before = m;
          auto next = G.reduce(juxtapose(G.inverse(st.relator_word),
                                         G.conjugate(u, st.conjugator)));
          st.length_after = G.length(G.weakly_cyclic_reduce(next).core);
          if (st.length_after < m) {
            u = std::move(next);
            v.trace.push_back(std::move(st));
            moved = true;
            break;
          }
        }
        if (!moved) {
          v.kind    = v.best_fraction < Rational(1, 2)
                          ? DehnVerdict::Kind::non_member
                          : DehnVerdict::Kind::undecided;
          v.residue = cc.core;
          return v;
        }
      }
    }

   private:
    struct Block {
      std::vector<std::uint32_t> seq;
      std::size_t                period = 0;
      std::size_t                first  = 0;  // index of offset 0
    };

    struct Entry {
      std::vector<std::uint32_t> reps;
      SyllableWord               word;
    };

    struct Syl {
      std::uint8_t side;
      elem_t       e;
      auto         operator<=>(Syl const&) const = default;
    };
    using Pairs = std::vector<Syl>;

    // Coset tables of the two finite leaves.
    struct Leaves {
      factor_t                   fid[2] = {0, 0};
      FiniteGroup const*         grp[2] = {nullptr, nullptr};
      std::vector<elem_t>        g0[2];     // key -> element
      std::vector<elem_t>        rep[2];    // element -> coset representative
      std::vector<std::size_t>   carry[2];  // element -> key, x = rep * g0
      std::vector<std::uint32_t> sym[2];    // element -> symbol
      std::vector<std::size_t>   key_of[2];  // element -> key or kNoKey
      std::size_t                id_key = 0;
    };

    // Relator `relator` matched against adjust^-1 P^-1 core P adjust, P the
    // first `rotation` syllables of the core.
    struct Candidate {
      std::size_t  length   = 0;
      std::size_t  fuzz     = 0;
      std::size_t  relator  = 0;
      std::size_t  rotation = 0;
      SyllableWord adjust;
    };

    static constexpr std::uint32_t kSeparator = 0x80000000u;
    static constexpr std::size_t   kNoKey     = static_cast<std::size_t>(-1);

    RelatorSystem(TowerPtr a, Options o) : ambient_(std::move(a)), opt_(o) {}

    std::uint32_t intern(SyllableWord const& s) {
      auto [it, fresh] =
          symbol_ids_.try_emplace(s, static_cast<std::uint32_t>(symbols_.size()));
      if (fresh) {
        symbols_.push_back(s);
      }
      return it->second;
    }

    void build_rotations(std::vector<SyllableWord> const& bases) {
      auto const& G = *ambient_;
      for (auto const& r : bases) {
        for (auto const& x : {r, G.inverse(r)}) {
          auto seq = symbols_of(canon(to_pairs(x), true));
          bool dup = std::any_of(blocks_.begin(), blocks_.end(),
                                 [&](Block const& b) {
                                   return detail::is_rotation(b.seq, seq);
                                 });
          if (dup) {
            continue;
          }
          Block b;
          b.period = detail::primitive_period(seq);
          b.seq    = std::move(seq);
          b.first  = rot_count_;
          rot_count_ += b.period;
          blocks_.push_back(std::move(b));
        }
      }
    }

    void init_leaves() {
      auto const& G = *ambient_;
      for (int s = 0; s < 2; ++s) {
        Side        side = s == 0 ? Side::left : Side::right;
        auto const& c    = *G.child(side);
        if (!c.is_base()) {
          throw InputError("relator systems need finite leaf factors");
        }
        auto& L = leaves_;
        L.fid[s] = c.factor_id();
        L.grp[s] = c.group().get();
        auto const& grp = *L.grp[s];
        for (auto const& w : G.association().list(side)) {
          auto r = c.reduce(w);
          L.g0[s].push_back(r.empty() ? grp.identity() : r[0].elem());
        }
        for (elem_t x = 0; x < grp.order(); ++x) {
          auto r   = G.coset_representative(side, single(s, x));
          auto rep = r.empty() ? grp.identity() : r[0].elem();
          auto k   = std::find_if(L.g0[s].begin(), L.g0[s].end(),
                                  [&](elem_t g) { return grp.mul(rep, g) == x; });
          L.rep[s].push_back(rep);
          L.carry[s].push_back(static_cast<std::size_t>(k - L.g0[s].begin()));
          L.sym[s].push_back(intern(single(s, x)));
          if (symbol_pairs_.size() < symbols_.size()) {
            symbol_pairs_.resize(symbols_.size());
          }
          symbol_pairs_[L.sym[s].back()] = {static_cast<std::uint8_t>(s), x};
          auto g = std::find(L.g0[s].begin(), L.g0[s].end(), x);
          L.key_of[s].push_back(
              g == L.g0[s].end() ? kNoKey
                                 : static_cast<std::size_t>(g - L.g0[s].begin()));
        }
      }
      auto const& g0 = leaves_.g0[0];
      leaves_.id_key = static_cast<std::size_t>(
          std::find(g0.begin(), g0.end(), leaves_.grp[0]->identity()) -
          g0.begin());
    }

    SyllableWord single(int s, elem_t x) const {
      if (x == leaves_.grp[s]->identity()) {
        return {};
      }
      return SyllableWord{GenRef::factor(leaves_.fid[s], x)};
    }

    Pairs to_pairs(SyllableWord const& w) const {
      Pairs out;
      for (auto const& seg : ambient_->segments(w)) {
        int s = seg.side == Side::left ? 0 : 1;
        out.push_back({static_cast<std::uint8_t>(s),
                       seg.word.empty() ? leaves_.grp[s]->identity()
                                        : seg.word[0].elem()});
      }
      return out;
    }

    SyllableWord from_pairs(Pairs const& p) const {
      SyllableWord out;
      for (auto [s, e] : p) {
        out.append(single(s, e));
      }
      return out;
    }

    // Canonical segments; the last one as a coset representative when
    // rep_last is set.
    Pairs canon(Pairs const& w, bool rep_last) const {
      auto const& L     = leaves_;
      Pairs       out   = w;
      std::size_t carry = L.id_key;
      for (std::size_t i = 0; i < w.size(); ++i) {
        int  s = w[i].side;
        auto x = L.grp[s]->mul(L.g0[s][carry], w[i].e);
        if (i + 1 < w.size() || rep_last) {
          out[i].e = L.rep[s][x];
          carry    = L.carry[s][x];
        } else {
          out[i].e = x;
        }
      }
      return out;
    }

    std::vector<std::uint32_t> symbols_of(Pairs const& w) const {
      std::vector<std::uint32_t> out;
      out.reserve(w.size());
      for (auto [s, e] : w) {
        out.push_back(leaves_.sym[s][e]);
      }
      return out;
    }

    // g^-1 w g for the G0 element with key k.
    Pairs conj_key(Pairs w, std::size_t k) const {
      auto const& L = leaves_;
      if (w.empty()) {
        return w;
      }
      int s0   = w.front().side;
      int s1   = w.back().side;
      auto& g0 = *L.grp[s0];
      w.front().e = g0.mul(g0.inverse(L.g0[s0][k]), w.front().e);
      w.back().e  = L.grp[s1]->mul(w.back().e, L.g0[s1][k]);
      return w;
    }

    Pairs rotate(Pairs const& w, std::size_t i) const {
      Pairs rot(w.begin() + static_cast<long>(i), w.end());
      rot.insert(rot.end(), w.begin(), w.begin() + static_cast<long>(i));
      if (i > 0 && w.size() > 1 && w.front().side == w.back().side) {
        return to_pairs(ambient_->reduce(from_pairs(rot)));
      }
      return rot;
    }

    void build_explicit(std::vector<SyllableWord> const& bases) {
      auto const& G    = *ambient_;
      auto const  keys = leaves_.g0[0].size();
      std::map<Pairs, std::size_t> seen;  // canonical -> entry
      // (base, sign, entry) -> first rotation offset producing it
      std::map<std::tuple<std::size_t, int, std::size_t>, std::size_t> origin;
      for (std::size_t bi = 0; bi < bases.size(); ++bi) {
        for (int sign : {1, -1}) {
          auto x = to_pairs(sign > 0 ? bases[bi] : G.inverse(bases[bi]));
          auto m = x.size();
          for (std::size_t i = 0; i < m; ++i) {
            auto rot = rotate(x, i);
            for (std::size_t k = 0; k < keys; ++k) {
              auto u = conj_key(rot, k);
              if (u.size() % 2 == 1 && u.size() > 1 &&
                  !G.is_weakly_cyclically_reduced(from_pairs(u))) {
                continue;
              }
              auto [it, fresh] = seen.try_emplace(canon(u, false),
                                                  entries_.size());
              if (fresh) {
                entries_.push_back({symbols_of(canon(u, true)),
                                    from_pairs(u)});
              }
              auto key = std::make_tuple(bi, sign, it->second);
              auto [ot, first] = origin.try_emplace(key, i);
              if (!first && ot->second != i) {
                std::size_t d   = i - ot->second;
                std::size_t len = entries_[it->second].reps.size();
                if (d < len && len - d > self_.length) {
                  self_.length        = len - d;
                  self_.first         = it->second;
                  self_.second        = it->second;
                  self_.second_offset = d;
                  self_.self_overlap  = true;
                }
              }
            }
          }
        }
      }
      std::vector<std::size_t> order(entries_.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return entries_[a].reps < entries_[b].reps;
      });
      sorted_ = std::move(order);
    }

    std::pair<std::size_t, std::size_t> locate_rotation(std::size_t i) const {
      for (std::size_t b = 0; b < blocks_.size(); ++b) {
        if (i < blocks_[b].first + blocks_[b].period) {
          return {b, i - blocks_[b].first};
        }
      }
      throw InputError("relator index out of range");
    }

    PieceWitness self_overlaps() const {
      if (mode_ == Mode::explicit_list) {
        return self_;
      }
      PieceWitness best;
      for (auto const& b : blocks_) {
        if (b.period < b.seq.size() && b.seq.size() - b.period > best.length) {
          best = {b.seq.size() - b.period, b.first, b.first, 0, b.period, true};
        }
      }
      return best;
    }

    PieceWitness pairwise_piece() const {
      PieceWitness best;
      std::vector<std::vector<std::uint32_t>> all;
      for (std::size_t i = 0; i < size(); ++i) {
        all.push_back(reps_of(i));
      }
      for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t j = i + 1; j < all.size(); ++j) {
          auto cap = std::min(all[i].size(), all[j].size());
          auto k   = detail::common_prefix(
              [&](std::size_t t) { return all[i][t]; },
              [&](std::size_t t) { return all[j][t]; }, cap);
          if (k > best.length) {
            best = {k, i, j, 0, 0, false};
          }
        }
      }
      return best;
    }

    PieceWitness sorted_piece() const {
      PieceWitness best;
      for (std::size_t t = 1; t < sorted_.size(); ++t) {
        auto const& a   = entries_[sorted_[t - 1]].reps;
        auto const& b   = entries_[sorted_[t]].reps;
        auto        cap = std::min(a.size(), b.size());
        auto        k   = detail::common_prefix(
            [&](std::size_t i) { return a[i]; },
            [&](std::size_t i) { return b[i]; }, cap);
        if (k > best.length) {
          best = {k, sorted_[t - 1], sorted_[t], 0, 0, false};
        }
      }
      return best;
    }

    // Text of all blocks, each as seq seq separator.  owner[p] = (block,
    // position within the block).
    std::vector<std::uint32_t> block_text(
        std::vector<std::pair<std::size_t, std::size_t>>* owner) const {
      std::vector<std::uint32_t> text;
      for (std::size_t b = 0; b < blocks_.size(); ++b) {
        auto const& seq = blocks_[b].seq;
        for (int rep = 0; rep < 2; ++rep) {
          for (std::size_t k = 0; k < seq.size(); ++k) {
            text.push_back(seq[k]);
            if (owner) {
              owner->push_back({b, rep * seq.size() + k});
            }
          }
        }
        text.push_back(kSeparator + static_cast<std::uint32_t>(b));
        if (owner) {
          owner->push_back({blocks_.size(), 0});
        }
      }
      return text;
    }

    PieceWitness suffix_piece() const {
      std::vector<std::pair<std::size_t, std::size_t>> owner;
      auto text = block_text(&owner);
      auto sa   = detail::suffix_array(text);
      auto lcp  = detail::lcp_array(text, sa);
      PieceWitness best;
      bool         have = false;
      std::size_t  prev = 0, run = 0;
      for (std::size_t t = 0; t < sa.size(); ++t) {
        if (have) {
          run = std::min(run, lcp[t]);
        }
        auto [b, o] = owner[sa[t]];
        if (b >= blocks_.size() || o >= blocks_[b].period) {
          continue;
        }
        if (have) {
          auto [pb, po] = owner[sa[prev]];
          auto cap = std::min(blocks_[b].seq.size(), blocks_[pb].seq.size());
          auto k   = std::min(run, cap);
          if (k > best.length) {
            best = {k, blocks_[pb].first + po, blocks_[b].first + o, 0, 0,
                    false};
          }
        }
        have = true;
        prev = sa[t];
        run  = static_cast<std::size_t>(-1);
      }
      return best;
    }

    std::vector<Candidate> candidates(Pairs const& w) const {
      return mode_ == Mode::explicit_list ? explicit_candidates(w)
                                          : rotation_candidates(w);
    }

    bool in_g0(int s, elem_t e) const {
      return leaves_.key_of[s][e] != kNoKey;
    }

    // Every rotation, every element x of the first factor: match relators
    // against x^-1 w x by coset representatives.  Past the first syllable
    // the sequence only depends on the carried G0 key, so one tail per key
    // is built and x only changes the two ends.
    std::vector<Candidate> explicit_candidates(Pairs const& w) const {
      auto const&            L    = leaves_;
      std::size_t const      M    = w.size();
      std::size_t const      keys = L.g0[0].size();
      std::vector<Candidate> out;
      struct Tail {
        std::vector<std::uint32_t> sym;  // positions 1..M-1
        std::size_t                last_in = 0, last_out = 0;
      };
      for (std::size_t i = 0; i < M; ++i) {
        auto rot = rotate(w, i);
        int  s0  = rot[0].side;
        auto const& g = *L.grp[s0];
        std::vector<Tail> tails(keys);
        for (std::size_t c = 0; c < keys; ++c) {
          std::size_t carry = c;
          for (std::size_t t = 1; t < M; ++t) {
            int  s = rot[t].side;
            auto x = L.grp[s]->mul(L.g0[s][carry], rot[t].e);
            if (t + 1 == M) {
              tails[c].last_in = carry;
            }
            tails[c].sym.push_back(L.sym[s][L.rep[s][x]]);
            carry = L.carry[s][x];
          }
          tails[c].last_out = carry;
        }
        for (elem_t x = 0; x < g.order(); ++x) {
          auto e0 = g.mul(g.inverse(x), rot[0].e);
          if (in_g0(s0, e0)) {
            continue;
          }
          bool   central = in_g0(s0, x);
          Tail const* tail = nullptr;
          std::uint32_t first = 0, last = 0, extra = 0;
          std::size_t   size  = M;
          if (M == 1) {
            auto e = g.mul(e0, x);
            first  = L.sym[s0][L.rep[s0][e]];
          } else {
            first = L.sym[s0][L.rep[s0][e0]];
            tail  = &tails[L.carry[s0][e0]];
            int  sl = rot[M - 1].side;
            auto gl = *L.grp[sl];
            if (central) {
              auto e = gl.mul(gl.mul(L.g0[sl][tail->last_in], rot[M - 1].e),
                              L.g0[sl][L.key_of[s0][x]]);
              last   = L.sym[sl][L.rep[sl][e]];
            } else {
              last  = tail->sym.back();
              extra = L.sym[s0][L.rep[s0][g.mul(L.g0[s0][tail->last_out], x)]];
              size  = M + 1;
            }
          }
          auto q = [&](std::size_t t) -> std::uint32_t {
            if (t == 0) {
              return first;
            }
            if (t == M) {
              return extra;
            }
            if (t == M - 1) {
              return last;
            }
            return tail->sym[t - 1];
          };
          auto less = [&](std::size_t e) {  // entry e < q
            auto const& r = entries_[e].reps;
            auto n = std::min(r.size(), size);
            for (std::size_t t = 0; t < n; ++t) {
              if (r[t] != q(t)) {
                return r[t] < q(t);
              }
            }
            return r.size() < size;
          };
          auto pos = std::partition_point(sorted_.begin(), sorted_.end(), less);
          std::size_t best = 0, rel = 0;
          bool        have = false;
          for (auto it : {pos, pos == sorted_.begin() ? pos : pos - 1}) {
            if (it == sorted_.end()) {
              continue;
            }
            auto const& r = entries_[*it].reps;
            auto        n = detail::common_prefix(
                q, [&](std::size_t t) { return r[t]; },
                std::min(size, r.size()));
            if (!have || n > best) {
              best = n;
              rel  = *it;
              have = true;
            }
          }
          if (!have) {
            continue;
          }
          auto lim = std::min(size, entries_[rel].reps.size());
          Candidate c;
          c.length   = std::min(best + 1, lim);
          c.fuzz     = (central ? 0 : 1) + (best < lim ? 1 : 0);
          c.relator  = rel;
          c.rotation = i;
          c.adjust   = single(s0, x);
          out.push_back(std::move(c));
        }
      }
      return out;
    }

    // Candidate for rotation i of w against relator rotation (b, o), given
    // the exact common length t of the tails after the first syllable.
    Candidate tail_candidate(Pairs const& w, std::vector<std::uint32_t> const& q,
                             std::size_t i, std::size_t b, std::size_t o,
                             std::size_t t) const {
      auto const& blk = blocks_[b];
      auto        len = blk.seq.size();
      auto        lim = std::min(w.size(), len);
      t               = std::min(t, lim - 1);
      auto r0         = symbol_pairs_[blk.seq[o]];
      auto const& g   = *leaves_.grp[r0.side];
      Candidate c;
      c.length   = std::min(t + 2, lim);
      c.fuzz     = (q[i] != blk.seq[o] ? 1 : 0) + (t + 2 <= lim ? 1 : 0);
      c.relator  = blk.first + o % blk.period;
      c.rotation = i;
      c.adjust   = single(r0.side, g.mul(w[i].e, g.inverse(r0.e)));
      return c;
    }

    std::vector<Candidate> rotation_candidates(Pairs const& w) const {
      std::size_t const      M = w.size();
      auto const             q = symbols_of(w);
      std::vector<Candidate> out;
      auto same_side = [&](std::size_t i, std::uint32_t sym) {
        return symbol_pairs_[sym].side == w[i].side;
      };
      bool naive = opt_.matching == MatchMethod::naive ||
                   (opt_.matching == MatchMethod::automatic &&
                    M * size() <= (std::size_t{1} << 16));
      if (naive) {
        for (std::size_t i = 0; i < M; ++i) {
          for (std::size_t b = 0; b < blocks_.size(); ++b) {
            auto const& seq = blocks_[b].seq;
            auto        len = seq.size();
            for (std::size_t o = 0; o < blocks_[b].period; ++o) {
              if (!same_side(i, seq[o])) {
                continue;
              }
              auto lim = std::min(M, len);
              auto t   = lim < 2 ? 0
                                 : detail::common_prefix(
                                     [&](std::size_t k) {
                                       return q[(i + 1 + k) % M];
                                     },
                                     [&](std::size_t k) {
                                       return seq[(o + 1 + k) % len];
                                     },
                                     lim - 1);
              out.push_back(tail_candidate(w, q, i, b, o, t));
            }
          }
        }
        return out;
      }
      auto              text = block_text(nullptr);
      std::size_t const base = text.size();
      for (int rep = 0; rep < 2; ++rep) {
        text.insert(text.end(), q.begin(), q.end());
      }
      text.push_back(kSeparator + static_cast<std::uint32_t>(blocks_.size()));
      auto sa  = detail::suffix_array(text);
      auto lcp = detail::lcp_array(text, sa);
      for (std::size_t b = 0; b < blocks_.size(); ++b) {
        auto const& blk = blocks_[b];
        auto        len = blk.seq.size();
        std::vector<std::size_t> stat(M, 0), src(M, 0);
        scan_block(sa, lcp, base, M, b, stat, src);
        for (std::size_t i = 0; i < M; ++i) {
          // exact from the start
          if (stat[i] > 0) {
            out.push_back(tail_candidate(w, q, i, b, src[i] % len,
                                         stat[i] - 1));
          }
          // exact after the first syllable
          auto j = (i + 1) % M;
          if (stat[j] > 0 && M > 1) {
            auto o = (src[j] % len + len - 1) % len;
            if (same_side(i, blk.seq[o])) {
              out.push_back(tail_candidate(w, q, i, b, o, stat[j]));
            }
          }
        }
      }
      return out;
    }

    // Matching statistics against one block: for each query position p,
    // the longest common prefix with a suffix of that block and the block
    // position where it starts.
    void scan_block(std::vector<std::size_t> const& sa,
                    std::vector<std::size_t> const& lcp, std::size_t base,
                    std::size_t M, std::size_t b,
                    std::vector<std::size_t>& stat,
                    std::vector<std::size_t>& src) const {
      std::size_t const n     = sa.size();
      std::size_t       start = 0;
      for (std::size_t bb = 0; bb < b; ++bb) {
        start += 2 * blocks_[bb].seq.size() + 1;
      }
      std::size_t const stop = start + 2 * blocks_[b].seq.size();
      auto              cap  = std::min(M, blocks_[b].seq.size());
      auto consider = [&](std::size_t p, std::size_t run, std::size_t from) {
        auto k = std::min(run, cap);
        if (k > stat[p - base]) {
          stat[p - base] = k;
          src[p - base]  = from - start;
        }
      };
      constexpr std::size_t none = static_cast<std::size_t>(-1);
      std::size_t           from = none, run = 0;
      for (std::size_t t = 0; t < n; ++t) {
        if (from != none) {
          run = std::min(run, lcp[t]);
        }
        std::size_t p = sa[t];
        if (p >= start && p < stop) {
          from = p;
          run  = none;
        } else if (from != none && p >= base && p - base < M) {
          consider(p, run, from);
        }
      }
      from = none;
      for (std::size_t t = n; t-- > 0;) {
        std::size_t p = sa[t];
        if (p >= start && p < stop) {
          from = p;
          run  = none;
        } else if (from != none && p >= base && p - base < M) {
          consider(p, run, from);
        }
        if (from != none && t > 0) {
          run = std::min(run, lcp[t]);
        }
      }
    }

    TowerPtr                              ambient_;
    Options                               opt_;
    Mode                                  mode_ = Mode::rotations;
    std::map<SyllableWord, std::uint32_t> symbol_ids_;
    std::vector<SyllableWord>             symbols_;
    std::vector<Block>                    blocks_;
    std::size_t                           rot_count_ = 0;
    Leaves                                leaves_;
    std::vector<Syl>                      symbol_pairs_;
    std::vector<Entry>                    entries_;
    std::vector<std::size_t>              sorted_;
    PieceWitness                          self_;
    std::size_t                           min_len_ = 0;
    std::optional<MetricCertificate>      cert_;
  };

  ////////////////////////////////////////////////////////////////////////////
  // Quotients
  ////////////////////////////////////////////////////////////////////////////

  class SmallCancellationOracle final : public WordProblemOracle {
   public:
    explicit SmallCancellationOracle(
        std::shared_ptr<RelatorSystem const> system)
        : system_(std::move(system)) {}

    bool is_trivial(SyllableWord const& w) const override {
      auto v = system_->decide(w);
      if (v.kind == DehnVerdict::Kind::undecided) {
        throw Undecidable("Dehn verdict undecided at fraction " +
                          to_string(v.best_fraction));
      }
      return v.kind == DehnVerdict::Kind::member;
    }

    std::string describe() const override {
      return "small cancellation quotient by " +
             std::to_string(system_->size()) + " relators";
    }

    RelatorSystem const& system() const noexcept {
      return *system_;
    }

   private:
    std::shared_ptr<RelatorSystem const> system_;
  };

  inline TowerPtr small_cancellation_quotient(
      std::shared_ptr<RelatorSystem const> system) {
    auto amb = system->ambient();
    return TowerGroup::quotient(
        std::move(amb),
        std::make_shared<SmallCancellationOracle>(std::move(system)));
  }

  ////////////////////////////////////////////////////////////////////////////
  // Malnormality of the factors
  ////////////////////////////////////////////////////////////////////////////

  struct MalnormalityReport {
    std::size_t samples         = 0;
    std::size_t checks          = 0;
    std::size_t skipped         = 0;  // y fell inside the factor
    std::size_t undecided       = 0;
    std::size_t counterexamples = 0;
    struct Witness {
      SyllableWord y, g, s;  // y^-1 g y = s
    };
    std::optional<Witness> witness;
  };

  // Samples y outside the factor on side s and nontrivial g in it, and
  // checks y^-1 g y against every nontrivial element of the factor.  Both
  // factors must be finite leaves.
  inline MalnormalityReport malnormality_probe(RelatorSystem const& R, Side s,
                                               std::size_t   samples,
                                               std::uint64_t seed,
                                               std::size_t   max_len = 6) {
    auto const& G = *R.ambient();
    for (Side t : {Side::left, Side::right}) {
      if (!G.child(t)->is_base()) {
        throw InputError("malnormality probe needs finite leaf factors");
      }
    }
    std::mt19937_64 rng(seed);
    auto            pick = [&](Side t) {
      auto const& leaf = *G.child(t);
      auto const& grp  = *leaf.group();
      std::uniform_int_distribution<std::size_t> d(0, grp.order() - 2);
      auto e = static_cast<elem_t>(d(rng));
      if (e >= grp.identity()) {
        ++e;
      }
      return SyllableWord{GenRef::factor(leaf.factor_id(), e)};
    };
    auto const& home = *G.child(s);
    auto const& grp  = *home.group();
    if (grp.order() < 2 || G.child(other(s))->group()->order() < 2) {
      throw InputError("malnormality probe needs nontrivial factors");
    }
    std::vector<SyllableWord> nontrivial;
    for (elem_t e = 0; e < grp.order(); ++e) {
      if (e != grp.identity()) {
        nontrivial.push_back({GenRef::factor(home.factor_id(), e)});
      }
    }
    auto decide = [&](SyllableWord const& w) { return R.decide(w).kind; };
    MalnormalityReport rep;
    std::uniform_int_distribution<std::size_t> dlen(1, max_len);
    std::uniform_int_distribution<int>         dside(0, 1);
    while (rep.samples < samples) {
      std::size_t  len  = dlen(rng);
      Side         side = dside(rng) ? Side::left : Side::right;
      SyllableWord y;
      for (std::size_t i = 0; i < len; ++i, side = other(side)) {
        y.append(pick(side));
      }
      y = G.reduce(y);
      bool inside = y.empty();
      for (auto const& x : nontrivial) {
        if (inside) {
          break;
        }
        auto k = decide(G.multiply(y, G.inverse(x)));
        inside = k != DehnVerdict::Kind::non_member;
      }
      if (inside) {
        ++rep.skipped;
        continue;
      }
      ++rep.samples;
      auto g  = pick(s);
      auto yg = G.conjugate(g, y);
      for (auto const& x : nontrivial) {
        ++rep.checks;
        auto k = decide(G.multiply(yg, G.inverse(x)));
        if (k == DehnVerdict::Kind::undecided) {
          ++rep.undecided;
        } else if (k == DehnVerdict::Kind::member) {
          ++rep.counterexamples;
          if (!rep.witness) {
            rep.witness = MalnormalityReport::Witness{y, g, x};
          }
        }
      }
    }
    return rep;
  }

  ////////////////////////////////////////////////////////////////////////////
  // Extension obstruction
  ////////////////////////////////////////////////////////////////////////////

  // x0 in the left factor, x1 in the right one, z in G0, and candidate
  // images psi(x_i) = y_i^-1 x_i y_i with y_i in the factor of x_i.
  struct ObstructionConfig {
    TowerPtr     ambient;
    SyllableWord x0, x1, z, y0, y1;
    unsigned     n = 80;
  };

  struct ObstructionVerdict {
    std::vector<std::string> violations;
    bool                     obstructed = false;
    std::size_t candidates = 0, non_members = 0, members = 0, undecided = 0;
    std::optional<SyllableWord> extending;  // g0 with tau(psi) = g0
    MetricCertificate           certificate;
  };

  inline ObstructionVerdict obstruction_check(ObstructionConfig const& c) {
    ObstructionVerdict out;
    auto&              bad = out.violations;
    if (!c.ambient || !c.ambient->is_amalgam() ||
        c.ambient->association().kind != Association::Kind::finite) {
      bad.push_back("ambient is not an amalgam over a finite subgroup");
      return out;
    }
    auto const& G = *c.ambient;
    auto in_factor = [&](SyllableWord const& w, Side s, bool allow_g0) {
      auto seg = G.segments(w);
      if (seg.empty()) {
        return allow_g0;
      }
      if (seg.size() != 1) {
        return false;
      }
      if (G.locate(seg[0].side, seg[0].word)) {
        return allow_g0;
      }
      return seg[0].side == s;
    };
    if (!in_factor(c.x0, Side::left, false)) {
      bad.push_back("x0 is not a left-factor syllable outside G0");
    }
    if (!in_factor(c.x1, Side::right, false)) {
      bad.push_back("x1 is not a right-factor syllable outside G0");
    } else if (!in_factor(G.multiply(c.x1, c.x1), Side::right, false)) {
      bad.push_back("x1 squared is trivial or in G0");
    }
    auto zs = G.segments(c.z);
    if (!zs.empty() && (zs.size() != 1 || !G.locate(zs[0].side, zs[0].word))) {
      bad.push_back("z is not in G0");
    }
    if (!in_factor(c.y0, Side::left, true)) {
      bad.push_back("y0 is not in the left factor");
    }
    if (!in_factor(c.y1, Side::right, true)) {
      bad.push_back("y1 is not in the right factor");
    }
    if (c.n < 1) {
      bad.push_back("n must be positive");
    }
    auto commutes = [&](SyllableWord const& a, SyllableWord const& b) {
      return G.equal(G.multiply(a, b), G.multiply(b, a));
    };
    if (!G.is_trivial(c.y0) && commutes(c.y0, c.x0)) {
      bad.push_back("y0 centralizes x0");
    }
    if (!G.is_trivial(c.y1) && commutes(c.y1, c.x1)) {
      bad.push_back("y1 centralizes x1");
    }
    if (!bad.empty()) {
      return out;
    }
    auto r = build_relator(G, c.z, build_tau(G, c.x0, c.x1, c.n));
    auto R = RelatorSystem::symmetrize(c.ambient, r);
    out.certificate = R.certify();
    if (!out.certificate.passes) {
      bad.push_back("relator system fails C'(1/10)");
      return out;
    }
    auto t = tau_word(G, G.conjugate(c.x0, c.y0), G.conjugate(c.x1, c.y1),
                      c.n);
    for (auto const& g0 : G.association().list(Side::left)) {
      ++out.candidates;
      auto k = R.decide(G.multiply(t, G.inverse(g0))).kind;
      if (k == DehnVerdict::Kind::member) {
        ++out.members;
        if (!out.extending) {
          out.extending = g0;
        }
      } else if (k == DehnVerdict::Kind::undecided) {
        ++out.undecided;
      } else {
        ++out.non_members;
      }
    }
    auto in_g0 = [&](SyllableWord const& w) {
      auto seg = G.segments(w);
      return seg.empty() ||
             (seg.size() == 1 && G.locate(seg[0].side, seg[0].word));
    };
    bool moved = !in_g0(c.y0) || !in_g0(c.y1);
    out.obstructed = moved && out.non_members == out.candidates;
    return out;
  }

}  // namespace forge

#endif  // FORGE_SMALLCANCEL_HPP_
