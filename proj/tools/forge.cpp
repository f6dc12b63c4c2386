// forge: command-line front end.  Reports are "key: value" lines on stdout.
// Exit codes: 0 success or verdict true, 1 verdict false (witness printed),
// 2 undecided or budget exceeded, 3 input error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "forge/amalgam.hpp"
#include "forge/errors.hpp"
#include "forge/fingrp.hpp"
#include "forge/io.hpp"
#include "forge/smallcancel.hpp"
#include "forge/tower.hpp"
#include "forge/universe.hpp"
#include "forge/words.hpp"

using namespace forge;

namespace {

  enum Exit { ok = 0, no = 1, undecided = 2, bad_input = 3 };

  struct Session {
    std::uint64_t seed    = 1;
    std::uint64_t budget  = Budget{}.candidates;
    std::size_t   window  = 16;
    std::size_t   samples = 0;  // 0: the command's own default

    Budget hom_budget() const {
      Budget b;
      b.candidates = budget;
      return b;
    }
    std::size_t samples_or(std::size_t d) const {
      return samples ? samples : d;
    }
    Scheme scheme(std::string const& path) const {
      return load_scheme(path, window);
    }
  };

  std::ostream& out = std::cout;

  void kv(std::string const& k, std::string const& v) {
    out << k << ": " << v << "\n";
  }
  template <typename T>
  void kv(std::string const& k, T const& v) {
    out << k << ": " << v << "\n";
  }

  char const* yes_no(bool b) {
    return b ? "true" : "false";
  }

  SyllableWord word_in(TowerGroup const& g, std::string const& text) {
    auto w = parse_word(text);
    g.check_word(w);
    return w;
  }

  std::set<std::size_t> blocks(std::string const& text) {
    std::set<std::size_t> s;
    std::string           t = text;
    for (auto& ch : t) {
      if (ch == ',' || ch == '{' || ch == '}') {
        ch = ' ';
      }
    }
    for (auto const& tok : split_ws(t)) {
      try {
        std::size_t used = 0;
        auto        v    = std::stoul(tok, &used);
        if (used != tok.size()) {
          throw InputError("");
        }
        s.insert(v);
      } catch (std::exception const&) {
        throw InputError("bad block list '" + text + "'");
      }
    }
    return s;
  }

  std::string elems(Subgroup const& s) {
    std::ostringstream os;
    for (std::size_t i = 0; i < s.elements.size(); ++i) {
      os << (i ? " " : "") << s.elements[i];
    }
    return os.str();
  }

  std::string images(std::vector<elem_t> const& m) {
    std::ostringstream os;
    for (std::size_t i = 0; i < m.size(); ++i) {
      os << (i ? " " : "") << m[i];
    }
    return os.str();
  }

  // Z/5 * Z/7 with x0 = f1:1, x1 = f2:1, z = 1.
  Scheme default_tau_scheme(unsigned n) {
    Scheme s;
    s.group = TowerGroup::free_product(TowerGroup::base(1, cyclic_group(5)),
                                       TowerGroup::base(2, cyclic_group(7)));
    s.params = {{"x0", "f1:1"}, {"x1", "f2:1"}, {"z", "1"},
                {"n", std::to_string(n)}};
    return s;
  }

  std::vector<SyllableWord> scheme_relators(Scheme const& s) {
    if (!s.relators.empty()) {
      return s.relators;
    }
    auto const& G = *s.group;
    auto        n = s.number("n", 80);
    auto        z = s.has("z") ? s.word("z") : SyllableWord{};
    return {build_relator(G, z, build_tau(G, s.word("x0"), s.word("x1"), n))};
  }

  RelatorSystem certified_system(Scheme const& s) {
    auto R = RelatorSystem::symmetrize(s.group, scheme_relators(s));
    R.certify();
    return R;
  }

  ////////////////////////////////////////////////////////////////////////
  // group
  ////////////////////////////////////////////////////////////////////////

  int group_check(Session const& S, std::string const& ref) {
    auto g = load_group(ref);
    (void)S;
    kv("name", g->name());
    kv("order", g->order());
    kv("generators", g->generators().size());
    kv("abelian", yes_no(g->is_abelian()));
    kv("center", center(*g).size());
    return ok;
  }

  int group_aut(Session const& S, std::string const& ref) {
    auto g   = load_group(ref);
    auto aut = automorphism_group(g, S.hom_budget());
    auto inn = aut.inner_copy();
    kv("group", g->name());
    kv("order", g->order());
    kv("aut_order", aut.group->order());
    kv("inner_order", inn.size());
    kv("outer_order", aut.group->order() / inn.size());
    return ok;
  }

  int group_complete(Session const& S, std::string const& ref) {
    auto g   = load_group(ref);
    auto z   = center(*g);
    auto aut = automorphism_group(g, S.hom_budget());
    bool c   = z.size() == 1 && aut.group->order() == g->order();
    kv("group", g->name());
    kv("complete", yes_no(c));
    if (!c) {
      kv("center", elems(z));
      kv("aut_order", aut.group->order());
      return no;
    }
    return ok;
  }

  int group_suitable(Session const& S, std::string const& ref) {
    auto g = load_group(ref);
    auto v = is_suitable(g, S.hom_budget());
    kv("group", g->name());
    kv("verdict", v.suitable ? "suitable" : "not-suitable");
    if (v.suitable) {
      return ok;
    }
    kv("failure", to_string(v.failure));
    if (v.central_witness) {
      kv("central_element", *v.central_witness);
    }
    if (v.stray_copy) {
      kv("stray_copy", elems(*v.stray_copy));
    }
    if (v.unextended_aut) {
      kv("unextended_aut", images(automorphism_group(g, S.hom_budget())
                                      .maps[*v.unextended_aut]));
    }
    return no;
  }

  int group_localization(Session const& S, std::string const& path) {
    auto eta = load_hom(path);
    auto v   = is_localization(eta, S.hom_budget());
    kv("source", eta.source->name());
    kv("target", eta.target->name());
    kv("verdict", v.is_localization ? "localization" : "not-localization");
    if (v.is_localization) {
      return ok;
    }
    kv("phi", images(v.phi->images));
    kv("extensions", v.extension_count);
    for (std::size_t k = 0; k < v.extensions.size(); ++k) {
      kv("extension " + std::to_string(k + 1), images(v.extensions[k]));
    }
    return no;
  }

  int group_socle(Session const& S, std::string const& h_ref,
                  std::string const& g_ref) {
    auto h = load_group(h_ref);
    auto g = load_group(g_ref);
    auto s = h_socle(h, g, S.hom_budget());
    kv("h", h->name());
    kv("g", g->name());
    kv("socle_order", s.size());
    kv("socle", elems(s));
    return ok;
  }

  ////////////////////////////////////////////////////////////////////////
  // word, amalgam, hnn
  ////////////////////////////////////////////////////////////////////////

  int word_reduce(Session const& S, std::string const& path, std::string const& w) {
    auto s = S.scheme(path);
    auto x = word_in(*s.group, w);
    auto r = s.group->reduce(x);
    kv("reduced", to_string(r));
    kv("trivial", yes_no(r.empty()));
    if (s.group->is_amalgam() || s.group->is_hnn()) {
      kv("length", s.group->length(r));
    }
    return ok;
  }

  int word_invert(Session const& S, std::string const& path, std::string const& w) {
    auto s = S.scheme(path);
    auto x = word_in(*s.group, w);
    auto i = s.group->inverse(x);
    kv("inverse", to_string(i));
    kv("check", to_string(s.group->multiply(x, i)));
    return ok;
  }

  TowerPtr require_amalgam(Scheme const& s) {
    if (!s.group->is_amalgam()) {
      throw InputError("scheme is not an amalgam");
    }
    return s.group;
  }

  int amalgam_nf(Session const& S, std::string const& path, std::string const& w) {
    auto s = S.scheme(path);
    auto G = require_amalgam(s);
    auto x = word_in(*G, w);
    kv("reduced", to_string(G->reduce(x)));
    if (G->has_canonical()) {
      auto c = G->canonical(x);
      kv("normal_form", to_string(c));
      std::size_t k = 0;
      for (auto const& seg : G->canonical_segments(x)) {
        kv("segment " + std::to_string(++k),
           std::string(to_string(seg.side)) + " " + to_string(seg.word));
      }
    } else {
      std::size_t k = 0;
      for (auto const& seg : G->segments(x)) {
        kv("segment " + std::to_string(++k),
           std::string(to_string(seg.side)) + " " + to_string(seg.word));
      }
    }
    kv("length", G->length(x));
    return ok;
  }

  int amalgam_torsion(Session const& S, std::string const& path,
                      std::vector<std::string> const& gens) {
    auto s = S.scheme(path);
    auto G = require_amalgam(s);
    std::vector<SyllableWord> g;
    for (auto const& t : gens) {
      g.push_back(word_in(*G, t));
    }
    auto hp = tracked_closure(*G, g);
    auto r  = conjugate_torsion_into_factor(*G, hp);
    kv("subgroup_order", hp.size());
    kv("conjugator", to_string(r.y));
    kv("side", to_string(r.side));
    kv("steps", r.steps);
    std::size_t longest = 0;
    for (auto const& h : hp) {
      longest = std::max(longest, G->length(G->conjugate(h, r.y)));
    }
    kv("max_conjugate_length", longest);
    return longest <= 1 ? ok : no;
  }

  Side parse_side(std::string const& s) {
    if (s == "left") {
      return Side::left;
    }
    if (s == "right") {
      return Side::right;
    }
    throw InputError("side must be left or right");
  }

  int amalgam_centralizer(Session const& S, std::string const& path,
                          std::string const& side, std::string const& x,
                          std::vector<std::string> const& gens) {
    auto s = S.scheme(path);
    auto G = require_amalgam(s);
    auto sd = parse_side(side);
    std::vector<SyllableWord> g;
    for (auto const& t : gens) {
      auto w = word_in(*G, t);
      auto seg = G->segments(w);
      if (seg.size() > 1 || (seg.size() == 1 && seg[0].side != sd &&
                             !G->locate(seg[0].side, seg[0].word))) {
        throw InputError("generator " + t + " is not in the " + side + " factor");
      }
      g.push_back(seg.empty() ? SyllableWord{} : seg[0].word);
    }
    auto hp = tracked_closure(*G->child(sd), g);
    auto v  = centralizer_conclusion_check(*G, sd, hp, word_in(*G, x));
    kv("outcome", to_string(v.outcome));
    if (v.outcome == CentralizerVerdict::Outcome::not_commuting) {
      kv("violating", to_string(*v.violating));
      return no;
    }
    if (v.outcome == CentralizerVerdict::Outcome::conjugate_into_shared) {
      kv("witness", to_string(v.witness));
    }
    return ok;
  }

  int hnn_reduce(Session const& S, std::string const& path, std::string const& w) {
    auto s = S.scheme(path);
    if (!s.group->is_hnn()) {
      throw InputError("scheme is not an HNN extension");
    }
    auto x = word_in(*s.group, w);
    auto r = s.group->reduce(x);
    kv("reduced", to_string(r));
    kv("letters", s.group->count_letters(r));
    kv("trivial", yes_no(r.empty()));
    if (s.group->has_canonical()) {
      kv("normal_form", to_string(s.group->canonical(x)));
    }
    return ok;
  }

  int hnn_make_conjugate(Session const& S, std::string const& path,
                         std::string const& f, std::string const& target) {
    auto s = S.scheme(path);
    auto a = word_in(*s.group, f);
    auto b = word_in(*s.group, target);
    auto r = make_conjugate(s.group, a, b);
    SyllableWord t{GenRef::letter(r.letter, 1)};
    kv("letter", to_string(t));
    kv("verified", yes_no(r.group->equal(r.group->conjugate(a, t), b)));
    return ok;
  }

  // H x H with copies a = H x 1, b = 1 x H and the diagonal; the chosen
  // reference copy must be conjugated onto both.
  int hnn_realize_iso(Session const& S, std::string const& ref, unsigned pi,
                      std::string const& base) {
    auto h   = load_group(ref);
    auto aut = automorphism_group(h, S.hom_budget());
    if (pi >= aut.group->order()) {
      throw InputError("pi must be below |Aut(H)| = " +
                       std::to_string(aut.group->order()));
    }
    auto d = share(direct_product(*h, *h));
    auto g = TowerGroup::base(1, d);
    auto n = static_cast<elem_t>(h->order());
    auto w = [&](elem_t e) {
      return e == d->identity() ? SyllableWord{} : SyllableWord{GenRef::factor(1, e)};
    };
    std::vector<SyllableWord> a, b, diag;
    for (elem_t x = 0; x < n; ++x) {
      a.push_back(w(x * n + h->identity()));
      b.push_back(w(h->identity() * n + x));
      diag.push_back(w(x * n + x));
    }
    auto ca = aut_copy_of_complete(aut, a);
    auto cb = aut_copy_of_complete(aut, b);
    auto cd = aut_copy_of_complete(aut, diag);
    AutCopy const* rc = nullptr;
    if (base == "diagonal") {
      rc = &cd;
    } else if (base == "left") {
      rc = &ca;
    } else {
      throw InputError("reference copy must be diagonal or left");
    }
    auto r = realize_iso_by_hnn(g, aut, *rc, ca, cb, static_cast<elem_t>(pi));
    kv("h", h->name());
    kv("pi", images(aut.maps[pi]));
    kv("new_letters", r.new_letters.size());
    kv("conjugator", to_string(r.conjugator));
    std::size_t good = 0;
    for (elem_t x = 0; x < n; ++x) {
      good += r.group->equal(r.group->conjugate(a[x], r.conjugator),
                             b[aut.maps[pi][x]]);
    }
    kv("verified", std::to_string(good) + "/" + std::to_string(n));
    return good == n ? ok : no;
  }

  ////////////////////////////////////////////////////////////////////////
  // sc
  ////////////////////////////////////////////////////////////////////////

  int sc_tau(Session const& S, std::string const& path, unsigned n, bool quiet) {
    auto s = path.empty() ? default_tau_scheme(n) : S.scheme(path);
    auto t = build_tau(*s.group, s.word("x0"), s.word("x1"), n);
    kv("n", n);
    kv("syllables", s.group->length(t));
    if (!quiet) {
      kv("word", to_string(t));
    }
    return ok;
  }

  int sc_certify(Session const& S, std::string const& path) {
    auto s = S.scheme(path);
    auto R = RelatorSystem::symmetrize(s.group, scheme_relators(s));
    auto c = R.certify();
    kv("mode", R.mode() == RelatorSystem::Mode::rotations ? "rotations" : "explicit");
    out << c.to_text();
    return c.passes ? ok : no;
  }

  int sc_decide(Session const& S, std::string const& path, std::string const& w) {
    auto s = S.scheme(path);
    auto R = certified_system(s);
    if (!R.certificate()->passes) {
      throw InputError("relator system fails C'(1/10) with ratio " +
                       to_string(R.certificate()->ratio));
    }
    auto x = word_in(*s.group, w);
    auto v = R.decide(x);
    kv("verdict", to_string(v.kind));
    kv("steps", v.trace.size());
    kv("best_fraction", to_string(v.best_fraction));
    kv("residue", to_string(v.residue));
    if (v.kind == DehnVerdict::Kind::member) {
      kv("replay", to_string(replay(*s.group, x, v.trace)));
      return ok;
    }
    return v.kind == DehnVerdict::Kind::non_member ? no : undecided;
  }

  int sc_probe(Session const& S, std::string const& path) {
    auto s = path.empty() ? default_tau_scheme(80) : S.scheme(path);
    auto R = certified_system(s);
    if (!R.certificate()->passes) {
      throw InputError("relator system fails C'(1/10)");
    }
    auto        n     = S.samples_or(200);
    std::size_t bad   = 0, open = 0;
    int         code  = ok;
    std::uint64_t seed = S.seed;
    for (Side side : {Side::left, Side::right}) {
      auto r    = malnormality_probe(R, side, n, seed++);
      auto name = std::string(to_string(side));
      kv(name + "_samples", r.samples);
      kv(name + "_checks", r.checks);
      kv(name + "_skipped", r.skipped);
      kv(name + "_undecided", r.undecided);
      kv(name + "_counterexamples", r.counterexamples);
      if (r.witness) {
        kv(name + "_witness_y", to_string(r.witness->y));
        kv(name + "_witness_g", to_string(r.witness->g));
        kv(name + "_witness_s", to_string(r.witness->s));
      }
      bad += r.counterexamples;
      open += r.undecided;
    }
    if (bad) {
      code = no;
    } else if (open) {
      code = undecided;
    }
    kv("verdict", bad ? "counterexample" : (open ? "undecided" : "malnormal"));
    return code;
  }

  int sc_obstruct(Session const& S, std::string const& path) {
    auto s = S.scheme(path);
    ObstructionConfig c;
    c.ambient = s.group;
    c.x0      = s.word("x0");
    c.x1      = s.word("x1");
    c.z       = s.has("z") ? s.word("z") : SyllableWord{};
    c.y0      = s.has("y0") ? s.word("y0") : SyllableWord{};
    c.y1      = s.has("y1") ? s.word("y1") : SyllableWord{};
    c.n       = s.number("n", 80);
    auto v    = obstruction_check(c);
    if (!v.violations.empty()) {
      for (auto const& m : v.violations) {
        kv("violation", m);
      }
      return bad_input;
    }
    kv("ratio", to_string(v.certificate.ratio));
    kv("candidates", v.candidates);
    kv("non_members", v.non_members);
    kv("members", v.members);
    kv("undecided", v.undecided);
    if (v.obstructed) {
      kv("verdict", "obstruction-confirmed");
      return ok;
    }
    if (v.extending) {
      kv("verdict", "extends");
      kv("g0", to_string(*v.extending));
      return no;
    }
    kv("verdict", v.undecided ? "undecided" : "not-obstructed");
    return v.undecided ? undecided : no;
  }

  ////////////////////////////////////////////////////////////////////////
  // universe
  ////////////////////////////////////////////////////////////////////////

  UniverseConfig universe_config(Session const& S) {
    (void)S;
    return {};
  }

  int report_check(UGroup const& g) {
    auto v = check_ugroup(g);
    for (auto const& m : v.violations) {
      kv("violation", std::string("(") + m.clause + ") " + m.detail);
    }
    kv("check", v.ok() ? "ok" : "failed");
    return v.ok() ? ok : no;
  }

  int universe_assign(Session const& S, std::string const& path,
                      std::string const& u_text, std::string const& out_path) {
    auto s       = S.scheme(path);
    auto tracked = leaf_elements(*s.group);
    tracked.insert(tracked.end(), s.tracked.begin(), s.tracked.end());
    std::set<std::size_t> u{0};
    if (!u_text.empty()) {
      u = blocks(u_text);
    } else {
      for (auto const& w : tracked) {
        u.insert(element_norm(*s.group, w, s.norms));
      }
    }
    auto g    = assign_addresses(s.group, tracked, u, s.norms, universe_config(S));
    auto text = write_ugroup(g, std::filesystem::absolute(path).lexically_normal().string());
    if (out_path.empty()) {
      out << text;
      return check_ugroup(g).ok() ? ok : no;
    }
    std::ofstream f(out_path);
    if (!f) {
      throw InputError("cannot write " + out_path);
    }
    f << text;
    kv("u", to_string(g.u()));
    kv("elements", g.size());
    return report_check(g);
  }

  int universe_check(Session const& S, std::string const& path) {
    auto f = load_ugroup(path, universe_config(S), S.window);
    kv("u", to_string(f.group.u()));
    kv("elements", f.group.size());
    return report_check(f.group);
  }

  // Session file: "ugroup <path>" lines, each optionally followed by the
  // expected "code <cod> dom {..}" record.
  int universe_code(Session const& S, std::string const& session,
                    std::vector<std::string> const& files) {
    std::vector<std::pair<std::string, std::optional<std::string>>> items;
    for (auto const& f : files) {
      items.push_back({f, std::nullopt});
    }
    if (!session.empty()) {
      std::ifstream in(session);
      if (!in) {
        throw InputError("cannot open " + session);
      }
      LineCursor c(in);
      auto       dir = std::filesystem::path(session).parent_path();
      while (!c.done()) {
        auto t = split_ws(c.peek());
        if (t.size() == 2 && t[0] == "ugroup") {
          items.push_back({(dir / t[1]).string(), std::nullopt});
        } else if (!t.empty() && t[0] == "code" && !items.empty() &&
                   !items.back().second) {
          items.back().second = c.peek();
        } else {
          c.fail("expected 'ugroup <path>' or a code record");
        }
        c.next();
      }
    }
    if (items.empty()) {
      throw InputError("no u-groups given");
    }
    CodeRegistry reg;
    std::size_t  mismatches = 0;
    for (auto const& [f, expect] : items) {
      auto g    = load_ugroup(f, universe_config(S), S.window);
      auto code = to_string(reg.code(g.group));
      kv(std::filesystem::path(f).filename().string(), code);
      if (expect && *expect != code) {
        ++mismatches;
        kv("mismatch", *expect);
      }
    }
    kv("classes", reg.size());
    return mismatches ? no : ok;
  }

  int universe_probe(Session const& S, std::size_t count) {
    auto fam = close_under_restrictions(generate_family(S.seed, count));
    CodeRegistry reg;
    auto         rep = poset_axiom_probe(fam, reg, S.samples_or(100), S.seed);
    out << rep.to_text();
    return rep.passes() ? ok : no;
  }

  int universe_density_dom(Session const& S, std::string const& path,
                           std::size_t alpha, std::string const& allowed,
                           std::string const& ref) {
    auto f = load_ugroup(path, universe_config(S), S.window);
    auto v = allowed.empty() ? std::set<std::size_t>{alpha} : blocks(allowed);
    auto r = density_domain_step(f.group, alpha, v, load_group(ref));
    kv("unchanged", yes_no(r.unchanged));
    kv("u", to_string(r.group.u()));
    kv("elements", r.group.size());
    bool grew = r.group.u().count(alpha) && is_sub_ugroup(f.group, r.group);
    kv("extends_input", yes_no(grew));
    int c = report_check(r.group);
    return grew ? c : no;
  }

  int universe_density_simple(Session const& S, std::string const& path,
                              std::string const& xs, std::string const& ys) {
    auto f = load_ugroup(path, universe_config(S), S.window);
    auto x = word_in(*f.group.group(), xs);
    auto y = word_in(*f.group.group(), ys);
    auto r = density_simplicity_step(f.group, x, y);
    auto T = r.group.group();
    kv("kind", r.kind);
    kv("conjugates", r.trace.size());
    for (std::size_t k = 0; k < r.trace.size(); ++k) {
      kv("by " + std::to_string(k + 1), to_string(r.trace[k]));
    }
    bool replay = T->equal(conjugate_product(*T, y, r.trace), x);
    kv("replay", yes_no(replay));
    kv("u", to_string(r.group.u()));
    kv("elements", r.group.size());
    int c = report_check(r.group);
    return replay ? c : no;
  }

  std::uint64_t env_budget(std::uint64_t fallback) {
    auto const* e = std::getenv("FORGE_BUDGET");
    if (!e || !*e) {
      return fallback;
    }
    try {
      std::size_t used = 0;
      auto        v    = std::stoull(e, &used);
      if (used == std::string(e).size() && v > 0) {
        return v;
      }
    } catch (std::exception const&) {
    }
    throw InputError("FORGE_BUDGET must be a positive integer");
  }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forge: finite group, amalgam and small cancellation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Session S;
  std::optional<std::uint64_t> budget;
  app.add_option("--seed", S.seed, "random seed")->capture_default_str();
  app.add_option("--budget", budget,
                 "candidate cap for homomorphism searches (default 1e8, "
                 "or FORGE_BUDGET)");
  app.add_option("--g0-window", S.window,
                 "exponent window for cyclic subgroup membership")
      ->capture_default_str();
  app.add_option("--samples", S.samples,
                 "sample count (sc probe 200, universe probe 100)");

  std::function<int()> action;
  auto on = [&](CLI::App* sub, std::function<int()> f) {
    sub->callback([&action, f] { action = f; });
  };

  std::string a1, a2, a3, a4;
  std::vector<std::string> list;
  unsigned    n = 80, pi = 0;
  std::size_t count = 50, alpha = 0;
  bool        quiet = false;
  std::string ref_copy = "diagonal", dom_group = "cyclic:2";

  auto* grp = app.add_subcommand("group", "finite groups")->require_subcommand(1);
  {
    auto add1 = [&](char const* name, char const* help, int (*f)(Session const&, std::string const&)) {
      auto* c = grp->add_subcommand(name, help);
      c->add_option("group", a1, "builtin name or .grp file")->required();
      on(c, [&, f] { return f(S, a1); });
    };
    add1("check", "load and summarize", group_check);
    add1("aut", "automorphism group", group_aut);
    add1("complete", "trivial centre and no outer automorphisms", group_complete);
    add1("suitable", "suitability", group_suitable);
    auto* loc = grp->add_subcommand("localization", "is eta a localization");
    loc->add_option("--eta", a1, "hom file")->required();
    on(loc, [&] { return group_localization(S, a1); });
    auto* soc = grp->add_subcommand("socle", "H-socle of G");
    soc->add_option("hgroup", a1, "the group H")->required();
    soc->add_option("ggroup", a2, "the ambient group G")->required();
    on(soc, [&] { return group_socle(S, a1, a2); });
  }

  auto* wrd = app.add_subcommand("word", "words in a scheme")->require_subcommand(1);
  {
    auto* r = wrd->add_subcommand("reduce", "free and amalgam/Britton reduction");
    r->add_option("scheme", a1)->required();
    r->add_option("word", a2)->required();
    on(r, [&] { return word_reduce(S, a1, a2); });
    auto* i = wrd->add_subcommand("invert", "inverse");
    i->add_option("scheme", a1)->required();
    i->add_option("word", a2)->required();
    on(i, [&] { return word_invert(S, a1, a2); });
  }

  auto* amg = app.add_subcommand("amalgam", "amalgamated products")->require_subcommand(1);
  {
    auto* nf = amg->add_subcommand("nf", "normal form");
    nf->add_option("scheme", a1)->required();
    nf->add_option("word", a2)->required();
    on(nf, [&] { return amalgam_nf(S, a1, a2); });
    auto* tc = amg->add_subcommand("torsion-conj",
                                   "conjugate a finite subgroup into a factor");
    tc->add_option("scheme", a1)->required();
    tc->add_option("generators", list)->required();
    on(tc, [&] { return amalgam_torsion(S, a1, list); });
    auto* cc = amg->add_subcommand("centralizer-check",
                                   "x centralizing a factor subgroup");
    cc->add_option("scheme", a1)->required();
    cc->add_option("--side", a2, "left or right")->required();
    cc->add_option("--x", a3, "the centralizing word")->required();
    cc->add_option("generators", list)->required();
    on(cc, [&] { return amalgam_centralizer(S, a1, a2, a3, list); });
  }

  auto* hnn = app.add_subcommand("hnn", "HNN extensions")->require_subcommand(1);
  {
    auto* r = hnn->add_subcommand("reduce", "Britton reduction");
    r->add_option("scheme", a1)->required();
    r->add_option("word", a2)->required();
    on(r, [&] { return hnn_reduce(S, a1, a2); });
    auto* ri = hnn->add_subcommand(
        "realize-iso", "conjugate H x 1 onto 1 x H along pi in H x H");
    ri->add_option("group", a1, "a complete group")->required();
    ri->add_option("--pi", pi, "automorphism index")->capture_default_str();
    ri->add_option("--ref", ref_copy, "reference copy: diagonal or left")
        ->capture_default_str();
    on(ri, [&] { return hnn_realize_iso(S, a1, pi, ref_copy); });
    auto* mc = hnn->add_subcommand("make-conjugate",
                                   "adjoin t with t^-1 f t = target");
    mc->add_option("scheme", a1)->required();
    mc->add_option("f", a2)->required();
    mc->add_option("target", a3)->required();
    on(mc, [&] { return hnn_make_conjugate(S, a1, a2, a3); });
  }

  auto* sc = app.add_subcommand("sc", "small cancellation")->require_subcommand(1);
  {
    auto* t = sc->add_subcommand("tau", "the relator word tau");
    t->add_option("scheme", a1, "scheme with x0, x1 (default Z/5 * Z/7)");
    t->add_option("--n", n)->capture_default_str();
    t->add_flag("--quiet", quiet, "omit the word");
    on(t, [&] { return sc_tau(S, a1, n, quiet); });
    auto* c = sc->add_subcommand("certify", "metric condition C'(1/10)");
    c->add_option("scheme", a1)->required();
    on(c, [&] { return sc_certify(S, a1); });
    auto* d = sc->add_subcommand("decide", "Dehn algorithm");
    d->add_option("scheme", a1)->required();
    d->add_option("word", a2)->required();
    on(d, [&] { return sc_decide(S, a1, a2); });
    auto* p = sc->add_subcommand("probe", "malnormality of both factors");
    p->add_option("scheme", a1, "scheme (default tau with n = 80)");
    on(p, [&] { return sc_probe(S, a1); });
    auto* o = sc->add_subcommand("obstruct", "extension obstruction");
    o->add_option("scheme", a1)->required();
    on(o, [&] { return sc_obstruct(S, a1); });
  }

  auto* uni = app.add_subcommand("universe", "addressed approximations")
                  ->require_subcommand(1);
  {
    auto* as = uni->add_subcommand("assign", "address a scheme's tracked set");
    as->add_option("scheme", a1)->required();
    as->add_option("--u", a2, "blocks, e.g. \"0 1 3\"");
    as->add_option("--out", a3, "write the u-group file here");
    on(as, [&] { return universe_assign(S, a1, a2, a3); });
    auto* ch = uni->add_subcommand("check", "u-group clauses");
    ch->add_option("ugroup", a1)->required();
    on(ch, [&] { return universe_check(S, a1); });
    auto* co = uni->add_subcommand("code", "codes up to strong isomorphism");
    co->add_option("--session", a1, "session file");
    co->add_option("ugroups", list);
    on(co, [&] { return universe_code(S, a1, list); });
    auto* pr = uni->add_subcommand("probe", "poset clauses on a generated family");
    pr->add_option("--count", count)->capture_default_str();
    on(pr, [&] { return universe_probe(S, count); });
    auto* dd = uni->add_subcommand("density-dom", "extend the domain by a block");
    dd->add_option("ugroup", a1)->required();
    dd->add_option("--alpha", alpha)->required();
    dd->add_option("--allowed", a4, "allowed blocks (default alpha)");
    dd->add_option("--group", dom_group, "group placed in block alpha")
        ->capture_default_str();
    on(dd, [&] { return universe_density_dom(S, a1, alpha, a4, dom_group); });
    auto* ds = uni->add_subcommand("density-simple",
                                   "make x a product of conjugates of y");
    ds->add_option("ugroup", a1)->required();
    ds->add_option("--x", a2)->required();
    ds->add_option("--y", a3)->required();
    on(ds, [&] { return universe_density_simple(S, a1, a2, a3); });
  }

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    int code = app.exit(e);
    return code == 0 ? ok : bad_input;
  }
  try {
    S.budget = budget ? *budget : env_budget(S.budget);
    int code = action ? action() : bad_input;
    out.flush();
    return code;
  } catch (InputError const& e) {
    out.flush();
    std::cerr << "error: " << e.what() << "\n";
    return bad_input;
  } catch (BudgetExceeded const& e) {
    out.flush();
    std::cerr << "budget: " << e.what() << "\n";
    return undecided;
  } catch (Undecidable const& e) {
    out.flush();
    std::cerr << "undecided: " << e.what() << "\n";
    return undecided;
  } catch (std::exception const& e) {
    out.flush();
    std::cerr << "error: " << e.what() << "\n";
    return bad_input;
  }
}
