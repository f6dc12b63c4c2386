// Scheme, hom and u-group files.
//
// Scheme files describe one tower node and optional trailer lines:
//
//   base <ref>                      a single finite leaf
//   amalgam                         left, right and shared pairs
//   left <ref>
//   right <ref>
//   shared
//   L: <word> R: <word>
//   hnn                             base, letter and associated pairs
//   base <ref>
//   letter t<k>
//   A: <word> B: <word>
//
// A pair list containing "1" paired with "1" lists a finite subgroup in
// full; a single pair without it names generators of cyclic subgroups.
// <ref> is a builtin group (cyclic:n, symmetric:n, alternating:n,
// dihedral:n, quaternion, klein), a .grp file or a nested .scheme file,
// paths relative to the referring file.  Leaves are numbered f1, f2, ...
// in order of appearance, nested letters keep their numbers after the
// letters already used.
//
// Trailer lines: "param <name> <value>", "relator <word>", "track <word>",
// "norm f<id> <block>", "norm t<id> <block>".

#ifndef FORGE_IO_HPP_
#define FORGE_IO_HPP_

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "forge/errors.hpp"
#include "forge/fingrp.hpp"
#include "forge/text.hpp"
#include "forge/tower.hpp"
#include "forge/universe.hpp"
#include "forge/words.hpp"

namespace forge {

  struct Scheme {
    TowerPtr                           group;
    std::map<std::string, std::string> params;
    std::vector<SyllableWord>          relators;
    std::vector<SyllableWord>          tracked;
    NormPolicy                         norms;
    std::string                        path;

    bool has(std::string const& k) const {
      return params.count(k) != 0;
    }
    SyllableWord word(std::string const& k) const {
      auto it = params.find(k);
      if (it == params.end()) {
        throw InputError("scheme parameter '" + k + "' missing");
      }
      auto w = parse_word(it->second);
      group->check_word(w);
      return w;
    }
    unsigned number(std::string const& k, unsigned fallback) const {
      auto it = params.find(k);
      if (it == params.end()) {
        return fallback;
      }
      try {
        std::size_t used = 0;
        auto        v    = std::stoul(it->second, &used);
        if (used != it->second.size()) {
          throw InputError("");
        }
        return static_cast<unsigned>(v);
      } catch (std::exception const&) {
        throw InputError("scheme parameter '" + k + "' is not a number");
      }
    }
  };

  namespace detail {

    namespace fs = std::filesystem;

    inline std::string slurp(fs::path const& p) {
      std::ifstream in(p);
      if (!in) {
        throw InputError("cannot open " + p.string());
      }
      std::ostringstream os;
      os << in.rdbuf();
      return os.str();
    }

    inline std::size_t builtin_arg(std::string const& ref, std::string const& s) {
      try {
        std::size_t used = 0;
        auto        v    = std::stoul(s, &used);
        if (used == s.size() && v > 0) {
          return v;
        }
      } catch (std::exception const&) {
      }
      throw InputError("bad size in group reference '" + ref + "'");
    }

    inline std::optional<FiniteGroup> builtin_group(std::string const& ref) {
      auto colon = ref.find(':');
      auto name  = ref.substr(0, colon);
      auto arg   = colon == std::string::npos ? std::string() : ref.substr(colon + 1);
      if (name == "cyclic") {
        return cyclic_group(builtin_arg(ref, arg));
      }
      if (name == "symmetric") {
        return symmetric_group(builtin_arg(ref, arg));
      }
      if (name == "alternating") {
        return alternating_group(builtin_arg(ref, arg));
      }
      if (name == "dihedral") {
        return dihedral_group(builtin_arg(ref, arg));
      }
      if (name == "quaternion") {
        return quaternion_group();
      }
      if (name == "klein") {
        return direct_product(cyclic_group(2), cyclic_group(2));
      }
      return std::nullopt;
    }

    struct SchemeReader;

  }  // namespace detail

  inline GroupPtr load_group(std::string const& ref,
                             std::filesystem::path const& dir = {}) {
    if (auto g = detail::builtin_group(ref)) {
      return share(std::move(*g));
    }
    auto        p = dir / ref;
    std::ifstream in(p);
    if (!in) {
      throw InputError("cannot open group file " + p.string());
    }
    try {
      return share(read_group(in));
    } catch (InputError const& e) {
      throw InputError(p.string() + ": " + e.what());
    }
  }

  namespace detail {

    struct SchemeReader {
      factor_t next_factor = 1;
      letter_t next_letter = 1;
      int      depth       = 0;
      std::size_t window   = 16;

      TowerPtr ref(std::string const& r, fs::path const& dir, LineCursor const& c) {
        if (r.size() > 7 && r.substr(r.size() - 7) == ".scheme") {
          if (depth > 16) {
            c.fail("scheme references nest too deeply");
          }
          auto p    = dir / r;
          auto text = slurp(p);
          std::istringstream in(text);
          LineCursor         sub(in);
          ++depth;
          TowerPtr t;
          try {
            t = node(sub, p.parent_path());
          } catch (InputError const& e) {
            throw InputError(p.string() + ": " + e.what());
          }
          --depth;
          return t;
        }
        try {
          return TowerGroup::base(next_factor++, load_group(r, dir));
        } catch (InputError const& e) {
          c.fail(e.what());
        }
      }

      static std::string value(std::string const& line, std::size_t skip) {
        return trim(std::string_view(line).substr(skip));
      }

      // Pairs "X: <word> Y: <word>" until another keyword.
      Association pairs(LineCursor& c, std::string const& x,
                               std::string const& y) {
        std::vector<SyllableWord> l, r;
        bool                      identity = false;
        while (!c.done() && c.peek().rfind(x, 0) == 0) {
          auto line = c.peek();
          auto at   = line.find(" " + y);
          if (at == std::string::npos) {
            c.fail("expected '" + x + " <word> " + y + " <word>'");
          }
          try {
            l.push_back(parse_word(line.substr(x.size(), at - x.size())));
            r.push_back(parse_word(line.substr(at + 1 + y.size())));
          } catch (InputError const& e) {
            c.fail(e.what());
          }
          identity = identity || (l.back().empty() && r.back().empty());
          c.next();
        }
        if (l.empty()) {
          return Association::trivial();
        }
        if (!identity) {
          if (l.size() != 1) {
            c.fail("a pair list without the identity pair must name one "
                   "generator pair");
          }
          return Association::cyclic(l.front(), r.front(), window);
        }
        return Association::finite(std::move(l), std::move(r));
      }

      TowerPtr node(LineCursor& c, fs::path const& dir) {
        auto head = split_ws(c.peek());
        if (head.empty()) {
          c.fail("empty scheme");
        }
        try {
          if (head[0] == "base" && head.size() == 2) {
            c.next();
            return ref(head[1], dir, c);
          }
          if (head[0] == "amalgam" && head.size() == 1) {
            c.next();
            auto l = split_ws(c.peek());
            if (l.size() != 2 || l[0] != "left") {
              c.fail("expected 'left <ref>'");
            }
            c.next();
            auto lt = ref(l[1], dir, c);
            auto r  = split_ws(c.peek());
            if (r.size() != 2 || r[0] != "right") {
              c.fail("expected 'right <ref>'");
            }
            c.next();
            auto rt = ref(r[1], dir, c);
            // nested letters of the right side move past the left ones
            if (!rt->letters().empty() && !lt->letters().empty()) {
              rt = shift_ids(rt, 0, *lt->letters().rbegin());
            }
            auto a = Association::trivial();
            if (!c.done() && c.peek() == "shared") {
              c.next();
              a = pairs(c, "L:", "R:");
            }
            return TowerGroup::amalgam(lt, rt, a);
          }
          if (head[0] == "hnn" && head.size() == 1) {
            c.next();
            auto b = split_ws(c.peek());
            if (b.size() != 2 || b[0] != "base") {
              c.fail("expected 'base <ref>'");
            }
            c.next();
            auto bt = ref(b[1], dir, c);
            auto l  = split_ws(c.peek());
            if (l.size() != 2 || l[0] != "letter") {
              c.fail("expected 'letter t<k>'");
            }
            auto t = parse_genref(l[1]);
            if (!t.is_letter() || t.sign() != 1) {
              c.fail("expected a stable letter t<k>");
            }
            c.next();
            auto a = pairs(c, "A:", "B:");
            return TowerGroup::hnn(bt, t.id(), a);
          }
        } catch (InputError const& e) {
          if (e.line() != 0 || std::string(e.what()).find("line ") == 0) {
            throw;
          }
          c.fail(e.what());
        }
        c.fail("expected 'base <ref>', 'amalgam' or 'hnn'");
      }
    };

  }  // namespace detail

  inline Scheme read_scheme(std::istream& in, std::filesystem::path const& dir = {},
                            std::size_t window = 16) {
    LineCursor            c(in);
    detail::SchemeReader  rd;
    rd.window = window;
    Scheme                s;
    s.group = rd.node(c, dir);
    while (!c.done()) {
      auto line = c.peek();
      auto toks = split_ws(line);
      try {
        if (toks[0] == "param" && toks.size() >= 3) {
          auto at = line.find(toks[1], 5) + toks[1].size();
          s.params[toks[1]] = trim(std::string_view(line).substr(at));
        } else if (toks[0] == "relator" && toks.size() >= 2) {
          auto w = parse_word(line.substr(7));
          s.group->check_word(w);
          s.relators.push_back(w);
        } else if (toks[0] == "track" && toks.size() >= 2) {
          auto w = parse_word(line.substr(5));
          s.group->check_word(w);
          s.tracked.push_back(w);
        } else if (toks[0] == "norm" && toks.size() == 3) {
          auto kind = toks[1][0];
          if ((kind != 'f' && kind != 't') || toks[1].size() < 2) {
            c.fail("expected 'norm f<id> <block>' or 'norm t<id> <block>'");
          }
          auto id = parse_count(toks[1].substr(1), c);
          auto b  = parse_count(toks[2], c);
          if (kind == 'f') {
            s.norms.factor[static_cast<factor_t>(id)] = b;
          } else {
            s.norms.letter[static_cast<letter_t>(id)] = b;
          }
        } else {
          c.fail("unknown scheme line '" + line + "'");
        }
      } catch (InputError const& e) {
        if (std::string(e.what()).find("line ") == 0) {
          throw;
        }
        c.fail(e.what());
      }
      c.next();
    }
    return s;
  }

  inline Scheme load_scheme(std::string const& path, std::size_t window = 16) {
    auto text = detail::slurp(path);
    std::istringstream in(text);
    try {
      auto s = read_scheme(in, std::filesystem::path(path).parent_path(), window);
      s.path = path;
      return s;
    } catch (InputError const& e) {
      throw InputError(path + ": " + e.what());
    }
  }

  // hom file: "hom", "source <ref>", "target <ref>", "map <i0> <i1> ..."
  // giving the image of every source element.
  inline GroupHom read_hom(std::istream& in, std::filesystem::path const& dir = {}) {
    LineCursor c(in);
    if (c.next() != "hom") {
      c.fail("expected 'hom'");
    }
    GroupHom f;
    for (auto key : {"source", "target"}) {
      auto t = split_ws(c.peek());
      if (t.size() != 2 || t[0] != key) {
        c.fail(std::string("expected '") + key + " <ref>'");
      }
      try {
        (std::string(key) == "source" ? f.source : f.target) = load_group(t[1], dir);
      } catch (InputError const& e) {
        c.fail(e.what());
      }
      c.next();
    }
    auto t = split_ws(c.peek());
    if (t.empty() || t[0] != "map" || t.size() != f.source->order() + 1) {
      c.fail("expected 'map' with " + std::to_string(f.source->order()) + " images");
    }
    for (std::size_t k = 1; k < t.size(); ++k) {
      auto v = parse_count(t[k], c);
      if (v >= f.target->order()) {
        c.fail("image out of range");
      }
      f.images.push_back(static_cast<elem_t>(v));
    }
    if (!f.is_hom()) {
      c.fail("map is not a homomorphism");
    }
    c.next();
    if (!c.done()) {
      c.fail("trailing input after 'map'");
    }
    return f;
  }

  inline GroupHom load_hom(std::string const& path) {
    auto text = detail::slurp(path);
    std::istringstream in(text);
    try {
      return read_hom(in, std::filesystem::path(path).parent_path());
    } catch (InputError const& e) {
      throw InputError(path + ": " + e.what());
    }
  }

  // u-group file: "ugroup <scheme-ref>", "u <b> <b> ...", then one
  // "elem <alpha>.<i> <word>" line per tracked element.
  inline std::string write_ugroup(UGroup const& g, std::string const& scheme_ref) {
    std::ostringstream os;
    os << "ugroup " << scheme_ref << "\nu";
    for (auto b : g.u()) {
      os << " " << b;
    }
    os << "\n";
    for (std::size_t k = 0; k < g.size(); ++k) {
      os << "elem " << to_string(g.address(k)) << " " << to_string(g.element(k))
         << "\n";
    }
    return os.str();
  }

  struct UGroupFile {
    std::string scheme_ref;
    Scheme      scheme;
    UGroup      group;
  };

  inline UGroupFile load_ugroup(std::string const& path, UniverseConfig cfg = {},
                                std::size_t window = 16) {
    auto text = detail::slurp(path);
    std::istringstream in(text);
    LineCursor         c(in);
    try {
      auto head = split_ws(c.peek());
      if (head.size() != 2 || head[0] != "ugroup") {
        c.fail("expected 'ugroup <scheme-ref>'");
      }
      auto ref    = head[1];
      auto scheme = load_scheme(
          (std::filesystem::path(path).parent_path() / ref).string(), window);
      c.next();
      auto ut = split_ws(c.peek());
      if (ut.empty() || ut[0] != "u") {
        c.fail("expected 'u <blocks>'");
      }
      std::set<std::size_t> u;
      for (std::size_t k = 1; k < ut.size(); ++k) {
        u.insert(parse_count(ut[k], c));
      }
      c.next();
      std::vector<SyllableWord> elems;
      std::vector<Address>      addr;
      while (!c.done()) {
        auto line = c.peek();
        auto t    = split_ws(line);
        if (t.size() < 3 || t[0] != "elem") {
          c.fail("expected 'elem <alpha>.<i> <word>'");
        }
        auto dot = t[1].find('.');
        if (dot == std::string::npos) {
          c.fail("address must read <alpha>.<i>");
        }
        addr.push_back({parse_count(t[1].substr(0, dot), c),
                        parse_count(t[1].substr(dot + 1), c)});
        try {
          auto w = parse_word(line.substr(line.find(t[1]) + t[1].size()));
          scheme.group->check_word(w);
          elems.push_back(w);
        } catch (InputError const& e) {
          c.fail(e.what());
        }
        c.next();
      }
      try {
        auto g = UGroup::make(scheme.group, cfg, u, elems, addr);
        return {ref, std::move(scheme), std::move(g)};
      } catch (InputError const& e) {
        c.fail(e.what());
      }
    } catch (InputError const& e) {
      if (std::string(e.what()).find(path) == 0) {
        throw;
      }
      throw InputError(path + ": " + e.what());
    }
  }

}  // namespace forge

#endif  // FORGE_IO_HPP_
