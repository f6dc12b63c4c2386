// Line-oriented reading helpers shared by the group, scheme and hom parsers.

#ifndef FORGE_TEXT_HPP_
#define FORGE_TEXT_HPP_

#include <cstddef>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "forge/errors.hpp"

namespace forge {

  inline std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
      return {};
    }
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
  }

  inline std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream       in{std::string(s)};
    std::string              tok;
    while (in >> tok) {
      out.push_back(tok);
    }
    return out;
  }

  // Yields non-blank, non-comment lines together with their 1-based line
  // numbers.
  class LineCursor {
   public:
    explicit LineCursor(std::istream& in) {
      std::string line;
      std::size_t no = 0;
      while (std::getline(in, line)) {
        ++no;
        auto t = trim(line);
        if (t.empty() || t[0] == '#') {
          continue;
        }
        lines_.push_back({no, std::move(t)});
      }
    }

    bool done() const noexcept {
      return pos_ >= lines_.size();
    }

    std::string const& peek() const {
      if (done()) {
        throw InputError("unexpected end of input");
      }
      return lines_[pos_].text;
    }

    std::size_t line_no() const noexcept {
      return done() ? (lines_.empty() ? 0 : lines_.back().no) : lines_[pos_].no;
    }

    std::string next() {
      std::string s = peek();
      ++pos_;
      return s;
    }

    [[noreturn]] void fail(std::string const& what) const {
      throw InputError(what, line_no());
    }

   private:
    struct Line {
      std::size_t no;
      std::string text;
    };
    std::vector<Line> lines_;
    std::size_t       pos_ = 0;
  };

  inline std::size_t parse_count(std::string const& tok, LineCursor const& c) {
    std::size_t v = 0;
    if (tok.empty()) {
      c.fail("expected a number");
    }
    for (char ch : tok) {
      if (ch < '0' || ch > '9') {
        c.fail("expected a number, got '" + tok + "'");
      }
      v = v * 10 + static_cast<std::size_t>(ch - '0');
    }
    return v;
  }

}  // namespace forge

#endif  // FORGE_TEXT_HPP_
