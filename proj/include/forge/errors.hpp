#ifndef FORGE_ERRORS_HPP_
#define FORGE_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace forge {

  // Base class of everything the library throws on purpose.
  class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
  };

  // Malformed input: files, words, schemes, hypotheses of an operation.
  class InputError : public Error {
   public:
    using Error::Error;

    InputError(std::string const& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept {
      return line_;
    }

   private:
    std::size_t line_ = 0;
  };

  // A configured enumeration or search budget ran out.
  class BudgetExceeded : public Error {
   public:
    using Error::Error;
  };

  // The implemented criteria cannot decide the question (cyclic membership
  // window, order certification, Dehn dichotomy gap).
  class Undecidable : public Error {
   public:
    using Error::Error;
  };

}  // namespace forge

#endif  // FORGE_ERRORS_HPP_
