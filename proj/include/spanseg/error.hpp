#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spanseg {

// Malformed input text (corpus lines, config files, CAS lists).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A caller broke a documented precondition (gap in spans, shape mismatch...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Training diverged or a gradient became non-finite.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spanseg
