#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "vnlcm/ir.hpp"

namespace vnlcm {

/// Raised for malformed module text. `line` and `column` are 1-based and
/// point at the offending token.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line, int column);

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Parses the textual IR. Rejects syntax errors, duplicate SSA
/// definitions, duplicate block labels or function names, and references to
/// unknown labels.
Module parse_module(std::string_view text);

}  // namespace vnlcm
