#pragma once
#ifndef FLUXCOMPOSE_ERROR_HPP
#define FLUXCOMPOSE_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fluxcompose {

/// Base of every error raised by the library. Errors that come from a text
/// source carry a 1-based line/column; 0 means "no position".
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : std::runtime_error(what), line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  bool hasPosition() const { return line_ != 0; }

  /// "file:line:col: message" when a position is known.
  std::string describe(const std::string& source) const {
    std::string out = source;
    if (hasPosition()) {
      out += ":" + std::to_string(line_) + ":" + std::to_string(column_);
    }
    out += ": ";
    out += what();
    return out;
  }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace fluxcompose

#endif
