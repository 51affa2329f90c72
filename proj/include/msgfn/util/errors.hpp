#pragma once

#include <stdexcept>
#include <string>

namespace msgfn {

/// Shape mismatch between operands.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A NaN or infinity appeared where finite values are required.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed level text. Row and column are zero-based; -1 when not applicable.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int row = -1, int col = -1)
      : std::runtime_error(what + (row >= 0 ? " at row " + std::to_string(row) +
                                                  (col >= 0 ? ", col " + std::to_string(col) : "")
                                            : "")),
        row_(row),
        col_(col) {}
  int row() const { return row_; }
  int col() const { return col_; }

 private:
  int row_;
  int col_;
};

/// Invalid configuration; field() names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Corrupt or incompatible checkpoint / model file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace msgfn
