#pragma once

#include <stdexcept>
#include <string>

namespace catval {

// A file exists but its contents are malformed. Carries the 1-based line
// number of the offending record.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

// Well-formed input whose records violate a cross-record constraint
// (k mismatch, count out of range, hash mismatch).
class IntegrityError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem-level failure: missing input, unreadable or unwritable path.
class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace catval
