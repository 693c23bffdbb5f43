#pragma once

#include <stdexcept>
#include <string>

namespace attnseek {

// Base for every error raised by the library. Derived types let callers
// distinguish corrupt input files from bad configuration.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad magic, unsupported version or an unparseable manifest.
class format_error : public error {
 public:
  using error::error;
};

// Tensor file and manifest disagree on sizes, or the file is truncated.
class integrity_error : public error {
 public:
  using error::error;
};

// A structural or numeric invariant does not hold (row sums, ranges, spans).
class validation_error : public error {
 public:
  using error::error;
};

// A word or candidate occurrence cannot be mapped onto model tokens.
class alignment_error : public error {
 public:
  using error::error;
};

// Vector/matrix shapes passed to a numeric routine do not agree.
class dimension_error : public error {
 public:
  using error::error;
};

// The input is well-formed but mathematically degenerate (e.g. n = 0).
class degenerate_input_error : public error {
 public:
  using error::error;
};

class config_error : public error {
 public:
  using error::error;
};

// Corpus parse failure; the message carries the line number.
class parse_error : public error {
 public:
  using error::error;
};

class io_error : public error {
 public:
  using error::error;
};

}  // namespace attnseek
