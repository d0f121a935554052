#pragma once

#include <stdexcept>
#include <string>

namespace mfw {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments, mismatched dimensions, unreadable configs.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Parameters outside the range where the requested object exists
/// (e.g. a birth-death chain that is not positive recurrent).
class NonErgodicParameter : public Error {
 public:
  using Error::Error;
};

/// A support truncation had to grow past its hard cap; mass is escaping.
class TruncationOverflow : public Error {
 public:
  using Error::Error;
};

/// Linear system without a unique solution (closed or singular network).
class NoUniqueSolution : public Error {
 public:
  using Error::Error;
};

/// Certificate search had nothing to search over.
class NoCandidate : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Broken internal invariant; never expected in correct use.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace mfw
