#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kbz {

/// Caller passed something outside an operation's contract.
class invalid_input : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A value left the mathematical domain of an operation (e.g. a point on
/// or outside the unit ball).
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed bytes while decoding a file or wire payload. Carries the byte
/// offset at which decoding failed.
class decode_error : public std::runtime_error {
 public:
  decode_error(const std::string& msg, std::size_t byte_offset)
      : std::runtime_error(msg + " (at byte offset " +
                           std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}

  std::size_t byte_offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// A ranking was applied to a codebook it was not computed from.
class stale_ranking_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem-level failure (open, read, write, rename).
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kbz
