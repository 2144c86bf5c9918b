// Error types shared by all encrand components.

#pragma once

#include <stdexcept>
#include <string>

namespace encrand {

// Base class for every error the library raises on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid session parameters. `assumption()` returns the number of the
// violated protocol assumption, or 0 when the check is structural.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, int assumption = 0)
      : Error(what), assumption_(assumption) {}
  int assumption() const { return assumption_; }

 private:
  int assumption_;
};

class PoolExhausted : public Error {
 public:
  using Error::Error;
};

// Checksum of the recovered payload does not match the packet header.
class WrongFunction : public Error {
 public:
  using Error::Error;
};

// No pool function decodes the packet; the packet is corrupted.
class NoCandidate : public Error {
 public:
  using Error::Error;
};

// Two or more pool functions decode the packet. The session aborts
// instead of guessing.
class AmbiguousDecrypt : public Error {
 public:
  using Error::Error;
};

class BlockOverflow : public Error {
 public:
  using Error::Error;
};

class IncompleteBlock : public Error {
 public:
  using Error::Error;
};

class CorruptBlock : public Error {
 public:
  using Error::Error;
};

class IncompleteCollection : public Error {
 public:
  using Error::Error;
};

class TagCollision : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace encrand
