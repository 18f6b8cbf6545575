#pragma once

#include <stdexcept>
#include <string>

namespace idiolect {

// Input that could not be decoded at all (bad JSON line, unreadable file).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Well-formed input that violates a contract (duplicate id, missing field,
// label not present, insufficient documents, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Endpoint or network failure, surfaced after retries are exhausted.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace idiolect
