#pragma once

#include <stdexcept>
#include <string>

namespace sarplan {

// Bad input: malformed data files, out-of-range values, inconsistent
// configuration. The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Lookup of an entity that does not exist (observer id, case id).
class NotFoundError : public ValidationError {
 public:
  explicit NotFoundError(const std::string& what) : ValidationError(what) {}
};

// Failure inside an optimizer or evaluation run on otherwise valid input,
// e.g. an enumeration that would exceed its configured budget. Exit code 2.
class SolveError : public std::runtime_error {
 public:
  explicit SolveError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sarplan
