#pragma once

#include <stdexcept>
#include <string>

namespace gridvest {

/// Malformed or inconsistent input data (CLI exit code 2).
class InputError : public std::runtime_error {
public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// A solve that could not produce a usable answer (CLI exit code 1).
class SolveError : public std::runtime_error {
public:
  explicit SolveError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gridvest
