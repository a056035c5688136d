#pragma once

#include <stdexcept>
#include <string>

namespace lineval {

// Malformed or inconsistent external data (files, schemas, flag values).
// The CLI maps this to a dedicated exit code.
class InputError : public std::runtime_error {
public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A computation that cannot produce a defined result (undefined metric,
// under-constrained solve, divergence).
class ComputeError : public std::runtime_error {
public:
  explicit ComputeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lineval
