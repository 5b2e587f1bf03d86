#pragma once

#include <stdexcept>
#include <string>

namespace bankdensity {

// Unreadable files, malformed inputs, schema mismatches and invalid
// configuration. Maps to exit code 2.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A statistical routine was asked for a quantity that is undefined for the
// supplied data (constant regressor, zero rank variance, ...). Maps to exit
// code 3 when it escapes the pipeline.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bankdensity
