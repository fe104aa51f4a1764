#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cardioemu {

// Vector or matrix passed across a module boundary has the wrong size.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Integration, loss evaluation or sampling produced a non-finite value.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::ptrdiff_t step_index = -1)
      : std::runtime_error(what), step_index_(step_index) {}

  std::ptrdiff_t step_index() const { return step_index_; }

 private:
  std::ptrdiff_t step_index_;
};

// Dataset files or samples violate the manifest schema.
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration values or inconsistent option combinations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// All calibration starts failed or the chain is unusable.
class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cardioemu
