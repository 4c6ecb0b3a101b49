#pragma once

#include <stdexcept>
#include <string>

namespace hstl {

// Error categories mirror the CLI exit-code classes (config|io|shape|numeric).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hstl
