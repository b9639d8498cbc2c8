#pragma once

#include <stdexcept>

namespace beamprint {

/// Invalid or unreadable configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dataset missing, malformed, or inconsistent with a recipe (exit code 3).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Model file unreadable or schema-incompatible with a dataset (exit code 4).
struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace beamprint
