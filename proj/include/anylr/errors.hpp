#pragma once

#include <stdexcept>
#include <string>

namespace anylr {

// Exit-code mapping used by the CLI: ConfigError -> 2, DivergenceError -> 3,
// IoError -> 4.

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& what, long at_step)
      : std::runtime_error(what), step(at_step) {}
  long step;
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace anylr
