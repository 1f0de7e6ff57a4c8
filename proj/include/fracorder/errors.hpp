#pragma once

#include <stdexcept>
#include <string>

namespace fracorder {

// Bad user input: config files, expressions, mesh files. CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Text input that failed to parse; carries a 1-based line number when known.
struct ParseError : ConfigError {
  ParseError(const std::string& what, int line = 0)
      : ConfigError(line > 0 ? what + " (line " + std::to_string(line) + ")" : what), line(line) {}
  int line;
};

// A numerical component could not deliver its contract. CLI exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fracorder
