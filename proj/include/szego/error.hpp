#ifndef SZEGO_ERROR_HPP
#define SZEGO_ERROR_HPP

#include <stdexcept>
#include <string>

namespace szego {

// Invalid user input: bad parameters, unknown names, malformed config.
// The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical routine failed its own contract (non-convergence, clip
// violation, degenerate Fermi level, ...). The CLI maps this to exit code 1.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace szego

#endif // SZEGO_ERROR_HPP
