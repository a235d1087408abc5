#ifndef SMOOTHLAB_ERRORS_HPP
#define SMOOTHLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace smoothlab {

// Bad model/grid/run parameters (caller mistakes).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure during a computation (drift blow-up, solver breakdown).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// I/O and run-orchestration failures (lock held, unwritable directory).
class RunError : public std::runtime_error {
 public:
  explicit RunError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace smoothlab

#endif
