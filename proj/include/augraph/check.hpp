#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace augraph {

namespace detail {
template <typename... Args>
std::string cat(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}
}  // namespace detail

// Invalid caller-supplied configuration or arguments.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Shape mismatches, broken invariants, I/O failures.
class RuntimeFault : public std::runtime_error {
 public:
  explicit RuntimeFault(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace augraph

#define AUG_CHECK(cond, ...)                                             \
  do {                                                                   \
    if (!(cond))                                                         \
      throw ::augraph::RuntimeFault(::augraph::detail::cat(__VA_ARGS__)); \
  } while (0)

#define AUG_CHECK_ARG(cond, ...)                                        \
  do {                                                                  \
    if (!(cond))                                                        \
      throw ::augraph::ConfigError(::augraph::detail::cat(__VA_ARGS__)); \
  } while (0)
