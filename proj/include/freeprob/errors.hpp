#pragma once

#include <stdexcept>
#include <string>

namespace freeprob {

/// Bad caller input: malformed measures, violated preconditions,
/// out-of-range parameters. Maps to CLI exit code 2.
class invalid_input : public std::invalid_argument {
 public:
  explicit invalid_input(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical procedure failed to converge or left its trusted domain
/// (Newton divergence, quadrature breakdown, renormalization drift).
/// Maps to CLI exit code 3.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace freeprob
