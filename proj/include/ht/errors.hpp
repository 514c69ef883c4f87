#pragma once

#include <stdexcept>
#include <string>

namespace ht {

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct RangeError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Evaluation at a pole of zeta, Gamma or a closed form built from them.
struct PoleError : std::domain_error {
  using std::domain_error::domain_error;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A census produced data contradicting an exact theorem; always a bug.
struct IntegrityError : std::logic_error {
  using std::logic_error::logic_error;
};

} // namespace ht
