#pragma once

#include <vector>

#include "ht/special.hpp"

namespace ht {

// Local factor N(X, Z) / D(X, Z) with X = p^(-w1), Z = p^(-w2).
struct Monomial {
  int i = 0;
  int j = 0;
  Real c;
};

struct EulerFactor {
  Real w1 = 1;
  Real w2 = 1;
  std::vector<Monomial> num;
  std::vector<Monomial> den;
  bool odd_primes_only = false;

  Real local(i64 p) const;
};

struct EulerOptions {
  i64 direct_cutoff = 1000;
  double max_weight = 12;
};

// prod over primes, direct up to the cutoff, then the log series against
// prime zeta tails. error is the truncation estimate plus rounding.
Certified euler_product(const EulerFactor& f, const EulerOptions& opt = {});

} // namespace ht
