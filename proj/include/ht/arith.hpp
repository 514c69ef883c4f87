#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "ht/errors.hpp"

namespace ht {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;
using u128 = unsigned __int128;

i64 gcd(i64 a, i64 b);

struct ExtGcd {
  i64 g, x, y; // a*x + b*y = g >= 0
};
ExtGcd ext_gcd(i64 a, i64 b);

// floor division and nonnegative remainder for a signed numerator
i64 floor_div(i64 a, i64 b);
i64 mod_floor(i64 a, i64 m);
i128 mod_floor128(i128 a, i128 m);

// floor(sqrt(n)), exact
u64 isqrt(u64 n);
u128 isqrt128(u128 n);
bool is_square(u64 n, u64* root = nullptr);
bool is_square128(u128 n, u128* root = nullptr);

// throws DomainError when gcd(t, m) != 1
i64 mod_inverse(i64 t, i64 m);
i64 mul_mod(i64 a, i64 b, i64 m);
i64 pow_mod(i64 a, u64 e, i64 m);

// Jacobi symbol (a/n) for odd n > 0
int kronecker_symbol(i64 a, i64 n);

// checked i128 -> i64 narrowing
i64 narrow(i128 v);
// b^e, throws ResourceError on overflow of i128
i128 checked_pow(i64 b, int e);

/// Positive rational p/q in lowest terms. Accepts "3", "1/2" and "0.25".
struct Rational {
  i64 p = 1;
  i64 q = 1;

  Rational() = default;
  Rational(i64 num, i64 den = 1);

  static Rational parse(const std::string& text);
  std::string str() const;
  double value() const { return double(p) / double(q); }
  bool operator==(const Rational& o) const { return p == o.p && q == o.q; }
};

// floor(Y*sqrt(d)): the largest admissible norm under the cut N <= Y*sqrt(d)
i64 norm_cut(i64 d, const Rational& Y);
// N <= Y*sqrt(d), decided exactly
bool within_norm_cut(i64 N, i64 d, const Rational& Y);

using Factorization = std::vector<std::pair<i64, int>>;

Factorization factor_trial(i64 n);
std::vector<int> primes_upto(int n);
int mobius_trial(i64 n);
bool is_squarefree_trial(i64 n);
// squarefree, d = 2 mod 4
bool is_valid_discriminant(i64 d);
void check_discriminant(i64 d);

class SquarefreeTable {
public:
  explicit SquarefreeTable(i64 limit);

  i64 limit() const { return limit_; }
  bool test(i64 n) const { return flags_[std::size_t(n)]; }

private:
  i64 limit_;
  std::vector<bool> flags_;
};

// throws RangeError for n > table.limit()
bool is_squarefree(i64 n, const SquarefreeTable& table);

class SmallestFactorTable {
public:
  explicit SmallestFactorTable(i64 limit);

  i64 limit() const { return limit_; }
  // falls back to trial division above limit
  Factorization factor(i64 n) const;
  std::uint32_t spf(i64 n) const { return spf_[std::size_t(n)]; }

private:
  i64 limit_;
  std::vector<std::uint32_t> spf_;
};

struct SieveOptions {
  std::size_t segment = std::size_t(1) << 18;
  // cap on the number of returned discriminants
  std::size_t max_output = std::size_t(1) << 26;
};

// squarefree d = 2 mod 4 in [lo, hi], ascending
std::vector<i64> sieve_discriminants(i64 lo, i64 hi, const SieveOptions& opt = {});
void for_each_discriminant(i64 lo, i64 hi, const std::function<void(i64)>& fn,
                           std::size_t segment = std::size_t(1) << 18);

// all x mod M with x^2 = c mod M, sorted; M >= 1
std::vector<i64> sqrt_mod(i64 c, i64 M);
std::vector<i64> sqrt_mod(i64 c, i64 M, const Factorization& fM);

std::vector<i64> divisors(const Factorization& f);

} // namespace ht
