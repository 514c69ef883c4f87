#pragma once

#include <map>
#include <vector>

#include "ht/arith.hpp"
#include "ht/heegner.hpp"

namespace ht {

/// Solution of l m^k = l^2 n^2 + t^2 d with l | d squarefree and gcd(m, n t d) = 1.
struct TorsionTuple {
  i64 l = 1, m = 1, n = 1, t = 1;
  int k = 3;

  bool operator==(const TorsionTuple&) const = default;
  auto operator<=>(const TorsionTuple&) const = default;
};

inline constexpr int kMaxTorsionOrder = 9;
inline constexpr double kTupleCensusWorkLimit = 5e8;

void check_torsion_order(int k);
// (l m^k - l^2 n^2) / t^2; throws DomainError when not a positive integer
i64 tuple_discriminant(const TorsionTuple& T);
bool tuple_satisfies(const TorsionTuple& T, i64 d);

PrimitiveIdeal tuple_to_ideal(const TorsionTuple& T, i64 d);

enum class TupleStatus {
  found,
  not_torsion,
  // a^k principal but outside the tuple set: only (sqrt(-d)) itself
  outside_parametrization,
};

struct IdealTupleResult {
  TupleStatus status = TupleStatus::not_torsion;
  TorsionTuple tuple;
  // the tuple maps to the conjugate ideal rather than to a itself
  bool conjugate = false;
};

IdealTupleResult ideal_to_tuple(const PrimitiveIdeal& a, int k);

// a^k as content * primitive ideal
IdealProduct ideal_power(const PrimitiveIdeal& a, int k);

// all tuples for d with l m <= Nmax, sorted
std::vector<TorsionTuple> enumerate_tuples(i64 d, int k, i64 Nmax);
std::vector<TorsionTuple> enumerate_tuples(i64 d, int k, double B);

struct TupleCensus {
  i64 count = 0;
  std::map<i64, i64> per_d;  // filled when requested
};

// Tuples over all valid d <= D with l m <= Y sqrt(d).
TupleCensus tuple_census(i64 D, const Rational& Y, int k, int shards = 1, bool per_d = false);

} // namespace ht
