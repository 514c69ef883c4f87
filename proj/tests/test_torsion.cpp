#include <doctest.h>

#include <set>

#include "ht/classgroup.hpp"
#include "ht/torsion.hpp"

using namespace ht;

namespace {

// tuples by exhaustive search over l | d, m, t with l m <= Nmax
std::vector<TorsionTuple> brute_tuples(i64 d, int k, i64 Nmax) {
  std::vector<TorsionTuple> out;
  for (i64 l = 1; l <= Nmax; ++l) {
    if (d % l) continue;
    for (i64 m = 1; l * m <= Nmax; ++m) {
      const i128 lhs = i128(l) * checked_pow(m, k);
      for (i64 t = 1; i128(t) * t * d < lhs; ++t) {
        const i128 rest = lhs - i128(t) * t * d;
        if (rest % (i128(l) * l)) continue;
        u128 n = 0;
        if (!is_square128(u128(rest / (i128(l) * l)), &n) || n == 0) continue;
        if (gcd(m, i64(n) * t) != 1 || gcd(m, d) != 1) continue;
        out.push_back({l, m, i64(n), t, k});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

TEST_CASE("torsion order validation") {
  for (int k : {3, 5, 7, 9}) CHECK_NOTHROW(check_torsion_order(k));
  for (int k : {1, 2, 4, 11}) CHECK_THROWS_AS(check_torsion_order(k), DomainError);
}

TEST_CASE("tuple enumeration matches exhaustive search") {
  for (int k : {3, 5}) {
    for (i64 d = 2; d <= 600; d += 4) {
      if (!is_valid_discriminant(d)) continue;
      const i64 Nmax = norm_cut(d, Rational(3));
      CHECK(enumerate_tuples(d, k, Nmax) == brute_tuples(d, k, Nmax));
    }
  }
}

TEST_CASE("tuple identity and discriminant") {
  const TorsionTuple T{1, 3, 1, 1, 3};  // 27 = 1 + 26
  CHECK(tuple_discriminant(T) == 26);
  CHECK(tuple_satisfies(T, 26));
  CHECK_FALSE(tuple_satisfies(T, 30));
  CHECK_THROWS_AS(tuple_discriminant({1, 2, 3, 1, 3}), DomainError);
}

TEST_CASE("tuples map to torsion ideals and back") {
  for (int k : {3, 5, 7}) {
    for (i64 d = 2; d <= 3000; d += 4) {
      if (!is_valid_discriminant(d)) continue;
      for (const auto& T : enumerate_tuples(d, k, norm_cut(d, Rational(2)))) {
        const PrimitiveIdeal a = tuple_to_ideal(T, d);
        CHECK(a.N == T.l * T.m);
        // a^k is principal
        CHECK(ideal_class_form(ideal_power(a, k).ideal) == identity_form(d));
        const IdealTupleResult r = ideal_to_tuple(a, k);
        REQUIRE(r.status == TupleStatus::found);
        CHECK(r.tuple == T);
        CHECK_FALSE(r.conjugate);
      }
    }
  }
}

TEST_CASE("sqrt(-d) lies outside the parametrization") {
  for (i64 d : {6, 14, 30, 2006}) {
    const PrimitiveIdeal a = make_ideal(d, d, 0);
    CHECK(ideal_to_tuple(a, 3).status == TupleStatus::outside_parametrization);
  }
  CHECK(ideal_to_tuple(make_ideal(14, 3, 1), 3).status == TupleStatus::not_torsion);
}

TEST_CASE("ideal power norm") {
  for (const auto& x : enumerate_primitive_ideals(i64(1886), i64(40))) {
    const IdealProduct p = ideal_power(x, 3);
    i64 n = x.N * x.N * x.N;
    CHECK(p.content * p.content * p.ideal.N == n);
  }
}

TEST_CASE("tuple census sums per-d enumeration") {
  for (int k : {3, 5}) {
    const Rational Y(3, 2);
    const TupleCensus c = tuple_census(5000, Y, k, 1, true);
    i64 total = 0;
    for (i64 d = 1; d <= 5000; ++d) {
      if (!is_valid_discriminant(d)) continue;
      const i64 n = i64(enumerate_tuples(d, k, norm_cut(d, Y)).size());
      total += n;
      const auto it = c.per_d.find(d);
      CHECK((it == c.per_d.end() ? 0 : it->second) == n);
    }
    CHECK(c.count == total);
    CHECK(tuple_census(5000, Y, k, 3).count == total);
  }
}

TEST_CASE("tuple census refuses oversized work") {
  CHECK_THROWS_AS(tuple_census(100000000, Rational(50), 9), ResourceError);
}
