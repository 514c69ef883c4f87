#include <doctest.h>

#include <random>

#include "ht/arith.hpp"

using namespace ht;

namespace {

bool sqfree_naive(i64 n) {
  for (i64 p = 2; p * p <= n; ++p)
    if (n % (p * p) == 0) return false;
  return true;
}

} // namespace

TEST_CASE("gcd and extended gcd") {
  CHECK(gcd(0, 0) == 0);
  CHECK(gcd(12, -18) == 6);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const i64 a = i64(rng() % 2000000) - 1000000, b = i64(rng() % 2000000) - 1000000;
    const ExtGcd e = ext_gcd(a, b);
    CHECK(e.g == gcd(a, b));
    CHECK(i128(a) * e.x + i128(b) * e.y == e.g);
  }
}

TEST_CASE("floor division and modular helpers") {
  CHECK(floor_div(-7, 2) == -4);
  CHECK(floor_div(7, 2) == 3);
  CHECK(mod_floor(-7, 5) == 3);
  CHECK(pow_mod(3, 200, 1000003) == [] {
    i64 r = 1;
    for (int i = 0; i < 200; ++i) r = r * 3 % 1000003;
    return r;
  }());
  CHECK(mod_inverse(3, 7) == 5);
  CHECK_THROWS_AS(mod_inverse(6, 9), DomainError);
  CHECK(mul_mod(i64(1) << 62, i64(1) << 61, 1000000007) ==
        i64((u128(1) << 123) % 1000000007));
}

TEST_CASE("isqrt is exact near squares") {
  for (u64 r : {u64(1), u64(3037000499ULL), u64(4294967295ULL)}) {
    CHECK(isqrt(r * r) == r);
    CHECK(isqrt(r * r - 1) == r - 1);
    u64 root = 0;
    CHECK(is_square(r * r, &root));
    CHECK(root == r);
    CHECK_FALSE(is_square(r * r + 2));
  }
  CHECK(isqrt(~u64(0)) == 4294967295ULL);
  const u128 big = u128(1) << 100;
  CHECK(isqrt128(big) == u128(1) << 50);
  CHECK(isqrt128(big - 1) == (u128(1) << 50) - 1);
}

TEST_CASE("Jacobi symbol against Euler's criterion") {
  for (int p : {3, 5, 7, 11, 101, 997})
    for (i64 a = -50; a <= 50; ++a) {
      const i64 r = pow_mod(mod_floor(a, p), u64(p - 1) / 2, p);
      const int euler = r == 0 ? 0 : (r == 1 ? 1 : -1);
      CHECK(kronecker_symbol(a, p) == euler);
    }
}

TEST_CASE("checked arithmetic") {
  CHECK(checked_pow(10, 18) == i128(1000000000000000000LL));
  CHECK_THROWS_AS(checked_pow(10, 40), ResourceError);
  CHECK_THROWS(narrow(i128(1) << 70));
}

TEST_CASE("Rational parsing") {
  CHECK(Rational::parse("1/2") == Rational(1, 2));
  CHECK(Rational::parse("0.25") == Rational(1, 4));
  CHECK(Rational::parse("6/4") == Rational(3, 2));
  CHECK(Rational::parse("3").str() == "3");
  CHECK_THROWS_AS(Rational::parse("abc"), ConfigError);
  CHECK_THROWS_AS(Rational::parse("1/0"), ConfigError);
}

TEST_CASE("norm cut is decided exactly") {
  for (i64 d : {2, 6, 10, 14, 1002, 999998})
    for (const Rational& Y : {Rational(1), Rational(1, 2), Rational(7, 3)}) {
      const i64 c = norm_cut(d, Y);
      CHECK(within_norm_cut(c, d, Y));
      CHECK_FALSE(within_norm_cut(c + 1, d, Y));
      // N <= Y sqrt(d)  <=>  N^2 q^2 <= p^2 d
      CHECK(i128(c) * c * Y.q * Y.q <= i128(Y.p) * Y.p * d);
    }
}

TEST_CASE("factorization tables agree with trial division") {
  const SmallestFactorTable spf(100000);
  for (i64 n = 2; n <= 5000; ++n) {
    const auto f = spf.factor(n);
    CHECK(f == factor_trial(n));
    i64 prod = 1;
    for (auto [p, e] : f)
      for (int i = 0; i < e; ++i) prod *= p;
    CHECK(prod == n);
  }
  CHECK(spf.factor(1000003LL * 1000033LL) == factor_trial(1000003LL * 1000033LL));
  const SquarefreeTable sq(20000);
  for (i64 n = 1; n <= 20000; ++n) CHECK(is_squarefree(n, sq) == sqfree_naive(n));
  CHECK_THROWS_AS(is_squarefree(20001, sq), RangeError);
}

TEST_CASE("Moebius is multiplicative and sums to zero over divisors") {
  for (i64 n = 2; n <= 500; ++n) {
    int s = 0;
    for (i64 e : divisors(factor_trial(n))) s += mobius_trial(e);
    CHECK(s == 0);
  }
}

TEST_CASE("segmented discriminant sieve") {
  std::vector<i64> naive;
  for (i64 d = 1; d <= 300000; ++d)
    if (d % 4 == 2 && sqfree_naive(d)) naive.push_back(d);
  SieveOptions small;
  small.segment = 1000;
  CHECK(sieve_discriminants(1, 300000) == naive);
  CHECK(sieve_discriminants(1, 300000, small) == naive);
  std::vector<i64> mid;
  for_each_discriminant(123457, 200001, [&](i64 d) { mid.push_back(d); }, 777);
  std::vector<i64> expect;
  for (i64 d : naive)
    if (d >= 123457 && d <= 200001) expect.push_back(d);
  CHECK(mid == expect);
  CHECK(is_valid_discriminant(6));
  CHECK_FALSE(is_valid_discriminant(18));
  CHECK_FALSE(is_valid_discriminant(7));
  CHECK_THROWS_AS(check_discriminant(8), DomainError);
}

TEST_CASE("square roots modulo composites") {
  for (i64 M = 1; M <= 400; ++M)
    for (i64 c = -20; c <= 20; c += 3) {
      std::vector<i64> brute;
      for (i64 x = 0; x < M; ++x)
        if (mod_floor(x * x - c, M) == 0) brute.push_back(x);
      CHECK(sqrt_mod(c, M) == brute);
    }
}
