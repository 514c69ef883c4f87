#include "ht/torsion.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace ht {

void check_torsion_order(int k) {
  if (k < 3 || k % 2 == 0 || k > kMaxTorsionOrder)
    throw DomainError("k must be odd with 3 <= k <= " + std::to_string(kMaxTorsionOrder));
}

i64 tuple_discriminant(const TorsionTuple& T) {
  check_torsion_order(T.k);
  if (T.l < 1 || T.m < 1 || T.n < 1 || T.t < 1) throw DomainError("tuple entries must be positive");
  const i128 num = i128(T.l) * checked_pow(T.m, T.k) - i128(T.l) * T.l * T.n * T.n;
  const i128 t2 = i128(T.t) * T.t;
  if (num <= 0 || num % t2 != 0) throw DomainError("tuple does not determine a positive integer d");
  return narrow(num / t2);
}

bool tuple_satisfies(const TorsionTuple& T, i64 d) {
  if (T.k < 3 || T.k % 2 == 0 || T.k > kMaxTorsionOrder) return false;
  if (T.l < 1 || T.m < 1 || T.n < 1 || T.t < 1 || d < 1) return false;
  if (d % T.l != 0 || mobius_trial(T.l) == 0) return false;
  if (std::gcd(T.m, T.n) != 1 || std::gcd(T.m, T.t) != 1 || std::gcd(T.m, d) != 1) return false;
  const i128 lhs = i128(T.l) * checked_pow(T.m, T.k);
  const i128 rhs = i128(T.l) * T.l * T.n * T.n + i128(T.t) * T.t * d;
  return lhs == rhs;
}

PrimitiveIdeal tuple_to_ideal(const TorsionTuple& T, i64 d) {
  if (!tuple_satisfies(T, d)) throw DomainError("tuple_to_ideal: tuple does not satisfy its equation");
  const i64 N = T.l * T.m;
  const i64 r = mul_mod(mod_floor(T.n, T.m), mod_inverse(T.t, T.m), T.m);
  return make_ideal(d, N, T.l * r);
}

IdealProduct ideal_power(const PrimitiveIdeal& a, int k) {
  if (k < 1) throw DomainError("ideal_power: k must be positive");
  IdealProduct acc{1, a};
  for (int i = 1; i < k; ++i) {
    IdealProduct step = ideal_multiply(acc.ideal, a);
    acc.content = narrow(i128(acc.content) * step.content);
    acc.ideal = step.ideal;
  }
  return acc;
}

namespace {

// Cornacchia: x^2 + d t^2 = M with x = r t mod M for the root r; gcd(x, t) = 1
bool cornacchia(i128 M, i64 d, i128 r, i128& x, i128& t) {
  r = mod_floor128(r, M);
  if (2 * r < M) r = M - r;
  if (r == M) r = 0;
  i128 a = M, b = r;
  const u128 lim = isqrt128(u128(M));
  while (u128(b) > lim) {
    i128 tmp = a % b;
    a = b;
    b = tmp;
  }
  const i128 rest = M - b * b;
  if (rest % d != 0) return false;
  u128 s;
  if (!is_square128(u128(rest / d), &s)) return false;
  x = b;
  t = i128(s);
  return true;
}

} // namespace

IdealTupleResult ideal_to_tuple(const PrimitiveIdeal& a, int k) {
  check_torsion_order(k);
  if (a.N == 1) throw DomainError("ideal_to_tuple: unit ideal");
  const i64 d = a.d;
  const i64 l = std::gcd(a.N, d);
  const i64 m = a.N / l;
  IdealTupleResult res;
  const IdealProduct P = ideal_power(a, k);
  const i128 M = i128(P.ideal.N);
  if (M != i128(l) * checked_pow(m, k)) throw IntegrityError("ideal_to_tuple: unexpected norm of a^k");
  const i128 beta = P.ideal.b;
  i128 x = 0, t = 0;
  bool ok = false;
  for (int sgn : {1, -1}) {
    if (!cornacchia(M, d, sgn * beta, x, t) || t == 0) continue;
    if (mod_floor128(x - beta * t, M) == 0) { ok = true; break; }
    if (mod_floor128(-x - beta * t, M) == 0) { x = -x; ok = true; break; }
  }
  if (!ok) return res;
  if (x == 0) {
    res.status = TupleStatus::outside_parametrization;
    return res;
  }
  const i128 ax = x < 0 ? -x : x;
  if (ax % l != 0) throw IntegrityError("ideal_to_tuple: l does not divide x");
  res.tuple = {l, m, narrow(ax / l), narrow(t), k};
  res.conjugate = x < 0;
  res.status = TupleStatus::found;
  if (!tuple_satisfies(res.tuple, d)) throw IntegrityError("ideal_to_tuple: recovered tuple is invalid");
  return res;
}

std::vector<TorsionTuple> enumerate_tuples(i64 d, int k, i64 Nmax) {
  check_torsion_order(k);
  check_discriminant(d);
  std::vector<TorsionTuple> out;
  if (Nmax < 1) return out;
  checked_pow(Nmax, k + 1);
  for (i64 l : divisors(factor_trial(d))) {
    const i64 dp = d / l;
    const Factorization fdp = factor_trial(dp);
    const i64 linv = dp == 1 ? 0 : mod_inverse(l, dp);
    for (i64 m = 1; m <= Nmax / l; ++m) {
      if (std::gcd(m, d) != 1) continue;
      const i128 mk = checked_pow(m, k);
      // m^k - l n^2 = t^2 d' with n, t >= 1, so l n^2 <= m^k - d'
      if (mk <= dp) continue;
      const i64 nmax = narrow(i128(isqrt128(u128((mk - dp) / l))));
      std::vector<i64> roots{0};
      i64 step = 1;
      if (dp > 1) {
        const i64 c = mul_mod(narrow(mod_floor128(mk, dp)), linv, dp);
        roots = sqrt_mod(c, dp, fdp);
        step = dp;
      }
      for (i64 r : roots) {
        for (i64 n = (r == 0 ? step : r); n <= nmax; n += step) {
          const i128 rest = mk - i128(l) * n * n;
          if (rest <= 0) break;
          if (rest % dp != 0) continue;
          u128 t;
          if (!is_square128(u128(rest / dp), &t) || t == 0) continue;
          if (std::gcd(m, n) != 1 || std::gcd(m, i64(t)) != 1) continue;
          out.push_back({l, m, n, i64(t), k});
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<TorsionTuple> enumerate_tuples(i64 d, int k, double B) {
  if (!(B >= 0)) return {};
  return enumerate_tuples(d, k, i64(std::floor(B)));
}

namespace {

struct CensusShard {
  i64 count = 0;
  std::map<i64, i64> per_d;
};

void census_shard(i64 D, const Rational& Y, int k, i64 Lmax, const SquarefreeTable& sf,
                  const SmallestFactorTable& spf, int shard, int shards, bool per_d,
                  CensusShard& out) {
  const i128 p2 = i128(Y.p) * Y.p, q2 = i128(Y.q) * Y.q;
  i64 idx = 0;
  for (i64 l = 1; l <= std::min(Lmax, D); ++l) {
    if (!sf.test(l)) continue;
    for (i64 m = 1; m <= Lmax / l; m += 2) {
      if (std::gcd(m, l) != 1) continue;
      if ((idx++) % shards != shard) continue;
      const i128 mk = checked_pow(m, k);
      const i128 mk2 = checked_pow(m, k - 2);
      const i128 A = i128(l) * mk;
      for (i64 t = 1; q2 * t * t * l <= p2 * mk2; ++t) {
        if (std::gcd(t, m) != 1 || std::gcd(t, l) != 1) continue;
        const i128 t2 = i128(t) * t;
        // p^2 l^2 n^2 <= p^2 A - q^2 t^2 l^2 m^2
        const i128 hi_num = p2 * A - q2 * t2 * l * l * m * m;
        if (hi_num < p2 * l * l) continue;
        const i64 nmax = narrow(i128(isqrt128(u128(hi_num / (p2 * l * l)))));
        // l^2 n^2 >= A - t^2 D
        const i128 lo_num = A - t2 * D;
        i64 nmin = 1;
        if (lo_num > 0) {
          const i128 ll = i128(l) * l;
          i128 q = (lo_num + ll - 1) / ll;
          u128 r = isqrt128(u128(q));
          if (i128(r) * i128(r) < q) ++r;
          nmin = std::max<i64>(1, narrow(i128(r)));
        }
        if (nmin > nmax) continue;
        auto visit = [&](i64 n) {
          const i128 num = A - i128(l) * l * n * n;
          if (num <= 0 || num % t2 != 0) return;
          const i128 dd = num / t2;
          if (dd > D) return;
          const i64 d = i64(dd);
          if (d % 4 != 2 || d % l != 0 || !sf.test(d)) return;
          if (std::gcd(m, n) != 1 || std::gcd(m, d) != 1) return;
          if (q2 * l * l * m * m > p2 * d) return;
          ++out.count;
          if (per_d) ++out.per_d[d];
        };
        if (t == 1 || nmax - nmin < 16) {
          for (i64 n = nmin; n <= nmax; ++n) visit(n);
          continue;
        }
        // n^2 = m^k / l mod t^2
        const i64 T2 = narrow(t2);
        Factorization ft2 = spf.factor(t);
        for (auto& pe : ft2) pe.second *= 2;
        const i64 c = mul_mod(narrow(mod_floor128(mk, T2)), mod_inverse(l % T2, T2), T2);
        for (i64 r : sqrt_mod(c, T2, ft2)) {
          i64 n = nmin + mod_floor(r - nmin, T2);
          for (; n <= nmax; n += T2) visit(n);
        }
      }
    }
  }
}

} // namespace

TupleCensus tuple_census(i64 D, const Rational& Y, int k, int shards, bool per_d) {
  check_torsion_order(k);
  TupleCensus res;
  if (D < 2 || Y.p <= 0) return res;
  if (shards < 1) shards = 1;
  const i64 Lmax = norm_cut(D, Y);
  checked_pow(Lmax, k + 1);
  const SquarefreeTable sf(D);
  // t <= Y m^((k-2)/2)
  const double tmax = Y.value() * std::pow(double(Lmax), (k - 2) / 2.0) + 2;
  if (tmax > 1e9) throw ResourceError("tuple_census: parameters exceed the supported range");
  // number of (l, m, t) triples visited
  double work = 0;
  for (i64 m = 1; m <= Lmax; m += 2)
    work += Y.value() * std::pow(double(m), (k - 2) / 2.0) * 2 * std::sqrt(double(Lmax) / double(m));
  if (work > kTupleCensusWorkLimit)
    throw ResourceError("tuple_census: estimated work exceeds the limit; lower D, Y or k");
  const SmallestFactorTable spf(std::min<i64>(i64(tmax), 10000000));
  std::vector<CensusShard> parts(static_cast<std::size_t>(shards));
  if (shards == 1) {
    census_shard(D, Y, k, Lmax, sf, spf, 0, 1, per_d, parts[0]);
  } else {
    std::vector<std::thread> th;
    for (int s = 0; s < shards; ++s)
      th.emplace_back(census_shard, D, std::cref(Y), k, Lmax, std::cref(sf), std::cref(spf), s,
                      shards, per_d, std::ref(parts[std::size_t(s)]));
    for (auto& x : th) x.join();
  }
  for (auto& p : parts) {
    res.count += p.count;
    for (auto [d, c] : p.per_d) res.per_d[d] += c;
  }
  return res;
}

} // namespace ht
