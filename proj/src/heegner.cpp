#include "ht/heegner.hpp"

#include <algorithm>
#include <cmath>

namespace ht {

i64 normalize_b(i64 b, i64 N) {
  i64 r = mod_floor(b, N);
  if (2 * r > N) r -= N;
  return r;
}

PrimitiveIdeal make_ideal(i64 d, i64 N, i64 b) {
  if (N < 1) throw DomainError("make_ideal: N must be positive");
  if (mod_floor128(i128(b) * b + d, N) != 0)
    throw DomainError("make_ideal: N does not divide b^2 + d");
  return {d, N, normalize_b(b, N)};
}

PrimitiveIdeal conjugate(const PrimitiveIdeal& a) { return {a.d, a.N, normalize_b(-a.b, a.N)}; }

std::vector<i64> roots_of_minus_d(i64 d, i64 N) {
  std::vector<i64> out;
  if (N <= 10000) {
    for (i64 b = 0; b < N; ++b)
      if ((i128(b) * b + d) % N == 0) out.push_back(b);
    return out;
  }
  return sqrt_mod(mod_floor(-d, N), N);
}

std::vector<PrimitiveIdeal> enumerate_primitive_ideals(i64 d, i64 Nmax) {
  std::vector<PrimitiveIdeal> out;
  for (i64 N = 1; N <= Nmax; ++N) {
    std::vector<i64> bs;
    for (i64 r : roots_of_minus_d(d, N)) bs.push_back(normalize_b(r, N));
    std::sort(bs.begin(), bs.end());
    for (i64 b : bs) out.push_back({d, N, b});
  }
  return out;
}

std::vector<PrimitiveIdeal> enumerate_primitive_ideals(i64 d, double B) {
  if (!(B >= 1)) throw DomainError("enumerate_primitive_ideals: B must be >= 1");
  return enumerate_primitive_ideals(d, i64(std::floor(B)));
}

HeegnerPoint heegner_point(const PrimitiveIdeal& a) {
  HeegnerPoint z;
  z.b = a.b;
  z.N = a.N;
  z.d = a.d;
  z.re = double(a.b) / double(a.N);
  z.im = std::sqrt(double(a.d)) / double(a.N);
  return z;
}

QuadForm ideal_form(const PrimitiveIdeal& a) {
  return {a.N, -2 * a.b, narrow((i128(a.b) * a.b + a.d) / a.N)};
}

QuadForm ideal_class_form(const PrimitiveIdeal& a) { return reduce_form(ideal_form(a)); }

PrimitiveIdeal form_to_ideal(const QuadForm& f, i64 d) {
  if (f.b % 2 != 0) throw DomainError("form_to_ideal: b must be even");
  return make_ideal(d, f.a, -f.b / 2);
}

namespace {

// q^2 Q^2 <= p^2 N^2 d with Q = (cb + eN)^2 + c^2 d
bool in_cut(const PrimitiveIdeal& a, i64 c, i64 e, const Rational& Y, i128* Qout = nullptr) {
  const i128 u = i128(c) * a.b + i128(e) * a.N;
  const i128 Q = u * u + i128(c) * c * a.d;
  if (Qout) *Qout = Q;
  const long double lhs = (long double)Y.q * (long double)Q;
  const long double rhs = (long double)Y.p * (long double)a.N * std::sqrt((long double)a.d);
  if (lhs > rhs * 1.000001L) return false;
  if (lhs < rhs * 0.999999L) return true;
  const u128 L = u128(Y.q) * u128(Y.q) * u128(Q) * u128(Q);
  const u128 R = u128(Y.p) * u128(Y.p) * u128(a.N) * u128(a.N) * u128(a.d);
  return L <= R;
}

template <class Fn>
void for_each_coset(const PrimitiveIdeal& a, const Rational& Y, Fn&& fn) {
  if (Y.p <= 0) return;
  if (in_cut(a, 0, 1, Y)) fn(i64(0), i64(1));
  // q^2 c^4 d <= p^2 N^2
  const u128 rhs = u128(Y.p) * u128(Y.p) * u128(a.N) * u128(a.N);
  auto c_ok = [&](i64 c) {
    return u128(Y.q) * u128(Y.q) * u128(c) * u128(c) * u128(c) * u128(c) * u128(a.d) <= rhs;
  };
  i64 cmax = i64(std::pow(double(rhs) / (double(Y.q) * double(Y.q) * double(a.d)), 0.25));
  while (cmax > 0 && !c_ok(cmax)) --cmax;
  while (c_ok(cmax + 1)) ++cmax;
  const long double sd = std::sqrt((long double)a.d);
  const long double YN = (long double)Y.p / Y.q * a.N * sd;
  for (i64 c = 1; c <= cmax; ++c) {
    long double R = YN - (long double)c * c * a.d;
    if (R < 0) R = 0;
    const long double half = std::sqrt(R) / a.N;
    const long double center = -(long double)c * a.b / a.N;
    const i64 lo = i64(std::floor(center - half)) - 1;
    const i64 hi = i64(std::ceil(center + half)) + 1;
    for (i64 e = lo; e <= hi; ++e) {
      if (std::gcd(c, e) != 1) continue;
      if (in_cut(a, c, e, Y)) fn(c, e);
    }
  }
}

} // namespace

bool coset_in_cut(const PrimitiveIdeal& a, const CosetElement& g, const Rational& Y) {
  if (Y.p <= 0) return false;
  return in_cut(a, g.c, g.e, Y);
}

PrimitiveIdeal coset_image(const PrimitiveIdeal& a, const CosetElement& g) {
  if (std::gcd(g.c, g.e) != 1) throw DomainError("coset_image: gcd(c, e) != 1");
  const i64 c = g.c, e = g.e;
  const i128 u = i128(c) * a.b + i128(e) * a.N;
  const i128 Q = u * u + i128(c) * c * a.d;
  const i64 N2 = narrow(Q / a.N);
  // alpha*e - beta*c = 1
  ExtGcd x = ext_gcd(e, c);
  const i128 alpha = x.x, beta = -x.y;
  const i128 C = (i128(a.b) * a.b + a.d) / a.N;
  const i128 b2 = alpha * c * C + (alpha * e + beta * c) * a.b + beta * e * a.N;
  const i64 b = narrow(mod_floor128(b2, N2));
  return make_ideal(a.d, N2, b);
}

std::vector<std::pair<CosetElement, PrimitiveIdeal>> coset_images(const PrimitiveIdeal& a,
                                                                  const Rational& Y) {
  std::vector<std::pair<CosetElement, PrimitiveIdeal>> out;
  for_each_coset(a, Y, [&](i64 c, i64 e) {
    CosetElement g{c, e};
    out.push_back({g, coset_image(a, g)});
  });
  return out;
}

i64 coset_image_count(const PrimitiveIdeal& a, const Rational& Y) {
  i64 n = 0;
  for_each_coset(a, Y, [&](i64, i64) { ++n; });
  return n;
}

std::pair<HeegnerPoint, QuadForm> reduce_point_to_F(const PrimitiveIdeal& a) {
  const QuadForm f = ideal_class_form(a);
  return {heegner_point(form_to_ideal(f, a.d)), f};
}

i64 principal_primitive_count_for(i64 d, i64 Nmax) {
  i64 n = 0;
  for (i64 v = 1; i128(v) * v * d <= Nmax; ++v) {
    const i64 rest = Nmax - v * v * d;
    const i64 umax = i64(isqrt(u64(rest)));
    for (i64 u = -umax; u <= umax; ++u)
      if (std::gcd(u, v) == 1) ++n;
  }
  return n;
}

i64 principal_primitive_count(i64 D, const Rational& Y) {
  if (D < 2 || Y.p <= 0) return 0;
  // N >= d forces d <= Y^2
  const i64 dmax = std::min<i64>(D, i64(Y.p / Y.q) * (Y.p / Y.q) + 2 * (Y.p / Y.q) + 1);
  i64 n = 0;
  for (i64 d : sieve_discriminants(1, std::max<i64>(dmax, 1)))
    n += principal_primitive_count_for(d, norm_cut(d, Y));
  return n;
}

IdealProduct ideal_multiply(const PrimitiveIdeal& x, const PrimitiveIdeal& y) {
  if (x.d != y.d) throw DomainError("ideal_multiply: different fields");
  const i64 d = x.d;
  const i64 a1 = x.N, a2 = y.N, b1 = x.b, b2 = y.b;
  ExtGcd g1 = ext_gcd(a1, a2);
  ExtGcd g2 = ext_gcd(g1.g, b1 + b2);
  const i64 e = g2.g;
  const i128 u = i128(g2.x) * g1.x, v = i128(g2.x) * g1.y, w = g2.y;
  const i128 N3 = (i128(a1) / e) * (i128(a2) / e);
  const i64 N = narrow(N3);
  const i128 M = N3 * e;
  const i128 t1 = mod_floor128(u * a1 % M * b2, M);
  const i128 t2 = mod_floor128(v * a2 % M * b1, M);
  const i128 t3 = mod_floor128(w % M * mod_floor128(i128(b1) * b2 - d, M), M);
  const i128 num = mod_floor128(t1 + t2 + t3, M);
  if (num % e != 0) throw IntegrityError("ideal_multiply: non-integral b");
  IdealProduct r;
  r.content = e;
  r.ideal = make_ideal(d, N, narrow(mod_floor128(num / e, N3)));
  return r;
}

} // namespace ht
