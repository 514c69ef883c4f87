#include "ht/arith.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ht {

i64 gcd(i64 a, i64 b) { return std::gcd(a, b); }

ExtGcd ext_gcd(i64 a, i64 b) {
  i64 old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    i64 q = old_r / r;
    i64 tmp = old_r - q * r; old_r = r; r = tmp;
    tmp = old_s - q * s; old_s = s; s = tmp;
    tmp = old_t - q * t; old_t = t; t = tmp;
  }
  if (old_r < 0) return {-old_r, -old_s, -old_t};
  return {old_r, old_s, old_t};
}

i64 floor_div(i64 a, i64 b) {
  i64 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

i64 mod_floor(i64 a, i64 m) {
  i64 r = a % m;
  return r < 0 ? r + m : r;
}

i128 mod_floor128(i128 a, i128 m) {
  i128 r = a % m;
  return r < 0 ? r + m : r;
}

u64 isqrt(u64 n) {
  u64 r = u64(std::sqrt(double(n)));
  while (r > 0 && (r > n / r)) --r;
  while ((r + 1) <= n / (r + 1)) ++r;
  return r;
}

u128 isqrt128(u128 n) {
  if (n <= u128(std::numeric_limits<u64>::max())) return isqrt(u64(n));
  u128 r = u128(std::sqrt(double(n)));
  // Newton from above settles the last few units
  if (r == 0) r = 1;
  for (int i = 0; i < 4; ++i) r = (r + n / r) / 2;
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

namespace {

struct SquareResidues {
  bool m64[64], m63[63], m65[65], m11[11];
  SquareResidues() {
    std::fill(std::begin(m64), std::end(m64), false);
    std::fill(std::begin(m63), std::end(m63), false);
    std::fill(std::begin(m65), std::end(m65), false);
    std::fill(std::begin(m11), std::end(m11), false);
    for (int i = 0; i < 64; ++i) m64[(i * i) % 64] = true;
    for (int i = 0; i < 63; ++i) m63[(i * i) % 63] = true;
    for (int i = 0; i < 65; ++i) m65[(i * i) % 65] = true;
    for (int i = 0; i < 11; ++i) m11[(i * i) % 11] = true;
  }
};

const SquareResidues kSquares;

} // namespace

bool is_square(u64 n, u64* root) {
  if (!kSquares.m64[n & 63]) return false;
  if (!kSquares.m63[n % 63] || !kSquares.m65[n % 65] || !kSquares.m11[n % 11]) return false;
  u64 r = isqrt(n);
  if (r * r != n) return false;
  if (root) *root = r;
  return true;
}

bool is_square128(u128 n, u128* root) {
  if (n <= u128(std::numeric_limits<u64>::max())) {
    u64 r;
    if (!is_square(u64(n), &r)) return false;
    if (root) *root = r;
    return true;
  }
  if (!kSquares.m64[unsigned(n & 63)]) return false;
  if (!kSquares.m63[unsigned(n % 63)] || !kSquares.m65[unsigned(n % 65)]) return false;
  u128 r = isqrt128(n);
  if (r * r != n) return false;
  if (root) *root = r;
  return true;
}

i64 mod_inverse(i64 t, i64 m) {
  if (m <= 0) throw DomainError("mod_inverse: modulus must be positive");
  if (m == 1) return 0;
  ExtGcd e = ext_gcd(mod_floor(t, m), m);
  if (e.g != 1) throw DomainError("mod_inverse: gcd(t, m) != 1");
  return mod_floor(e.x, m);
}

i64 mul_mod(i64 a, i64 b, i64 m) { return i64(mod_floor128(i128(a) * b, m)); }

i64 pow_mod(i64 a, u64 e, i64 m) {
  i64 r = 1 % m, b = mod_floor(a, m);
  while (e) {
    if (e & 1) r = mul_mod(r, b, m);
    b = mul_mod(b, b, m);
    e >>= 1;
  }
  return r;
}

int kronecker_symbol(i64 a, i64 n) {
  if (n <= 0 || n % 2 == 0) throw DomainError("kronecker_symbol: n must be odd and positive");
  a = mod_floor(a, n);
  int s = 1;
  while (a != 0) {
    while (a % 2 == 0) {
      a /= 2;
      i64 r = n % 8;
      if (r == 3 || r == 5) s = -s;
    }
    std::swap(a, n);
    if (a % 4 == 3 && n % 4 == 3) s = -s;
    a %= n;
  }
  return n == 1 ? s : 0;
}

i64 narrow(i128 v) {
  if (v > i128(std::numeric_limits<i64>::max()) || v < i128(std::numeric_limits<i64>::min()))
    throw ResourceError("integer overflow narrowing to 64 bits");
  return i64(v);
}

i128 checked_pow(i64 b, int e) {
  const i128 lim = (i128(1) << 125);
  i128 r = 1;
  for (int i = 0; i < e; ++i) {
    if (b != 0 && (r > lim / (b < 0 ? -b : b))) throw ResourceError("power exceeds 128-bit range");
    r *= b;
  }
  return r;
}

Rational::Rational(i64 num, i64 den) {
  if (den == 0) throw DomainError("Rational: zero denominator");
  if (den < 0) { num = -num; den = -den; }
  i64 g = std::gcd(num, den);
  if (g == 0) g = 1;
  p = num / g;
  q = den / g;
}

Rational Rational::parse(const std::string& text) {
  if (text.empty()) throw ConfigError("empty rational");
  auto parse_int = [&](const std::string& s) -> i64 {
    if (s.empty()) throw ConfigError("bad rational: " + text);
    std::size_t pos = 0;
    i64 v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      throw ConfigError("bad rational: " + text);
    }
    if (pos != s.size()) throw ConfigError("bad rational: " + text);
    return v;
  };
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    i64 den = parse_int(text.substr(slash + 1));
    if (den == 0) throw ConfigError("bad rational: " + text);
    return Rational(parse_int(text.substr(0, slash)), den);
  }
  auto dot = text.find('.');
  if (dot != std::string::npos) {
    std::string ip = text.substr(0, dot), fp = text.substr(dot + 1);
    if (fp.size() > 12 || fp.find_first_not_of("0123456789") != std::string::npos)
      throw ConfigError("bad rational: " + text);
    i64 den = 1;
    for (std::size_t i = 0; i < fp.size(); ++i) den *= 10;
    bool neg = !ip.empty() && ip[0] == '-';
    i64 whole = (ip.empty() || ip == "-") ? 0 : parse_int(ip);
    i64 frac = fp.empty() ? 0 : parse_int(fp);
    i64 num = (whole < 0 ? -whole : whole) * den + frac;
    return Rational(neg ? -num : num, den);
  }
  return Rational(parse_int(text), 1);
}

std::string Rational::str() const {
  return q == 1 ? std::to_string(p) : std::to_string(p) + "/" + std::to_string(q);
}

i64 norm_cut(i64 d, const Rational& Y) {
  if (Y.p <= 0 || d <= 0) return 0;
  u128 x = u128(Y.p) * u128(Y.p) * u128(d);
  return i64(isqrt128(x) / u128(Y.q));
}

bool within_norm_cut(i64 N, i64 d, const Rational& Y) {
  if (Y.p <= 0) return false;
  return u128(Y.q) * u128(Y.q) * u128(N) * u128(N) <= u128(Y.p) * u128(Y.p) * u128(d);
}

Factorization factor_trial(i64 n) {
  Factorization f;
  if (n < 0) n = -n;
  for (i64 p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
    if (n % p) continue;
    int e = 0;
    while (n % p == 0) { n /= p; ++e; }
    f.push_back({p, e});
  }
  if (n > 1) f.push_back({n, 1});
  return f;
}

std::vector<int> primes_upto(int n) {
  std::vector<int> out;
  if (n < 2) return out;
  std::vector<bool> comp(std::size_t(n) + 1, false);
  for (i64 i = 2; i <= n; ++i) {
    if (comp[std::size_t(i)]) continue;
    out.push_back(int(i));
    for (i64 j = i * i; j <= n; j += i) comp[std::size_t(j)] = true;
  }
  return out;
}

int mobius_trial(i64 n) {
  int mu = 1;
  for (auto [p, e] : factor_trial(n)) {
    if (e > 1) return 0;
    mu = -mu;
  }
  return mu;
}

bool is_squarefree_trial(i64 n) { return n >= 1 && mobius_trial(n) != 0; }

bool is_valid_discriminant(i64 d) { return d > 0 && d % 4 == 2 && is_squarefree_trial(d); }

void check_discriminant(i64 d) {
  if (!is_valid_discriminant(d))
    throw DomainError("d=" + std::to_string(d) + " is not a squarefree integer = 2 mod 4");
}

SquarefreeTable::SquarefreeTable(i64 limit) : limit_(limit) {
  if (limit < 0) throw DomainError("SquarefreeTable: negative limit");
  flags_.assign(std::size_t(limit) + 1, true);
  flags_[0] = false;
  for (i64 p = 2; p * p <= limit; ++p) {
    i64 q = p * p;
    for (i64 j = q; j <= limit; j += q) flags_[std::size_t(j)] = false;
  }
}

bool is_squarefree(i64 n, const SquarefreeTable& table) {
  if (n < 1 || n > table.limit())
    throw RangeError("is_squarefree: n=" + std::to_string(n) + " outside table");
  return table.test(n);
}

SmallestFactorTable::SmallestFactorTable(i64 limit) : limit_(limit) {
  if (limit < 1) limit_ = limit = 1;
  if (limit > (i64(1) << 32)) throw ResourceError("SmallestFactorTable: limit too large");
  spf_.assign(std::size_t(limit) + 1, 0);
  for (i64 i = 2; i <= limit; ++i) {
    if (spf_[std::size_t(i)] != 0) continue;
    spf_[std::size_t(i)] = std::uint32_t(i);
    if (i > limit / i) continue;
    for (i64 j = i * i; j <= limit; j += i)
      if (spf_[std::size_t(j)] == 0) spf_[std::size_t(j)] = std::uint32_t(i);
  }
}

Factorization SmallestFactorTable::factor(i64 n) const {
  if (n < 0) n = -n;
  if (n > limit_) return factor_trial(n);
  Factorization f;
  while (n > 1) {
    i64 p = spf_[std::size_t(n)];
    int e = 0;
    while (n % p == 0) { n /= p; ++e; }
    f.push_back({p, e});
  }
  return f;
}

void for_each_discriminant(i64 lo, i64 hi, const std::function<void(i64)>& fn,
                           std::size_t segment) {
  if (lo < 1) throw DomainError("sieve: lo must be >= 1");
  if (hi < lo) throw DomainError("sieve: hi < lo");
  if (segment < 64) segment = 64;
  const i64 root = i64(isqrt(u64(hi)));
  const std::vector<int> primes = primes_upto(int(root));
  std::vector<std::uint8_t> bad(segment);
  for (i64 s = lo; s <= hi; s += i64(segment)) {
    const i64 e = std::min(hi, s + i64(segment) - 1);
    std::fill(bad.begin(), bad.end(), 0);
    for (int p : primes) {
      if (p == 2) continue; // n = 2 mod 4 is never divisible by 4
      const i64 q = i64(p) * p;
      if (q > e) break;
      for (i64 j = ((s + q - 1) / q) * q; j <= e; j += q) bad[std::size_t(j - s)] = 1;
    }
    i64 first = s + mod_floor(2 - s, 4);
    for (i64 n = first; n <= e; n += 4)
      if (!bad[std::size_t(n - s)]) fn(n);
  }
}

std::vector<i64> sieve_discriminants(i64 lo, i64 hi, const SieveOptions& opt) {
  if (lo < 1 || hi < lo) throw DomainError("sieve_discriminants: need 1 <= lo <= hi");
  const u64 bound = u64(hi - lo) / 4 + 1;
  if (bound > opt.max_output)
    throw ResourceError("sieve_discriminants: range exceeds the configured memory budget");
  std::vector<i64> out;
  for_each_discriminant(lo, hi, [&](i64 d) { out.push_back(d); }, opt.segment);
  return out;
}

namespace {

i64 tonelli(i64 c, i64 p) {
  c = mod_floor(c, p);
  if (c == 0) return 0;
  if (p == 2) return c;
  if (pow_mod(c, u64(p - 1) / 2, p) != 1) return -1;
  if (p % 4 == 3) return pow_mod(c, u64(p + 1) / 4, p);
  i64 q = p - 1;
  int s = 0;
  while (q % 2 == 0) { q /= 2; ++s; }
  i64 z = 2;
  while (pow_mod(z, u64(p - 1) / 2, p) != p - 1) ++z;
  i64 m = s, cc = pow_mod(z, u64(q), p), t = pow_mod(c, u64(q), p), r = pow_mod(c, u64(q + 1) / 2, p);
  while (t != 1) {
    i64 i = 0, t2 = t;
    while (t2 != 1) { t2 = mul_mod(t2, t2, p); ++i; }
    i64 b = cc;
    for (i64 j = 0; j < m - i - 1; ++j) b = mul_mod(b, b, p);
    m = i;
    cc = mul_mod(b, b, p);
    t = mul_mod(t, cc, p);
    r = mul_mod(r, b, p);
  }
  return r;
}

std::vector<i64> roots_prime_power(i64 c, i64 p, int e) {
  i64 pe = 1;
  for (int i = 0; i < e; ++i) pe *= p;
  std::vector<i64> roots;
  if (p != 2 && mod_floor(c, p) != 0) {
    i64 r = tonelli(c, p);
    if (r < 0) return roots;
    i64 pk = p;
    for (int k = 1; k < e; ++k) {
      i64 next = pk * p;
      // Hensel step: r <- r - (r^2 - c) / (2r)
      i64 f = mod_floor(i64(mod_floor128(i128(r) * r - c, next)), next);
      i64 inv = mod_inverse(mul_mod(2, r, next), next);
      r = mod_floor(r - mul_mod(f, inv, next), next);
      pk = next;
    }
    roots.push_back(r);
    if (pe - r != r) roots.push_back(pe - r);
    std::sort(roots.begin(), roots.end());
    return roots;
  }
  // p = 2 or p | c: lift digit by digit
  for (i64 x = 0; x < p; ++x)
    if (mod_floor128(i128(x) * x - c, p) == 0) roots.push_back(x);
  i64 pk = p;
  for (int k = 1; k < e && !roots.empty(); ++k) {
    i64 next = pk * p;
    std::vector<i64> lifted;
    for (i64 r : roots)
      for (i64 i = 0; i < p; ++i) {
        i64 x = r + i * pk;
        if (mod_floor128(i128(x) * x - c, next) == 0) lifted.push_back(x);
      }
    std::sort(lifted.begin(), lifted.end());
    lifted.erase(std::unique(lifted.begin(), lifted.end()), lifted.end());
    roots.swap(lifted);
    pk = next;
  }
  return roots;
}

} // namespace

std::vector<i64> sqrt_mod(i64 c, i64 M, const Factorization& fM) {
  if (M < 1) throw DomainError("sqrt_mod: modulus must be positive");
  std::vector<i64> acc{0};
  i64 mod = 1;
  for (auto [p, e] : fM) {
    i64 pe = 1;
    for (int i = 0; i < e; ++i) pe *= p;
    std::vector<i64> r = roots_prime_power(c, p, e);
    if (r.empty()) return {};
    std::vector<i64> next;
    next.reserve(acc.size() * r.size());
    const i64 inv = mod_inverse(mod % pe, pe);
    for (i64 a : acc)
      for (i64 b : r) {
        // x = a + mod * ((b - a) / mod mod pe)
        i64 k = mul_mod(mod_floor(b - a, pe), inv, pe);
        next.push_back(a + mod * k);
      }
    mod *= pe;
    acc.swap(next);
  }
  for (i64& x : acc) x = mod_floor(x, M);
  std::sort(acc.begin(), acc.end());
  return acc;
}

std::vector<i64> sqrt_mod(i64 c, i64 M) { return sqrt_mod(c, M, factor_trial(M)); }

std::vector<i64> divisors(const Factorization& f) {
  std::vector<i64> out{1};
  for (auto [p, e] : f) {
    std::size_t n = out.size();
    i64 pk = 1;
    for (int i = 0; i < e; ++i) {
      pk *= p;
      for (std::size_t j = 0; j < n; ++j) out.push_back(out[j] * pk);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace ht
