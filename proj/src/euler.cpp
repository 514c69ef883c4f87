#include "ht/euler.hpp"

#include <algorithm>
#include <map>
#include <mutex>

namespace ht {

namespace {

using Series = std::map<std::pair<int, int>, Real>;

Real eval_poly(const std::vector<Monomial>& poly, const Real& X, const Real& Z) {
  Real s = 0;
  for (const auto& m : poly) s += m.c * pow(X, m.i) * pow(Z, m.j);
  return s;
}

struct Truncation {
  Real w1, w2, wmax;
  bool keep(int i, int j) const { return i * w1 + j * w2 <= wmax + Real("1e-30"); }
};

Series multiply(const Series& a, const Series& b, const Truncation& tr) {
  Series out;
  for (const auto& [ka, ca] : a)
    for (const auto& [kb, cb] : b) {
      const int i = ka.first + kb.first, j = ka.second + kb.second;
      if (tr.keep(i, j)) out[{i, j}] += ca * cb;
    }
  return out;
}

// log of a polynomial with constant term 1
Series log_series(const std::vector<Monomial>& poly, const Truncation& tr) {
  Series q;
  for (const auto& m : poly) {
    if (m.i == 0 && m.j == 0) {
      if (m.c != 1) throw DomainError("euler_product: constant term must be 1");
      continue;
    }
    if (tr.keep(m.i, m.j)) q[{m.i, m.j}] += m.c;
  }
  Series out, power = q;
  for (int n = 1; !power.empty(); ++n) {
    const Real sign = n % 2 ? 1 : -1;
    for (const auto& [k, c] : power) out[k] += sign * c / n;
    power = multiply(power, q, tr);
    if (n > 1000) throw ResourceError("euler_product: log series does not terminate");
  }
  return out;
}

Real eval_series(const Series& s, const Real& X, const Real& Z) {
  Real v = 0;
  for (const auto& [k, c] : s) v += c * pow(X, k.first) * pow(Z, k.second);
  return v;
}

// smallest lattice weight strictly above wmax
Real next_weight(const Truncation& tr, int max_i, int max_j) {
  Real best = -1;
  for (int i = 0; i <= max_i + 1; ++i)
    for (int j = 0; j <= max_j + 1; ++j) {
      const Real w = i * tr.w1 + j * tr.w2;
      if (w > tr.wmax + Real("1e-30") && (best < 0 || w < best)) best = w;
    }
  return best;
}

Real cached_prime_zeta_tail(const Real& sigma, i64 P) {
  static std::mutex mu;
  static std::map<std::pair<std::string, i64>, Real> cache;
  const auto key = std::make_pair(sigma.str(40), P);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  const Real v = prime_zeta_tail(sigma, P);
  std::lock_guard<std::mutex> lock(mu);
  cache[key] = v;
  return v;
}

} // namespace

Real EulerFactor::local(i64 p) const {
  const Real lp = log(Real(p));
  const Real X = exp(-w1 * lp), Z = exp(-w2 * lp);
  return eval_poly(num, X, Z) / eval_poly(den, X, Z);
}

Certified euler_product(const EulerFactor& f, const EulerOptions& opt) {
  if (f.w1 <= 0 || f.w2 <= 0) throw DomainError("euler_product: weights must be positive");
  const i64 P = opt.direct_cutoff;
  if (P < 100) throw DomainError("euler_product: direct cutoff too small");
  const Truncation tr{f.w1, f.w2, Real(opt.max_weight)};

  Real log_direct = 0;
  for (int p : small_primes()) {
    if (p > P) break;
    if (p == 2 && f.odd_primes_only) continue;
    const Real v = f.local(p);
    if (v <= 0) throw DomainError("euler_product: nonpositive local factor");
    log_direct += log(v);
  }

  Series s = log_series(f.num, tr);
  for (const auto& [k, c] : log_series(f.den, tr)) s[k] -= c;
  int max_i = 0, max_j = 0;
  Real log_tail = 0;
  for (const auto& [k, c] : s) {
    max_i = std::max(max_i, k.first);
    max_j = std::max(max_j, k.second);
    if (abs(c) < Real("1e-45")) continue;
    const Real sigma = k.first * f.w1 + k.second * f.w2;
    if (sigma <= 1) throw DomainError("euler_product: product does not converge absolutely");
    log_tail += c * cached_prime_zeta_tail(sigma, P);
  }

  // remainder |log f(p) - series(p)| <= K p^-theta for p > P
  const Real theta = next_weight(tr, max_i, max_j);
  Real K = 0;
  int sampled = 0;
  for (int p : small_primes()) {
    if (p <= P) continue;
    if (++sampled > 40) break;
    const Real lp = log(Real(p));
    const Real X = exp(-f.w1 * lp), Z = exp(-f.w2 * lp);
    const Real diff = abs(log(f.local(p)) - eval_series(s, X, Z));
    K = std::max(K, Real(diff * exp(theta * lp)));
  }
  K = 2 * K + Real("1e-40");
  const Real PP = P;
  const Real remainder = K * (pow(PP, 1 - theta) / (theta - 1) + pow(PP, -theta));

  const Real value = exp(log_direct + log_tail);
  return {value, abs(value) * (remainder + Real("1e-45")) * 2};
}

} // namespace ht
