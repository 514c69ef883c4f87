#include "ht/analytic.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <json.hpp>

namespace ht {

namespace {

const double kPi = M_PI;

bool near(cplx a, double b) { return std::abs(a - b) < 1e-13; }

void check_I_point(cplx s) {
  if (near(s, 1.5)) throw PoleError("I: pole at s = 3/2");
  // Gamma(s - 1/2) poles at s = 1/2, -1/2, -3/2, ...
  if (std::abs(s.imag()) < 1e-13 && s.real() < 0.5 + 1e-13) {
    const double k = 0.5 - s.real();
    if (std::abs(k - std::round(k)) < 1e-13) throw PoleError("I: pole at a half-odd point");
  }
}

Real to_real(const Rational& r) { return Real(r.p) / Real(r.q); }

} // namespace

cplx I_of(cplx s) {
  check_I_point(s);
  return std::sqrt(kPi) / 2.0 * gamma_complex(s - 0.5) * rgamma_complex(s) / (1.5 - s);
}

cplx I_series(cplx s, int n_terms) {
  check_I_point(s);
  if (n_terms < 10) throw DomainError("I_series: too few terms");
  cplx sum = 0;
  double c = 1;  // binom(1/2, n) (-1)^n
  for (int n = 0; n < n_terms; ++n) {
    sum += c / (1.5 - double(n) - s);
    c *= (n - 0.5) / (n + 1.0);
  }
  // c_n ~ -n^(-3/2) (1 + 3/(8n)) / (2 sqrt(pi)); midpoint integral of the remainder
  const cplx ap = 1.5 - s;
  const double x = n_terms - 0.5;
  sum += 1.0 / (2.0 * std::sqrt(kPi)) *
         (std::pow(x, -1.5) / 1.5 + (0.375 + ap) * std::pow(x, -2.5) / 2.5);
  return sum;
}

cplx J_of(cplx w, cplx s) {
  if (std::abs(w - s) < 1e-13) throw DomainError("J: w and s must differ");
  return (I_of(w) - I_of(s)) / (w - s);
}

Real I_real(const Real& s) {
  if (s == Real(1.5)) throw PoleError("I: pole at s = 3/2");
  return sqrt(real_pi()) / 2 * gamma_real(s - Real(0.5)) / ((Real(1.5) - s) * gamma_real(s));
}

int rho_sigma(i64 m, i64 l, int a) {
  const i64 lm = l * m;
  if (a == 0) {
    if (l % 4 == 2) return 4;
    if (lm % 4 == 3) return 2;
    return 0;
  }
  const i64 target = a >= 2 ? 1 : 5;
  return lm % 8 == target ? 4 : 0;
}

bool rho_preconditions(i64 m, i64 l, i64 d, i64 r) {
  if (m < 1 || l < 1 || d < 1 || r < 1) return false;
  if (m % 2 == 0 || d % 2 == 0) return false;
  if (!is_squarefree_trial(l)) return false;
  i64 ro = r;
  while (ro % 2 == 0) ro /= 2;
  return gcd(ro, l * m * d) == 1;
}

int rho_density(i64 m, i64 l, i64 d, i64 r) {
  if (!rho_preconditions(m, l, d, r))
    throw DomainError("rho_density: requires m, d odd, l squarefree, odd part of r prime to lmd");
  int a = 0;
  i64 ro = r;
  while (ro % 2 == 0) {
    ro /= 2;
    ++a;
  }
  int v = rho_sigma(m, l, a);
  for (const auto& [p, e] : factor_trial(ro)) {
    (void)e;
    v *= 1 + kronecker_symbol((l * m) % p, p);
  }
  return v;
}

int rho_density_brute(i64 m, i64 l, i64 d, i64 r) {
  const i128 M = i128(4) * r;
  const i128 base = mod_floor128(i128(l) * m * m * m - 2 * i128(r), M);
  const i128 ld2 = mod_floor128(i128(l) * l % M * d % M * d, M);
  int count = 0;
  for (i128 n = 0; n < M; ++n)
    if ((base - ld2 * (n * n % M)) % M == 0) ++count;
  return count;
}

Rational c2_factor(i64 l, i64 t) {
  if (l < 1 || t < 1) throw DomainError("c2: l and t must be positive");
  if (gcd(l, t) != 1) throw DomainError("c2: requires gcd(l, t) = 1");
  if (l % 2 == 0) return {4, 1};
  if (t % 2 == 0) return {4, 3};
  return {4, 5};
}

Certified prod_one_minus_inv_p_p1() {
  static const Certified value = [] {
    EulerFactor f;
    f.w1 = 1;
    f.num = {{0, 0, 1}, {1, 0, 1}, {2, 0, -1}};
    f.den = {{0, 0, 1}, {1, 0, 1}};
    return euler_product(f);
  }();
  return value;
}

Certified local_constant_C(i64 l, i64 t) {
  const Rational c2 = c2_factor(l, t);
  if (!is_squarefree_trial(l)) throw DomainError("local_constant_C: l must be squarefree");
  const Certified A = prod_one_minus_inv_p_p1();
  const Real pi = real_pi();
  Real f = to_real(c2) * 6 / (pi * pi);
  for (const auto& [p, e] : factor_trial(l)) {
    (void)e;
    const Real P = p;
    f *= P * P / (P * P + P - 1);
  }
  for (const auto& [p, e] : factor_trial(t)) {
    (void)e;
    const Real P = p;
    f *= (P * P - 1) / (P * P + P - 1);
  }
  return {f * A.value, f * A.error};
}

double local_density_sum(i64 z, i64 l, i64 t, i64 Z) {
  if (l < 1 || t < 1) throw DomainError("local_density_sum: l and t must be positive");
  if (gcd(l, t) != 1) throw DomainError("local_density_sum: requires gcd(l, t) = 1");
  if (z < 1) return 0;
  if (Z < 2) throw DomainError("local_density_sum: Z must be at least 2");
  int a = 0;
  for (i64 u = t; u % 2 == 0; u /= 2) a += 2;

  const std::vector<int> primes = primes_upto(int(Z));
  std::vector<int> odd_primes;
  for (int p : primes)
    if (p > 2) odd_primes.push_back(p);
  // residue tables, entry 1 + (r/p), or -1 when p | r
  std::vector<std::vector<signed char>> table(odd_primes.size());
  for (std::size_t i = 0; i < odd_primes.size(); ++i) {
    const int p = odd_primes[i];
    table[i].assign(std::size_t(p), 0);
    for (int x = 1; x < p; ++x) table[i][std::size_t(i64(x) * x % p)] = 2;
    table[i][0] = -1;
  }
  std::vector<int> prime_index(std::size_t(Z) + 1, -1);
  for (std::size_t i = 0; i < odd_primes.size(); ++i) prime_index[std::size_t(odd_primes[i])] = int(i);

  struct SEntry {
    double weight;  // mu(s) / s^2
    std::vector<int> idx;
  };
  std::vector<SEntry> s_list;
  const Factorization tf = factor_trial(t);
  auto divides_t = [&](i64 p) {
    for (const auto& [q, e] : tf) {
      (void)e;
      if (q == p) return true;
    }
    return false;
  };
  for (i64 s = 1; s < Z; s += 2) {
    const Factorization f = factor_trial(s);
    bool sqf = true;
    SEntry entry{1.0 / double(s) / double(s), {}};
    for (const auto& [p, e] : f) {
      if (e > 1) sqf = false;
      entry.weight = -entry.weight;
      entry.idx.push_back(prime_index[std::size_t(p)]);
    }
    if (!sqf) continue;
    s_list.push_back(std::move(entry));
  }
  std::vector<char> prime_divides_t(odd_primes.size(), 0);
  for (std::size_t i = 0; i < odd_primes.size(); ++i) prime_divides_t[i] = divides_t(odd_primes[i]);

  const SmallestFactorTable spf(std::max<i64>(z, 2));
  std::vector<signed char> val(odd_primes.size());
  double total = 0;
  for (i64 m = 1; m <= z; m += 2) {
    if (gcd(m, l * t) != 1) continue;
    const int sigma = rho_sigma(m, l, a);
    if (sigma == 0) continue;
    const i64 L = l * m;
    double tfac = 1;
    for (const auto& [p, e] : tf) {
      (void)e;
      if (p != 2) tfac *= 1 + kronecker_symbol(L % p, p);
    }
    if (tfac == 0) continue;
    // sum over d | m of mu(d)/d
    double w = 0;
    {
      const Factorization fm = spf.factor(m);
      const std::size_t r = fm.size();
      for (std::size_t mask = 0; mask < (std::size_t(1) << r); ++mask) {
        double term = 1;
        for (std::size_t j = 0; j < r; ++j)
          if (mask >> j & 1) term *= -1.0 / double(fm[j].first);
        w += term;
      }
    }
    for (std::size_t i = 0; i < odd_primes.size(); ++i) {
      const signed char v = table[i][std::size_t(L % odd_primes[i])];
      val[i] = v < 0 ? -1 : (prime_divides_t[i] ? 1 : v);
    }
    double inner = 0;
    for (const auto& s : s_list) {
      double prod = s.weight;
      for (int i : s.idx) {
        const signed char v = val[std::size_t(i)];
        if (v < 0 || v == 0) {
          prod = 0;
          break;
        }
        prod *= v;
      }
      inner += prod;
    }
    total += w * sigma * tfac * inner;
  }
  return total;
}

Certified G_of(const Real& s) {
  if (s <= 0) throw DomainError("G: requires s > 0");
  EulerFactor f;
  f.w1 = 1;
  f.w2 = 2 * s;
  f.num = {{0, 0, 1}, {1, 0, 1}, {2, 0, -1}, {1, 1, -1}};
  f.den = {{0, 0, 1}, {1, 0, 1}, {2, 0, -1}};
  f.odd_primes_only = true;
  const Certified odd = euler_product(f);
  const Certified A = prod_one_minus_inv_p_p1();
  const Real pi = real_pi();
  const Real two = 2;
  const Real pre = Real(24) / (5 * pi * pi) * (1 + 2 * pow(two, -s) - 2 * pow(two, -2 * s));
  return {pre * A.value * odd.value, abs(pre) * (A.error * odd.value + A.value * odd.error)};
}

Certified F_of(const Real& s) {
  if (s <= Real(1) / 3) throw DomainError("F: requires s > 1/3");
  if (s == 1) throw PoleError("F: pole at s = 1");
  const Certified z = zeta_certified(s);
  const Certified g = G_of(s);
  return {z.value * g.value, abs(z.value) * g.error + abs(g.value) * z.error};
}

namespace {

// 1 + x^k + x^(k+1) - x^(2k-2) - x^(2k-1) - x^(2k) over 1 + x^k, x = p^(-1/k)
EulerFactor c1k_factor(int k) {
  EulerFactor f;
  f.w1 = Real(1) / k;
  f.num = {{0, 0, 1}, {k, 0, 1}, {k + 1, 0, 1}, {2 * k - 2, 0, -1}, {2 * k - 1, 0, -1}, {2 * k, 0, -1}};
  f.den = {{0, 0, 1}, {k, 0, 1}};
  f.odd_primes_only = true;
  return f;
}

// 1 - (p^(1/3) + 1)/(p^2 + p) = (1 + x^3 - x^5 - x^6)/(1 + x^3), x = p^(-1/3)
EulerFactor one_third_factor() {
  EulerFactor f;
  f.w1 = Real(1) / 3;
  f.num = {{0, 0, 1}, {3, 0, 1}, {5, 0, -1}, {6, 0, -1}};
  f.den = {{0, 0, 1}, {3, 0, 1}};
  f.odd_primes_only = true;
  return f;
}

Real bracket(int k) {
  const Real two = 2;
  return 1 - pow(two, Real(1) / k) + pow(two, 1 - Real(1) / k);
}

} // namespace

Certified F_one_third_closed() {
  const Real pi = real_pi();
  const Certified z = zeta_certified(Real(1) / 3);
  const Certified prod = euler_product(one_third_factor());
  const Real pre = 4 / (pi * pi) * bracket(3);
  return {pre * z.value * prod.value, abs(pre) * (abs(z.value) * prod.error + z.error * prod.value)};
}

Certified C56() {
  static const Certified value = [] {
    const Real pi = real_pi();
    const Real third = Real(1) / 3;
    const Certified z = zeta_certified(third);
    const Certified prod = euler_product(one_third_factor());
    const Real g = gamma_real(Real(1) / 6) / gamma_real(2 * third);
    const Real pre = 2 * g / (5 * pow(pi, Real(1.5))) * bracket(3);
    return Certified{pre * z.value * prod.value,
                     abs(pre) * (abs(z.value) * prod.error + z.error * prod.value)};
  }();
  return value;
}

Certified C1k(int k) {
  if (k < 3 || k % 2 == 0) throw DomainError("C1k: k must be odd and at least 3");
  static std::mutex mu;
  static std::map<int, Certified> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(k);
    if (it != cache.end()) return it->second;
  }
  const Real pi = real_pi();
  const Real kk = k;
  const Certified z = zeta_certified(1 - 2 / kk);
  const Real zeta2 = pi * pi / 6;
  const Real g = gamma_real(Real(0.5)) * gamma_real(Real(0.5) - 1 / kk) / gamma_real(1 - 1 / kk);
  const Certified prod = euler_product(c1k_factor(k));
  const Real pre = g / (6 * kk * zeta2) * bracket(k);
  const Certified out{pre * z.value * prod.value,
                      abs(pre) * (abs(z.value) * prod.error + z.error * prod.value)};
  std::lock_guard<std::mutex> lock(mu);
  cache[k] = out;
  return out;
}

SecondaryConstants secondary_constants(int k) { return {C56(), C1k(k)}; }

std::vector<ConstantEntry> constants_report() {
  std::vector<ConstantEntry> out;
  auto add = [&](std::string name, const Certified& c, std::string formula) {
    out.push_back({std::move(name), c.value, c.error, std::move(formula)});
  };
  add("zeta(1/3)", zeta_certified(Real(1) / 3), "Euler-Maclaurin");
  add("A", prod_one_minus_inv_p_p1(), "prod_p (1 - 1/(p(p+1)))");
  add("C(1,1)", local_constant_C(1, 1), "c2(l,t) (6/pi^2) A prod_{p|l} p^2/(p^2+p-1) prod_{p|t} (p^2-1)/(p^2+p-1)");
  add("G(1)", G_of(Real(1)), "(24/(5pi^2)) A [1 + 2/2^s - 2/2^(2s)] prod_{p odd} (1 - p/(p^2+p-1) p^(-2s))");
  add("F(1/3)", F_of(Real(1) / 3 + Real("1e-40")), "zeta(s) G(s)");
  add("F(1/3) closed", F_one_third_closed(),
      "(4/pi^2) zeta(1/3) [1 - 2^(1/3) + 2^(2/3)] prod_{p odd} (1 - (p^(1/3)+1)/(p^2+p))");
  add("I(2/3)", {I_real(Real(2) / 3), Real("1e-45")}, "(sqrt(pi)/2) Gamma(s-1/2) / ((3/2-s) Gamma(s))");
  add("C_5/6", C56(),
      "2 zeta(1/3) Gamma(1/6) / (5 pi^(3/2) Gamma(2/3)) [1 - 2^(1/3) + 2^(2/3)] prod_{p odd} (1 - (p^(1/3)+1)/(p^2+p))");
  for (int k : {3, 5, 7, 9})
    add("C_1," + std::to_string(k), C1k(k),
        "zeta(1-2/k) Gamma(1/2) Gamma(1/2-1/k) / (6k zeta(2) Gamma(1-1/k)) [1 - 2^(1/k) + 2^(1-1/k)] "
        "prod_{p odd} [1 + (p^(-1/k) - p^(2/k-1) - p^(1/k-1) - 1/p)/(p+1)]");
  add("Psi_hat(1)", {mellin_Psi_real(Real(1)), Real("1e-45")}, "(2s-1) pi^(-s) Gamma(s) zeta(2s)");
  return out;
}

std::string constants_report_json() {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : constants_report()) {
    j.push_back({{"name", c.name},
                 {"value", c.value.str(40)},
                 {"error", static_cast<double>(c.error)},
                 {"formula", c.formula}});
  }
  return j.dump(2);
}

// ---- smoothing kernels ----

cplx SmoothTestFunction::mellin(cplx s, double* err) const {
  if (mellin_closed) {
    if (err) *err = 0;
    return mellin_closed(s);
  }
  auto integrand = [&](double y, bool imag) {
    if (y <= 0) return 0.0;
    const double v = eval(y);
    if (v == 0) return 0.0;
    const cplx w = v * std::exp((s - 1.0) * std::log(y));
    return imag ? w.imag() : w.real();
  };
  double e1 = 0, e2 = 0, re = 0, im = 0;
  if (support_hi > 0) {
    boost::math::quadrature::tanh_sinh<double> q;
    re = q.integrate([&](double y) { return integrand(y, false); }, support_lo, support_hi, 1e-12, &e1);
    im = q.integrate([&](double y) { return integrand(y, true); }, support_lo, support_hi, 1e-12, &e2);
  } else {
    boost::math::quadrature::exp_sinh<double> q;
    re = q.integrate([&](double y) { return integrand(y, false); }, support_lo,
                     std::numeric_limits<double>::infinity(), 1e-12, &e1);
    im = q.integrate([&](double y) { return integrand(y, true); }, support_lo,
                     std::numeric_limits<double>::infinity(), 1e-12, &e2);
  }
  if (err) *err = std::abs(e1 * re) + std::abs(e2 * im) + 1e-15;
  return {re, im};
}

double SmoothTestFunction::tail_cutoff(double eps) const {
  if (!(eps > 0 && eps < 1)) throw DomainError("tail_cutoff: eps must lie in (0, 1)");
  switch (kind) {
    case KernelKind::Psi:
      return std::max(1.0, 2 / kPi * std::log(1.91 / eps));
    case KernelKind::gaussian:
      return std::sqrt(std::log(1 / eps));
    case KernelKind::lognormal:
      return std::exp(std::sqrt(std::log(1 / eps)));
    default:
      if (support_hi > 0) return support_hi;
      throw ConfigError("tail_cutoff: kernel '" + name + "' has no bounded support");
  }
}

SmoothTestFunction SmoothTestFunction::bump(double a, double b) {
  if (!(a > 0 && b > a)) throw ConfigError("bump: support must satisfy 0 < a < b");
  SmoothTestFunction f;
  f.kind = KernelKind::bump_phi;
  f.name = "bump";
  f.params = {a, b};
  f.eval = [a, b](double u) {
    if (u <= a || u >= b) return 0.0;
    const double x = (2 * u - a - b) / (b - a);
    return std::exp(1 - 1 / (1 - x * x));
  };
  f.support_lo = a;
  f.support_hi = b;
  f.pole_free_except_zero = true;
  f.residue_zero = 0;
  return f;
}

SmoothTestFunction SmoothTestFunction::Psi(double eps) {
  SmoothTestFunction f;
  f.kind = KernelKind::Psi;
  f.name = "Psi";
  f.params = {eps};
  f.eval = [eps](double y) { return psi_kernel(y, eps); };
  f.mellin_closed = [](cplx s) {
    if (s.imag() != 0) throw DomainError("Psi mellin: only real s supported");
    return cplx(mellin_Psi(s.real()), 0);
  };
  f.pole_free_except_zero = true;
  f.residue_zero = 0.5;
  return f;
}

SmoothTestFunction SmoothTestFunction::lognormal() {
  SmoothTestFunction f;
  f.kind = KernelKind::lognormal;
  f.name = "lognormal";
  f.eval = [](double u) {
    if (u <= 0) return 0.0;
    const double l = std::log(u);
    return std::exp(-l * l);
  };
  f.mellin_closed = [](cplx s) { return std::sqrt(kPi) * std::exp(s * s / 4.0); };
  f.pole_free_except_zero = true;
  return f;
}

SmoothTestFunction SmoothTestFunction::gaussian() {
  SmoothTestFunction f;
  f.kind = KernelKind::gaussian;
  f.name = "gaussian";
  f.eval = [](double y) { return std::exp(-y * y); };
  f.mellin_closed = [](cplx s) { return gamma_complex(s / 2.0) / 2.0; };
  f.pole_free_except_zero = false;
  f.residue_zero = 1;
  return f;
}

SmoothTestFunction SmoothTestFunction::sharp() {
  SmoothTestFunction f;
  f.kind = KernelKind::sharp;
  f.name = "sharp";
  f.eval = [](double y) { return y > 0 && y <= 1 ? 1.0 : 0.0; };
  f.mellin_closed = [](cplx s) {
    if (std::abs(s) == 0) throw PoleError("sharp mellin: pole at 0");
    return 1.0 / s;
  };
  f.support_lo = 0;
  f.support_hi = 1;
  f.pole_free_except_zero = true;
  f.residue_zero = 1;
  return f;
}

SmoothTestFunction SmoothTestFunction::custom(std::string name, std::function<double(double)> fn,
                                              double lo, double hi, bool pole_free_except_zero,
                                              double residue_zero) {
  if (lo < 0 || (hi > 0 && hi <= lo)) throw ConfigError("custom kernel: bad integration range");
  SmoothTestFunction f;
  f.kind = KernelKind::custom;
  f.name = std::move(name);
  f.eval = std::move(fn);
  f.support_lo = lo;
  f.support_hi = hi;
  f.pole_free_except_zero = pole_free_except_zero;
  f.residue_zero = residue_zero;
  return f;
}

// ---- Psi ----

double psi0(double y) { return (2 * kPi * y - 1) * std::exp(-kPi * y); }

int psi_truncation(double y, double eps) {
  if (!(y > 0)) throw DomainError("psi: y must be positive");
  if (!(eps > 0)) throw DomainError("psi: eps must be positive");
  double mp1sq;
  if (y >= 1) {
    // |Psi0(m^2 y)| <= 1.89 exp(-pi m^2 y / 2)
    mp1sq = 2 / (kPi * y) * std::log(1.89 * (1 + 1 / (kPi * y)) / eps);
  } else {
    // dual series: 2 pi y^(-3/2) m^2 exp(-pi m^2 / y)
    mp1sq = 2 * y / kPi * std::log(4 / (std::exp(1.0) * (1 - std::exp(-kPi)) * std::sqrt(y) * eps));
  }
  const int M = int(std::ceil(std::sqrt(std::max(mp1sq, 0.0)))) - 1;
  return std::max(M, 1);
}

double psi_kernel(double y, double eps) {
  const int M = psi_truncation(y, eps);
  double s = 0;
  if (y >= 1) {
    for (int m = M; m >= 1; --m) s += psi0(double(m) * m * y);
    return s;
  }
  for (int m = M; m >= 1; --m) s += double(m) * m * std::exp(-kPi * double(m) * m / y);
  return 0.5 - 2 * kPi * std::pow(y, -1.5) * s;
}

Real mellin_Psi_real(const Real& s) {
  if (s == 0) throw PoleError("Psi mellin: pole at 0");
  if (s < 0) throw DomainError("Psi mellin: requires s > 0");
  const Real pi = real_pi();
  const Real u = 2 * s - 1;
  Real zpart;
  if (abs(u) < Real("1e-25"))
    zpart = 1 + euler_gamma_const() * u;
  else
    zpart = u * zeta_real(2 * s);
  return zpart * pow(pi, -s) * gamma_real(s);
}

double mellin_Psi(double s) { return static_cast<double>(mellin_Psi_real(Real(s))); }

double mellin_Psi_residue_zero() {
  const Real s("1e-30");
  return static_cast<double>(s * mellin_Psi_real(s));
}

KernelSum eisenstein_kernel_sum(double x, double y, double eps) {
  if (!(y > 0)) throw DomainError("eisenstein_kernel_sum: Im z must be positive");
  if (!(eps > 0)) throw DomainError("eisenstein_kernel_sum: eps must be positive");
  // cosets with |cz+e|^2 <= X y number at most (sqrt(X/y) + 1)(2 sqrt(X y) + 1);
  // |Psi(u)| <= 1.91 exp(-pi u / 2) for u >= 1
  auto count_bound = [y](double X) { return (std::sqrt(X / y) + 1) * (2 * std::sqrt(X * y) + 1); };
  auto tail = [&](double U) {
    double t = 0;
    for (int j = 0; j < 100000; ++j) {
      const double term = count_bound(U + j + 1) * 1.91 * std::exp(-kPi * (U + j) / 2);
      t += term;
      if (term < 1e-300 || (j > 10 && term < t * 1e-17)) break;
    }
    return t;
  };
  double U = 2;
  while (tail(U) > eps / 2) U += 1;
  const double psi_eps = eps / 2 / std::max(1.0, count_bound(U));

  KernelSum out;
  out.cutoff = U;
  out.tail_bound = tail(U) + psi_eps * count_bound(U);
  const double uy = U * y;
  double sum = 0;
  sum += psi_kernel(1 / y, psi_eps);  // c = 0
  out.terms = 1;
  const i64 cmax = i64(std::floor(std::sqrt(U / y)));
  for (i64 c = 1; c <= cmax; ++c) {
    const double cy = double(c) * y;
    const double rad = uy - cy * cy;
    if (rad < 0) continue;
    const double r = std::sqrt(rad);
    const double cx = double(c) * x;
    const i64 elo = i64(std::ceil(-cx - r)), ehi = i64(std::floor(-cx + r));
    for (i64 e = elo; e <= ehi; ++e) {
      if (gcd(c, e) != 1) continue;
      const double re = cx + double(e);
      const double u = (re * re + cy * cy) / y;
      if (u > U) continue;
      sum += psi_kernel(u, psi_eps);
      ++out.terms;
    }
  }
  out.value = sum;
  return out;
}

cplx mellin_Phi(cplx alpha, cplx beta, cplx gamma, int k, const SmoothTestFunction& phi,
                const SmoothTestFunction& psi) {
  if (k < 3 || k % 2 == 0) throw DomainError("mellin_Phi: k must be odd and at least 3");
  const double kk = k;
  const cplx g = gamma_complex(beta / 2.0) * gamma_complex(gamma / 2.0 + 1.0) *
                 rgamma_complex((beta + gamma) / 2.0 + 1.0);
  const cplx a1 = alpha / 2.0 + kk * beta / 4.0 + (kk - 2) * gamma / 4.0;
  const cplx a2 = alpha + kk * beta / 2.0 + kk * gamma / 2.0;
  return 0.25 * g * phi.mellin(a1) * psi.mellin(a2);
}

double mellin_Phi_numeric(double alpha, double beta, double gamma, int k,
                          const SmoothTestFunction& phi, const SmoothTestFunction& psi, double D,
                          double Y, double tol) {
  if (k < 3 || k % 2 == 0) throw DomainError("mellin_Phi_numeric: k must be odd and at least 3");
  if (!(beta > 0 && gamma > -2)) throw DomainError("mellin_Phi_numeric: divergent integral");
  const double kk = k;
  // x = e^a, y = x^(k/2) u, z = e^c
  boost::math::quadrature::sinh_sinh<double> outer(12), inner(12);
  boost::math::quadrature::tanh_sinh<double> mid(12);
  auto f_xu = [&](double a, double u) {
    const double x = std::exp(a);
    const double w = 1 - u * u;
    if (w <= 0) return 0.0;
    const double xk = std::pow(x, kk) * w;  // x^k - y^2
    if (!(xk > 0) || !std::isfinite(xk)) return 0.0;
    auto g = [&](double c) {
      const double z = std::exp(c);
      const double arg = xk / (D * z * z);
      if (!(arg > 0) || !std::isfinite(arg)) return 0.0;
      const double pv = phi(arg);
      if (pv == 0) return 0.0;
      const double sv = psi(x * z / (Y * std::sqrt(xk)));
      if (sv == 0) return 0.0;
      const double v = pv * sv * std::exp(gamma * c);
      return std::isfinite(v) ? v : 0.0;
    };
    const double inner_val = inner.integrate(g, tol);
    if (inner_val == 0) return 0.0;
    const double v = inner_val * std::pow(x, alpha + kk * beta / 2) * std::pow(u, beta - 1);
    return std::isfinite(v) ? v : 0.0;
  };
  auto f_x = [&](double a) { return mid.integrate([&](double u) { return f_xu(a, u); }, 0.0, 1.0, tol); };
  return outer.integrate(f_x, tol);
}

double mellin_Phi_scaled(double alpha, double beta, double gamma, int k, double D, double Y,
                         const SmoothTestFunction& phi, const SmoothTestFunction& psi) {
  const double kk = k;
  const double e1 = alpha / 2 + kk * beta / 4 + (kk - 2) * gamma / 4;
  const double e2 = alpha + kk * beta / 2 + kk * gamma / 2;
  return std::pow(D, e1) * std::pow(Y, e2) * mellin_Phi(alpha, beta, gamma, k, phi, psi).real();
}

} // namespace ht
