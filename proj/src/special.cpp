#include "ht/special.hpp"

#include <cmath>
#include <mutex>

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/bernoulli.hpp>

namespace ht {

Real real_pi() { return boost::math::constants::pi<Real>(); }
Real euler_gamma_const() { return boost::math::constants::euler<Real>(); }

const std::vector<int>& small_primes() {
  static const std::vector<int> primes = primes_upto(1 << 20);
  return primes;
}

namespace {

const std::vector<Real>& bernoulli_table() {
  static const std::vector<Real> table = [] {
    std::vector<Real> b;
    for (int j = 0; j <= 120; ++j) b.push_back(boost::math::bernoulli_b2n<Real>(j));
    return b;
  }();
  return table;
}

bool is_nonpositive_integer(const Real& s) { return s <= 0 && s == floor(s); }

} // namespace

Certified zeta_certified(const Real& s, int digits) {
  if (s == 1) throw PoleError("zeta: pole at s = 1");
  if (s < 0) {
    // zeta(s) = 2^s pi^(s-1) sin(pi s / 2) Gamma(1 - s) zeta(1 - s)
    const Real pi = real_pi();
    Certified z = zeta_certified(1 - s, digits);
    const Real f = pow(Real(2), s) * pow(pi, s - 1) * sin(pi * s / 2) * gamma_real(1 - s);
    return {f * z.value, abs(f) * z.error + abs(f * z.value) * Real("1e-48")};
  }
  const auto& B = bernoulli_table();
  const int N = std::max(20, digits);
  const Real NN = N;
  Real sum = 0;
  for (int n = N - 1; n >= 1; --n) sum += pow(Real(n), -s);
  sum += pow(NN, 1 - s) / (s - 1) + pow(NN, -s) / 2;
  // B_2j / (2j)! * s (s+1) ... (s+2j-2) * N^(-s-2j+1)
  Real rising = s;
  Real fact = 2;
  Real Npow = pow(NN, -s - 1);
  const Real N2 = NN * NN;
  const Real tol = pow(Real(10), -digits - 2);
  Real last = 0;
  for (int j = 1; j < int(B.size()); ++j) {
    const Real term = B[std::size_t(j)] / fact * rising * Npow;
    sum += term;
    last = abs(term);
    if (last < tol * (1 + abs(sum))) break;
    rising *= (s + 2 * j - 1) * (s + 2 * j);
    fact *= Real(2 * j + 1) * (2 * j + 2);
    Npow /= N2;
  }
  return {sum, last + abs(sum) * Real("1e-48")};
}

Real zeta_real(const Real& s, int digits) { return zeta_certified(s, digits).value; }

Real lgamma_real(const Real& s) {
  if (s <= 0) throw DomainError("lgamma_real: s must be positive");
  const auto& B = bernoulli_table();
  Real x = s, shift = 0;
  while (x < 40) {
    shift += log(x);
    x += 1;
  }
  const Real half_log_2pi = log(2 * real_pi()) / 2;
  Real r = (x - Real(0.5)) * log(x) - x + half_log_2pi;
  Real xp = x;
  const Real x2 = x * x;
  for (int j = 1; j <= 40; ++j) {
    r += B[std::size_t(j)] / (Real(2 * j) * (2 * j - 1) * xp);
    xp *= x2;
  }
  return r - shift;
}

Real gamma_real(const Real& s) {
  if (is_nonpositive_integer(s)) throw PoleError("Gamma: pole at a nonpositive integer");
  if (s < Real(0.5)) {
    const Real pi = real_pi();
    return pi / (sin(pi * s) * gamma_real(1 - s));
  }
  return exp(lgamma_real(s));
}

namespace {

const double kLanczosG = 7.0;
const double kLanczos[9] = {0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
                            771.32342877765313,      -176.61502916214059,   12.507343278686905,
                            -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

std::complex<double> gamma_lanczos(std::complex<double> z) {
  z -= 1.0;
  std::complex<double> x = kLanczos[0];
  for (int i = 1; i < 9; ++i) x += kLanczos[i] / (z + double(i));
  const std::complex<double> t = z + kLanczosG + 0.5;
  return std::sqrt(2 * M_PI) * std::pow(t, z + 0.5) * std::exp(-t) * x;
}

} // namespace

std::complex<double> gamma_complex(std::complex<double> z) {
  if (z.imag() == 0 && z.real() <= 0 && z.real() == std::floor(z.real()))
    throw PoleError("Gamma: pole at a nonpositive integer");
  if (z.real() < 0.5) return M_PI / (std::sin(M_PI * z) * gamma_lanczos(1.0 - z));
  return gamma_lanczos(z);
}

std::complex<double> rgamma_complex(std::complex<double> z) {
  if (z.real() < 0.5) return std::sin(M_PI * z) * gamma_lanczos(1.0 - z) / M_PI;
  return 1.0 / gamma_lanczos(z);
}

Real prime_zeta_tail(const Real& sigma, i64 P) {
  if (sigma <= 1) throw DomainError("prime_zeta_tail: sigma must exceed 1");
  const auto& primes = small_primes();
  if (P >= primes.back()) throw ResourceError("prime_zeta_tail: cutoff beyond prime table");
  std::vector<Real> logp;
  for (int p : primes) {
    if (p > P) break;
    logp.push_back(log(Real(p)));
  }
  const Real tol("1e-55");
  const Real logP = log(Real(P));
  Real total = 0;
  for (int n = 1;; ++n) {
    const Real ns = n * sigma;
    // log(zeta(ns) prod_{p <= P} (1 - p^(-ns))) ~ P^(1 - ns)
    if ((1 - ns) * logP < log(tol) && n > 1) break;
    const int mu = mobius_trial(n);
    if (mu == 0) continue;
    Real lg = log(zeta_real(ns, 50));
    for (const Real& l : logp) lg += log1p(-exp(-ns * l));
    total += Real(mu) / n * lg;
    if (n > 200) throw ResourceError("prime_zeta_tail: slow convergence");
  }
  return total;
}

} // namespace ht
