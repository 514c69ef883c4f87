#pragma once

#include <complex>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "ht/arith.hpp"

namespace ht {

using Real = boost::multiprecision::cpp_bin_float_50;

struct Certified {
  Real value;
  Real error;  // absolute
};

Real real_pi();
Real euler_gamma_const();

// Euler-Maclaurin; functional equation for s < 0. Throws PoleError at s = 1.
Certified zeta_certified(const Real& s, int digits = 45);
Real zeta_real(const Real& s, int digits = 45);
// Stirling with upward shift, reflection below 1/2. Throws PoleError at s = 0, -1, -2, ...
Real gamma_real(const Real& s);
Real lgamma_real(const Real& s);  // s > 0

std::complex<double> gamma_complex(std::complex<double> z);
// 1/Gamma, entire
std::complex<double> rgamma_complex(std::complex<double> z);

// sum over primes p > P of p^(-sigma), sigma > 1
Real prime_zeta_tail(const Real& sigma, i64 P);

const std::vector<int>& small_primes();  // primes below 2^20

} // namespace ht
