#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "ht/euler.hpp"
#include "ht/special.hpp"

namespace ht {

using cplx = std::complex<double>;

// I(s) = (sqrt(pi)/2) Gamma(s - 1/2) / ((3/2 - s) Gamma(s))
cplx I_of(cplx s);
// sum_n binom(1/2, n) (-1)^n / (3/2 - n - s), with an analytic tail beyond n_terms
cplx I_series(cplx s, int n_terms = 2000);
cplx J_of(cplx w, cplx s);
Real I_real(const Real& s);

// number of n mod 4r with l m^3 - l^2 d^2 n^2 = 2r mod 4r
int rho_density(i64 m, i64 l, i64 d, i64 r);
int rho_density_brute(i64 m, i64 l, i64 d, i64 r);
bool rho_preconditions(i64 m, i64 l, i64 d, i64 r);
int rho_sigma(i64 m, i64 l, int a);

Rational c2_factor(i64 l, i64 t);
Certified prod_one_minus_inv_p_p1();  // prod_p (1 - 1/(p(p+1)))
Certified local_constant_C(i64 l, i64 t);
double local_density_sum(i64 z, i64 l, i64 t, i64 Z);

Certified G_of(const Real& s);  // F(s) / zeta(s), s > 0
Certified F_of(const Real& s);  // s > 1/3, s != 1
Certified F_one_third_closed();
Certified C56();
Certified C1k(int k);

struct SecondaryConstants {
  Certified c56;
  Certified c1k;
};
SecondaryConstants secondary_constants(int k);

struct ConstantEntry {
  std::string name;
  Real value;
  Real error;
  std::string formula;
};
std::vector<ConstantEntry> constants_report();
std::string constants_report_json();

enum class KernelKind { bump_phi, Psi, lognormal, gaussian, sharp, custom };

struct SmoothTestFunction {
  KernelKind kind = KernelKind::custom;
  std::string name;
  std::vector<double> params;
  std::function<double(double)> eval;
  std::function<cplx(cplx)> mellin_closed;  // empty: quadrature
  double support_lo = 0;                    // integration range for quadrature mode
  double support_hi = 0;                    // 0: unbounded
  bool pole_free_except_zero = false;       // Mellin transform entire except a simple pole at 0
  double residue_zero = 0;

  double operator()(double y) const { return eval(y); }
  cplx mellin(cplx s, double* err = nullptr) const;
  // argument beyond which |f| <= eps (support end for compact kernels)
  double tail_cutoff(double eps) const;

  // exp(-1/(1 - x^2)) on (a, b) with x the affine image in (-1, 1)
  static SmoothTestFunction bump(double a, double b);
  static SmoothTestFunction Psi(double eps = 1e-15);
  static SmoothTestFunction lognormal();  // exp(-(log u)^2)
  static SmoothTestFunction gaussian();   // exp(-y^2)
  static SmoothTestFunction sharp();      // indicator of (0, 1]
  static SmoothTestFunction custom(std::string name, std::function<double(double)> f, double lo,
                                   double hi, bool pole_free_except_zero = false,
                                   double residue_zero = 0);
};

// Psi0(y) = (2 pi y - 1) exp(-pi y), Psi(y) = sum_m Psi0(m^2 y)
double psi0(double y);
int psi_truncation(double y, double eps);
double psi_kernel(double y, double eps = 1e-15);
// (2s - 1) pi^-s Gamma(s) zeta(2s), real s > 0
double mellin_Psi(double s);
Real mellin_Psi_real(const Real& s);
double mellin_Psi_residue_zero();

struct KernelSum {
  double value = 0;
  double tail_bound = 0;
  double cutoff = 0;  // largest Im(gz)^-1 included
  long long terms = 0;
};
// sum over Gamma_infty \ Gamma of Psi(1 / Im(gz))
KernelSum eisenstein_kernel_sum(double x, double y, double eps = 1e-12);

cplx mellin_Phi(cplx alpha, cplx beta, cplx gamma, int k, const SmoothTestFunction& phi,
                const SmoothTestFunction& psi);
// triple Mellin integral of Phi(x,y,z) = phi((x^k - y^2)/(D z^2)) psi(x z / (Y sqrt(x^k - y^2)))
double mellin_Phi_numeric(double alpha, double beta, double gamma, int k,
                          const SmoothTestFunction& phi, const SmoothTestFunction& psi,
                          double D = 1, double Y = 1, double tol = 1e-10);
double mellin_Phi_scaled(double alpha, double beta, double gamma, int k, double D, double Y,
                         const SmoothTestFunction& phi, const SmoothTestFunction& psi);

} // namespace ht
