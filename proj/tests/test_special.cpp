#include <doctest.h>

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include "ht/special.hpp"

using namespace ht;

namespace {

bool close(const Real& a, const Real& b, const Real& tol) { return abs(a - b) <= tol * (1 + abs(b)); }

} // namespace

TEST_CASE("zeta at even integers and negative integers") {
  const Real pi = real_pi();
  CHECK(close(zeta_real(Real(2)), pi * pi / 6, Real("1e-44")));
  CHECK(close(zeta_real(Real(4)), pow(pi, 4) / 90, Real("1e-44")));
  CHECK(close(zeta_real(Real(-1)), Real(-1) / 12, Real("1e-40")));
  CHECK(close(zeta_real(Real(-3)), Real(1) / 120, Real("1e-40")));
  CHECK(close(zeta_real(Real(0)), Real(-0.5), Real("1e-44")));
  CHECK_THROWS_AS(zeta_real(Real(1)), PoleError);
}

TEST_CASE("zeta against boost") {
  for (const char* s : {"0.5", "0.3333333333333333333333333333333333333333333333333", "3", "1.0001",
                        "-0.5", "-7.25", "0.9", "25"}) {
    const Real x(s);
    const Certified z = zeta_certified(x);
    const Real ref = boost::math::zeta(x);
    CHECK(close(z.value, ref, Real("1e-35")));
    CHECK(z.error < Real("1e-30"));
  }
}

TEST_CASE("Gamma against boost and the reflection formula") {
  for (const char* s : {"0.5", "0.1666666666666666666666666666666666666666666666667", "2.5", "7",
                        "45.3", "-0.5", "-2.75", "0.001"}) {
    const Real x(s);
    CHECK(close(gamma_real(x), boost::math::tgamma(x), Real("1e-40")));
  }
  CHECK(close(gamma_real(Real(0.5)), sqrt(real_pi()), Real("1e-45")));
  CHECK(close(lgamma_real(Real(100)), boost::math::lgamma(Real(100)), Real("1e-40")));
  CHECK_THROWS_AS(gamma_real(Real(0)), PoleError);
  CHECK_THROWS_AS(gamma_real(Real(-3)), PoleError);
}

TEST_CASE("complex Gamma") {
  const std::complex<double> z(0.5, 0);
  CHECK(std::abs(gamma_complex(z) - std::sqrt(M_PI)) < 1e-13);
  // |Gamma(1/2 + i y)|^2 = pi / cosh(pi y)
  for (double y : {0.3, 1.0, 4.0}) {
    const auto g = gamma_complex({0.5, y});
    CHECK(std::norm(g) == doctest::Approx(M_PI / std::cosh(M_PI * y)).epsilon(1e-12));
  }
  // Gamma(z) Gamma(1 - z) = pi / sin(pi z)
  const std::complex<double> w(-1.3, 0.7);
  const auto lhs = gamma_complex(w) * gamma_complex(1.0 - w);
  const auto rhs = M_PI / std::sin(M_PI * w);
  CHECK(std::abs(lhs - rhs) < 1e-11 * std::abs(rhs));
  CHECK(std::abs(rgamma_complex({-2, 0})) < 1e-14);
  CHECK(std::abs(rgamma_complex({3.5, -1}) * gamma_complex({3.5, -1}) - 1.0) < 1e-12);
}

TEST_CASE("prime zeta tails against direct summation") {
  const auto& P = small_primes();
  CHECK(P.front() == 2);
  CHECK(P.size() == 82025);  // pi(2^20)
  for (double sigma : {2.0, 3.0, 1.5}) {
    Real direct = 0;
    for (int p : P)
      if (p > 1000) direct += pow(Real(p), -Real(sigma));
    // primes beyond 2^20: integral of t^-sigma / log t, i.e. E1((sigma-1) log x)
    const double x = double(1 << 20);
    const double beyond = boost::math::expint(1, (sigma - 1) * std::log(x));
    const Real tail = prime_zeta_tail(Real(sigma), 1000);
    CHECK(static_cast<double>(abs(tail - direct - beyond)) < 0.02 * beyond);
  }
}
