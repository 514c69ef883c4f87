#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "ht/analytic.hpp"
#include "ht/classgroup.hpp"
#include "ht/heegner.hpp"

namespace ht {

struct IdealHit {
  i64 N = 1;
  i64 b = 0;
  int order = 1;
};

struct CensusRecord {
  i64 d = 0;
  i64 h = 0;
  std::map<int, i64> torsion_count;
  std::vector<IdealHit> hits;
};

struct CensusOptions {
  int shards = 1;
  bool with_invariants = false;
};

// torsion profiles for every valid d in [lo, hi], ascending
struct TorsionDatabase {
  i64 lo = 1;
  i64 hi = 0;
  std::vector<int> ks;
  bool has_invariants = false;
  std::vector<TorsionProfile> profiles;

  const TorsionProfile* find(i64 d) const;
  bool covers(i64 lo_, i64 hi_, int k) const;
};

TorsionDatabase build_torsion_database(i64 lo, i64 hi, const std::vector<int>& ks,
                                       const CensusOptions& opt = {});

enum class CensusMethod { direct, tuples };

struct VerticalCensus {
  i64 total = 0;
  std::vector<CensusRecord> records;  // direct method with keep_records only
};

VerticalCensus vertical_census(i64 D, const Rational& Y, int k, CensusMethod method,
                               const CensusOptions& opt = {}, bool keep_records = false);
// direct method over a prebuilt database
VerticalCensus vertical_census(const TorsionDatabase& db, i64 D, const Rational& Y, int k,
                               bool keep_records = false);
// tuple counts, Moebius over k' | k, principal ideals subtracted
i64 vertical_census_tuples(i64 D, const Rational& Y, int k, int shards = 1);

// sum of e(f Re z) over the k = 3 vertical ideal set
std::complex<double> horizontal_census(const TorsionDatabase& db, i64 D, const Rational& Y, i64 f);

struct SmoothedOptions {
  bool main_term_only = false;  // allows psi without the pole condition
  double eps = 1e-12;
};
double smoothed_census(const TorsionDatabase& db, i64 D, double Y, int k,
                       const SmoothTestFunction& phi, const SmoothTestFunction& psi,
                       const SmoothedOptions& opt = {});

double dh_average(const TorsionDatabase& db, i64 D, const SmoothTestFunction& phi);

struct DualIdentityReport {
  double lhs = 0;  // sum phi(d/D) |H_3(-d)*|
  double rhs = 0;  // 2 sum phi(d/D) sum_a Psi(1 / Im z_a)
  double abs_diff = 0;
  double bound = 0;  // truncation bound on |lhs - rhs|
  long long classes = 0;
  long long terms = 0;
  bool ok() const { return abs_diff <= bound; }
};
DualIdentityReport dual_identity_check(const TorsionDatabase& db, i64 D,
                                       const SmoothTestFunction& phi, double eps = 1e-10);

struct HistogramGrid {
  int nx = 10;                 // equal Re bins over (-1/2, 1/2]
  std::vector<double> y_edges;  // ascending; the last may be infinite
};

struct Histogram {
  HistogramGrid grid;
  std::vector<std::vector<i64>> counts;  // [x][y]
  std::vector<std::vector<double>> model;
  i64 total = 0;  // all points with Im >= y_edges.front()
};

Histogram equidist_histogram(const TorsionDatabase& db, i64 D, const Rational& Ymax,
                             const HistogramGrid& grid);
int re_bin(i64 b, i64 N, int nx);

struct CuspViolation {
  i64 d = 0;
  i64 N = 0;
  i64 b = 0;
};
// order-k ideals with N^k < d; always empty for a correct census
std::vector<CuspViolation> cusp_cutoff_audit(const TorsionDatabase& db, i64 D, int k);
std::vector<CuspViolation> cusp_cutoff_audit(const std::vector<TorsionProfile>& profiles, int k);

struct AsymptoticModel {
  double main_coeff = 0;
  double secondary_coeff = 0;
  double main_exponent = 1;
  double secondary_exponent = 0;

  double main(double D) const { return main_coeff * std::pow(D, main_exponent); }
  double secondary(double D) const { return secondary_coeff * std::pow(D, secondary_exponent); }
  double predict(double D) const { return main(D) + secondary(D); }
};

// sharp cutoff Im z > 1/Y, d <= D
AsymptoticModel vertical_model(double Y, int k);
// smoothed weights phi(d/D) psi(Im(z)^-1 / Y)
AsymptoticModel smoothed_model(double Y, int k, const SmoothTestFunction& phi,
                               const SmoothTestFunction& psi);
// mean size of H_k(-d)*, with the 2/pi^2 leading constant
AsymptoticModel dh_model(int k, const SmoothTestFunction& phi);
double asymptotic_model(double D, double Y, int k, const SmoothTestFunction& phi,
                        const SmoothTestFunction& psi);

double pairwise_sum(const std::vector<double>& v);

// tuples with l m <= floor(factor sqrt(d)) against conjugate pairs of primitive
// ideals a != (1), (sqrt(-d)) with a^k principal and N <= factor sqrt(d)
struct BijectionReport {
  i64 discriminants = 0;
  i64 tuples = 0;
  i64 pairs = 0;
  std::vector<std::string> mismatches;
  bool ok() const { return mismatches.empty(); }
};
BijectionReport bijection_check(i64 Dmax, int k, const Rational& factor);

} // namespace ht
