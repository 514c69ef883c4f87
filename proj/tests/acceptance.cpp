// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <string>

#include "ht/census.hpp"
#include "ht/torsion.hpp"

using namespace ht;

namespace {

constexpr double kEisensteinTol = 1e-8;
constexpr double kDualIdentityRelTol = 1e-5;
constexpr double kConstantTol = 1e-8;
constexpr double kClosedValueTol = 1e-10;
constexpr double kTrendBand5 = 0.2;   // D = 1e5
constexpr double kTrendBand6 = 0.1;   // D = 1e6
constexpr double kDhBand = 0.2;
constexpr double kCellBand = 0.15;
constexpr double kCellMinModel = 500;
constexpr double kHorizontalMax = 0.2;
constexpr double kMellinRelTol = 1e-6;
constexpr int kShards = 8;

int failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int id, const char* name, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("%s  %2d %-22s %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

void run_guarded(int id, const char* name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

// cosets (c, e) with Im(g z_a) >= 1/Y by scanning a box that contains them all
std::set<CosetElement> scan_cosets(const PrimitiveIdeal& a, const Rational& Y) {
  std::set<CosetElement> out;
  const double sd = std::sqrt(double(a.d));
  const double budget = Y.value() * double(a.N) * sd;  // |c z + e|^2 N^2 <= Y N sqrt(d)
  const i64 C = i64(std::sqrt(budget / double(a.d))) + 2;
  for (i64 c = 0; c <= C; ++c) {
    const i64 E = i64((double(c) * std::abs(double(a.b)) + std::sqrt(budget)) / double(a.N)) + 2;
    for (i64 e = -E; e <= E; ++e) {
      if (c == 0 && e != 1) continue;
      if (gcd(c, e) != 1) continue;
      const i128 u = i128(c) * a.b + i128(e) * a.N;
      const u128 Q = u128(u * u + i128(c) * c * a.d);
      if (u128(Y.q) * u128(Y.q) * Q * Q <= u128(Y.p) * u128(Y.p) * u128(a.N) * u128(a.N) * u128(a.d))
        out.insert({c, e});
    }
  }
  return out;
}

} // namespace

int main() {
  using clock = std::chrono::steady_clock;
  const auto t_all = clock::now();

  run_guarded(1, "bijection", [] {
    const auto t0 = clock::now();
    i64 tuples = 0, pairs = 0;
    std::size_t bad = 0;
    std::string first;
    for (int k : {3, 5}) {
      const BijectionReport r = bijection_check(2000, k, Rational(10));
      tuples += r.tuples;
      pairs += r.pairs;
      bad += r.mismatches.size();
      if (first.empty() && !r.mismatches.empty()) first = r.mismatches.front();
    }
    const double t = seconds_since(t0);
    report(1, "bijection", bad == 0 && t <= 120,
           fmt("tuples=%lld pairs=%lld mismatches=%zu %s time=%.1fs", (long long)tuples, (long long)pairs,
               bad, first.c_str(), t));
  });

  // shared database for the D = 1e6 criteria
  const auto t_db = clock::now();
  CensusOptions opt;
  opt.shards = kShards;
  std::printf("info     building torsion database d <= 1e6 ...\n");
  std::fflush(stdout);
  const TorsionDatabase big = build_torsion_database(1, 1000000, {3}, opt);
  const double db_time = seconds_since(t_db);
  std::printf("info     database: %zu discriminants, %.1fs\n", big.profiles.size(), db_time);

  run_guarded(2, "dual census", [&] {
    const auto t0 = clock::now();
    int checked = 0;
    std::string bad;
    for (int k : {3, 5})
      for (const Rational& Y : {Rational(1, 2), Rational(1), Rational(2), Rational(5)}) {
        const i64 a = vertical_census(2000, Y, k, CensusMethod::direct).total;
        const i64 b = vertical_census_tuples(2000, Y, k, kShards);
        ++checked;
        if (a != b) bad += fmt(" (Y=%s k=%d: %lld vs %lld)", Y.str().c_str(), k, (long long)a, (long long)b);
      }
    const i64 a = vertical_census(big, 100000, Rational(1), 3).total;
    const i64 b = vertical_census_tuples(100000, Rational(1), 3, kShards);
    if (a != b) bad += fmt(" (D=1e5: %lld vs %lld)", (long long)a, (long long)b);
    const double t = seconds_since(t0);
    report(2, "dual census", bad.empty() && t <= 600,
           fmt("grid=%d spot D=1e5 direct=%lld tuples=%lld time=%.1fs%s", checked, (long long)a,
               (long long)b, t, bad.c_str()));
  });

  run_guarded(3, "rho density", [] {
    long long cases = 0, skipped = 0, bad = 0;
    for (i64 l = 1; l <= 12; ++l)
      for (i64 m = 1; m <= 30; ++m)
        for (i64 d : {1, 3, 7})
          for (i64 r = 1; r <= 200; ++r) {
            if (!rho_preconditions(m, l, d, r)) {
              ++skipped;
              continue;
            }
            ++cases;
            if (rho_density(m, l, d, r) != rho_density_brute(m, l, d, r)) ++bad;
          }
    report(3, "rho density", bad == 0 && cases > 0,
           fmt("cases=%lld mismatches=%lld outside_hypotheses=%lld", cases, bad, skipped));
  });

  run_guarded(4, "eisenstein", [] {
    const auto t0 = clock::now();
    std::mt19937_64 rng(20261019);
    std::uniform_real_distribution<double> ux(-0.5, 0.5), ulog(-3, 3);
    double worst = 0;
    for (int i = 0; i < 25; ++i) {
      const double y = std::pow(10.0, i == 0 ? -3.0 : (i == 1 ? 3.0 : ulog(rng)));
      const KernelSum s = eisenstein_kernel_sum(ux(rng), y, 1e-12);
      worst = std::max(worst, std::abs(s.value - 0.5));
    }
    const double t = seconds_since(t0);
    report(4, "eisenstein", worst <= kEisensteinTol && t <= 60, fmt("max|sum-1/2|=%.3e time=%.1fs", worst, t));
  });

  run_guarded(5, "dual identity", [&] {
    const auto phi = SmoothTestFunction::bump(1, 2);
    const DualIdentityReport r = dual_identity_check(big, 3000, phi, 1e-10);
    const double rel = r.abs_diff / std::abs(r.lhs);
    report(5, "dual identity", rel <= kDualIdentityRelTol && r.ok(),
           fmt("lhs=%.12g rhs=%.12g rel=%.3e bound=%.1e classes=%lld", r.lhs, r.rhs, rel, r.bound, r.classes));
  });

  run_guarded(6, "constants", [] {
    const Real F = F_one_third_closed().value;
    const Real I = I_real(Real(2) / 3);
    const Real c56 = C56().value, c13 = C1k(3).value;
    const double e1 = static_cast<double>(abs(F * I / 12 - c56 / 2));
    const double e2 = static_cast<double>(abs(c56 - Real(6) / 5 * c13));
    const double e3 = static_cast<double>(abs(I_real(Real(1)) - real_pi()));
    const double e4 = static_cast<double>(abs(mellin_Psi_real(Real(1)) - real_pi() / 6));
    const bool pass = e1 <= kConstantTol && e2 <= kConstantTol && e3 <= kClosedValueTol &&
                      e4 <= kClosedValueTol && c56 < 0;
    report(6, "constants", pass,
           fmt("C56=%.14f |FI/12-C56/2|=%.1e |C56-6/5 C13|=%.1e |I(1)-pi|=%.1e |Psi^(1)-pi/6|=%.1e",
               static_cast<double>(c56), e1, e2, e3, e4));
  });

  run_guarded(7, "vertical trend", [&] {
    const auto t0 = clock::now();
    const AsymptoticModel m = vertical_model(1, 3);
    bool pass = true;
    std::string detail;
    for (auto [D, band] : {std::pair<i64, double>{100000, kTrendBand5}, {1000000, kTrendBand6}}) {
      const double v = double(vertical_census(big, D, Rational(1), 3).total);
      const double ratio = v / m.main(double(D));
      const double err_main = std::abs(v - m.main(double(D)));
      const double err_full = std::abs(v - m.predict(double(D)));
      const bool ok = std::abs(ratio - 1) <= band && err_full < err_main;
      pass = pass && ok;
      detail += fmt("D=%lld count=%.0f main=%.1f +sec=%.1f ratio=%.4f |res| %.1f->%.1f; ", (long long)D, v,
                    m.main(double(D)), m.predict(double(D)), ratio, err_main, err_full);
    }
    const double t = seconds_since(t0) + db_time;
    pass = pass && t <= 1200;
    report(7, "vertical trend", pass, detail + fmt("time=%.1fs", t));
  });

  run_guarded(8, "smoothed DH", [&] {
    const auto phi = SmoothTestFunction::bump(0.5, 1);
    const AsymptoticModel m = dh_model(3, phi);
    double r[3];
    const i64 Ds[3] = {10000, 100000, 1000000};
    for (int i = 0; i < 3; ++i) r[i] = dh_average(big, Ds[i], phi) / m.main(double(Ds[i]));
    const bool band = std::abs(r[1] - 1) <= kDhBand;
    const bool mono = std::abs(r[0] - 1) > std::abs(r[1] - 1) && std::abs(r[1] - 1) > std::abs(r[2] - 1);
    report(8, "smoothed DH", band && mono,
           fmt("ratio 1e4=%.4f 1e5=%.4f 1e6=%.4f monotone=%s", r[0], r[1], r[2], mono ? "yes" : "no"));
  });

  run_guarded(9, "equidistribution", [&] {
    HistogramGrid g;
    g.nx = 10;
    g.y_edges = {0.5, 0.75, 1, 1.25, 1.5, 2, 3, 4};
    const Histogram H = equidist_histogram(big, 1000000, Rational(2), g);
    int checked = 0, bad = 0;
    double worst = 0;
    bool symmetric = true;
    for (int i = 0; i < g.nx; ++i)
      for (std::size_t j = 0; j + 1 < g.y_edges.size(); ++j) {
        const double model = H.model[std::size_t(i)][j];
        const i64 c = H.counts[std::size_t(i)][j];
        if (c != H.counts[std::size_t(g.nx - 1 - i)][j]) symmetric = false;
        if (model < kCellMinModel) continue;
        ++checked;
        const double dev = std::abs(double(c) / model - 1);
        worst = std::max(worst, dev);
        if (dev > kCellBand) ++bad;
      }
    // the cusp cell above the grid, for reference only
    HistogramGrid cusp;
    cusp.nx = 1;
    cusp.y_edges = {4, std::numeric_limits<double>::infinity()};
    const Histogram C = equidist_histogram(big, 1000000, Rational(2), cusp);
    std::printf("info     cusp cell Im >= 4: count=%lld model=%.0f ratio=%.3f\n", (long long)C.counts[0][0],
                C.model[0][0], double(C.counts[0][0]) / C.model[0][0]);
    report(9, "equidistribution", bad == 0 && checked > 0 && symmetric,
           fmt("points=%lld cells_checked=%d out_of_band=%d max_dev=%.4f symmetric=%s", (long long)H.total,
               checked, bad, worst, symmetric ? "yes" : "no"));
  });

  run_guarded(10, "horizontal decay", [&] {
    const double v5 = double(vertical_census(big, 100000, Rational(1), 3).total);
    const double v6 = double(vertical_census(big, 1000000, Rational(1), 3).total);
    bool pass = true;
    std::string detail;
    double r1 = 0, s5 = 0;
    for (i64 f : {1, 2, 3}) {
      const auto s = horizontal_census(big, 100000, Rational(1), f);
      const double r = std::abs(s) / v5;
      if (f == 1) {
        r1 = r;
        s5 = s.real();
      }
      pass = pass && r <= kHorizontalMax;
      detail += fmt("f=%lld %.6f ", (long long)f, r);
    }
    const auto s6 = horizontal_census(big, 1000000, Rational(1), 1);
    const double r6 = std::abs(s6) / v6;
    for (i64 f : {2, 3})
      std::printf("info     horizontal f=%lld at 1e6: ratio=%.6f\n", (long long)f,
                  std::abs(horizontal_census(big, 1000000, Rational(1), f)) / v6);
    std::printf("info     horizontal f=1 sums: 1e5 %.3f (sqrt V %.0f), 1e6 %.3f (sqrt V %.0f)\n",
                s5, std::sqrt(v5), s6.real(), std::sqrt(v6));
    pass = pass && r6 < r1;
    report(10, "horizontal decay", pass, detail + fmt("f=1 at 1e5 %.6f, at 1e6 %.6f", r1, r6));
  });

  run_guarded(11, "cusp cutoff", [] {
    const TorsionDatabase db = build_torsion_database(1, 100000, {3, 5, 7});
    std::size_t v = 0;
    for (int k : {3, 5, 7}) v += cusp_cutoff_audit(db, 100000, k).size();
    report(11, "cusp cutoff", v == 0, fmt("violations=%zu", v));
  });

  run_guarded(12, "coset geometry", [] {
    std::mt19937_64 rng(12);
    int over = 0, mismatch = 0;
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
      i64 d = 0;
      do d = 2 + 4 * i64(rng() % 2500);
      while (!is_valid_discriminant(d));
      const i64 q = 1 + i64(rng() % 10);
      const Rational Y(1 + i64(rng() % u64(100 * q)), q);
      const ClassGroup G = class_group_of(d);
      const PrimitiveIdeal a = form_to_ideal(G.reduced_forms[rng() % G.reduced_forms.size()], d);
      const auto imgs = coset_images(a, Y);
      std::set<CosetElement> got;
      for (const auto& [g, x] : imgs) got.insert(g);
      if (got != scan_cosets(a, Y) || got.size() != imgs.size()) ++mismatch;
      const double ratio = double(imgs.size()) / (1 + Y.value());
      worst = std::max(worst, ratio);
      if (ratio > 10) ++over;
    }
    report(12, "coset geometry", over == 0 && mismatch == 0,
           fmt("max count/(1+Y)=%.3f over_bound=%d oracle_mismatches=%d", worst, over, mismatch));
  });

  run_guarded(13, "mellin Phi", [] {
    const auto phi = SmoothTestFunction::lognormal();
    const auto psi = SmoothTestFunction::gaussian();
    const double closed = mellin_Phi(2, 2, 2, 3, phi, psi).real();
    const double num = mellin_Phi_numeric(2, 2, 2, 3, phi, psi, 1, 1, 1e-10);
    const double rel = std::abs(num - closed) / std::abs(closed);
    report(13, "mellin Phi", rel <= kMellinRelTol, fmt("closed=%.12g numeric=%.12g rel=%.2e", closed, num, rel));
  });

  std::printf("summary  %d failed, total %.1fs\n", failures, seconds_since(t_all));
  return failures == 0 ? 0 : 1;
}
