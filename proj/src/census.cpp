#include "ht/census.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include "ht/torsion.hpp"

namespace ht {

namespace {

const double kPi = M_PI;

// cosets of a reduced point z (Im z in [sqrt(3)/2, ymax]) with 1/Im(gz) <= X
double coset_count_bound(double X, double ymax) {
  const double ymin = std::sqrt(3.0) / 2;
  return (std::sqrt(X / ymin) + 1) * (2 * std::sqrt(X * ymax) + 1);
}

// sum over cosets with 1/Im(gz) > Y U of |Psi(1/(Y Im(gz)))|, using |Psi(u)| <= 1.91 exp(-pi u / 2)
double psi_class_tail(double U, double Y, double ymax) {
  double t = 0;
  for (int j = 0; j < 1000000; ++j) {
    const double term = coset_count_bound(Y * (U + j + 1), ymax) * 1.91 * std::exp(-kPi * (U + j) / 2);
    t += term;
    if (term < 1e-300 || (j > 10 && term < t * 1e-17)) break;
  }
  return t;
}

double psi_cutoff_for(double eps_class, double Y, double ymax) {
  double U = 1;
  while (psi_class_tail(U, Y, ymax) > eps_class) U += 0.5;
  return U;
}

Rational rational_above(double x) {
  const i64 q = 1000;
  return {i64(std::ceil(x * double(q))) + 1, q};
}

struct PhiRange {
  i64 lo, hi;
};

PhiRange phi_range(const SmoothTestFunction& phi, i64 D) {
  if (!(phi.support_hi > 0)) throw ConfigError("phi must be compactly supported");
  const i64 lo = std::max<i64>(1, i64(std::floor(phi.support_lo * double(D))));
  const i64 hi = i64(std::ceil(phi.support_hi * double(D)));
  return {lo, hi};
}

void require_cover(const TorsionDatabase& db, i64 lo, i64 hi, int k) {
  if (!db.covers(lo, hi, k))
    throw RangeError("census: torsion database does not cover the requested range or order");
}

} // namespace

double pairwise_sum(const std::vector<double>& v) {
  if (v.empty()) return 0;
  std::vector<double> cur = v;
  while (cur.size() > 1) {
    std::vector<double> next((cur.size() + 1) / 2);
    for (std::size_t i = 0; i < next.size(); ++i)
      next[i] = cur[2 * i] + (2 * i + 1 < cur.size() ? cur[2 * i + 1] : 0.0);
    cur.swap(next);
  }
  return cur[0];
}

const TorsionProfile* TorsionDatabase::find(i64 d) const {
  auto it = std::lower_bound(profiles.begin(), profiles.end(), d,
                             [](const TorsionProfile& p, i64 x) { return p.d < x; });
  if (it == profiles.end() || it->d != d) return nullptr;
  return &*it;
}

bool TorsionDatabase::covers(i64 lo_, i64 hi_, int k) const {
  if (lo_ < lo || hi_ > hi) return false;
  return std::find(ks.begin(), ks.end(), k) != ks.end();
}

TorsionDatabase build_torsion_database(i64 lo, i64 hi, const std::vector<int>& ks,
                                       const CensusOptions& opt) {
  if (lo < 1 || hi < lo) throw DomainError("build_torsion_database: need 1 <= lo <= hi");
  for (int k : ks) check_torsion_order(k);
  TorsionDatabase db;
  db.lo = lo;
  db.hi = hi;
  db.ks = ks;
  db.has_invariants = opt.with_invariants;
  const SmallestFactorTable spf(hi + hi / 3 + 16);
  const int shards = std::max(1, opt.shards);
  std::vector<std::vector<TorsionProfile>> parts(static_cast<std::size_t>(shards));
  const i64 span = hi - lo + 1;
  auto work = [&](int s) {
    const i64 a = lo + span * s / shards;
    const i64 b = lo + span * (s + 1) / shards - 1;
    if (b < a) return;
    for_each_discriminant(a, b, [&](i64 d) {
      parts[std::size_t(s)].push_back(torsion_profile(d, ks, opt.with_invariants, &spf));
    });
  };
  if (shards == 1) {
    work(0);
  } else {
    std::vector<std::thread> th;
    for (int s = 0; s < shards; ++s) th.emplace_back(work, s);
    for (auto& t : th) t.join();
  }
  for (auto& p : parts)
    for (auto& x : p) db.profiles.push_back(std::move(x));
  return db;
}

VerticalCensus vertical_census(const TorsionDatabase& db, i64 D, const Rational& Y, int k,
                               bool keep_records) {
  check_torsion_order(k);
  if (Y.p <= 0) throw DomainError("vertical_census: Y must be positive");
  VerticalCensus out;
  if (D < 2) return out;
  require_cover(db, std::max<i64>(db.lo, 1), D, k);
  if (db.lo > 2) throw RangeError("vertical_census: database must start at d <= 2");
  for (const auto& prof : db.profiles) {
    if (prof.d > D) break;
    const auto it = prof.exact.find(k);
    const std::vector<QuadForm> none;
    const auto& forms = it == prof.exact.end() ? none : it->second;
    CensusRecord rec;
    if (keep_records) {
      rec.d = prof.d;
      rec.h = prof.h;
      for (int kk : db.ks) rec.torsion_count[kk] = prof.count(kk);
    }
    for (const auto& f : forms) {
      const PrimitiveIdeal a = form_to_ideal(f, prof.d);
      if (keep_records) {
        for (const auto& [g, img] : coset_images(a, Y)) {
          (void)g;
          rec.hits.push_back({img.N, img.b, k});
          ++out.total;
        }
      } else {
        out.total += coset_image_count(a, Y);
      }
    }
    if (keep_records) out.records.push_back(std::move(rec));
  }
  return out;
}

i64 vertical_census_tuples(i64 D, const Rational& Y, int k, int shards) {
  check_torsion_order(k);
  if (D < 2 || Y.p <= 0) return 0;
  // (sqrt(-d)) lies outside the tuple set; it passes the cut iff d <= Y^2
  i64 R = 0;
  const i64 ysq = (Y.p / Y.q + 1) * (Y.p / Y.q + 1);
  for (i64 d : sieve_discriminants(1, std::max<i64>(1, std::min(D, ysq))))
    if (within_norm_cut(d, d, Y)) ++R;
  const i64 P = principal_primitive_count(D, Y);
  i64 total = 0;
  for (int kp = 3; kp <= k; kp += 2) {
    if (k % kp != 0) continue;
    const int mu = mobius_trial(k / kp);
    if (mu == 0) continue;
    const i64 T = tuple_census(D, Y, kp, shards).count;
    total += mu * (2 * T + R - P);
  }
  return total;
}

VerticalCensus vertical_census(i64 D, const Rational& Y, int k, CensusMethod method,
                               const CensusOptions& opt, bool keep_records) {
  check_torsion_order(k);
  if (method == CensusMethod::tuples) {
    VerticalCensus out;
    out.total = vertical_census_tuples(D, Y, k, opt.shards);
    return out;
  }
  if (D < 2) return {};
  const TorsionDatabase db = build_torsion_database(1, D, {k}, opt);
  return vertical_census(db, D, Y, k, keep_records);
}

std::complex<double> horizontal_census(const TorsionDatabase& db, i64 D, const Rational& Y, i64 f) {
  if (f == 0) throw DomainError("horizontal_census: f must be nonzero");
  if (D < 2) return 0;
  require_cover(db, std::max<i64>(db.lo, 1), D, 3);
  std::vector<double> re, im;
  for (const auto& prof : db.profiles) {
    if (prof.d > D) break;
    const auto it = prof.exact.find(3);
    if (it == prof.exact.end()) continue;
    for (const auto& form : it->second) {
      for (const auto& [g, a] : coset_images(form_to_ideal(form, prof.d), Y)) {
        (void)g;
        const i128 r = mod_floor128(i128(f) * a.b, a.N);
        const double ang = 2 * kPi * double(r) / double(a.N);
        re.push_back(std::cos(ang));
        im.push_back(std::sin(ang));
      }
    }
  }
  return {pairwise_sum(re), pairwise_sum(im)};
}

double smoothed_census(const TorsionDatabase& db, i64 D, double Y, int k,
                       const SmoothTestFunction& phi, const SmoothTestFunction& psi,
                       const SmoothedOptions& opt) {
  check_torsion_order(k);
  if (!(Y > 0)) throw DomainError("smoothed_census: Y must be positive");
  if (!psi.pole_free_except_zero && !opt.main_term_only)
    throw ConfigError("smoothed_census: psi '" + psi.name +
                      "' is not admissible; set main_term_only to use it for the main term");
  const PhiRange r = phi_range(phi, D);
  require_cover(db, std::max(r.lo, db.lo), r.hi, k);
  double U;
  if (psi.kind == KernelKind::Psi) {
    long long classes = 0;
    for (const auto& prof : db.profiles)
      if (prof.d >= r.lo && prof.d <= r.hi) classes += prof.count(k);
    const double ymax = std::sqrt(double(r.hi)) / 2;
    U = psi_cutoff_for(opt.eps / double(std::max(1LL, classes)), Y, ymax);
  } else {
    U = psi.tail_cutoff(opt.eps);
  }
  const Rational cut = rational_above(U * Y);
  std::vector<double> parts;
  for (const auto& prof : db.profiles) {
    if (prof.d < r.lo) continue;
    if (prof.d > r.hi) break;
    const double w = phi(double(prof.d) / double(D));
    if (w == 0) continue;
    const auto it = prof.exact.find(k);
    if (it == prof.exact.end()) continue;
    const double sd = std::sqrt(double(prof.d));
    double s = 0;
    for (const auto& form : it->second)
      for (const auto& [g, a] : coset_images(form_to_ideal(form, prof.d), cut)) {
        (void)g;
        s += psi(double(a.N) / sd / Y);
      }
    parts.push_back(w * s);
  }
  return pairwise_sum(parts);
}

double dh_average(const TorsionDatabase& db, i64 D, const SmoothTestFunction& phi) {
  const PhiRange r = phi_range(phi, D);
  require_cover(db, std::max(r.lo, db.lo), r.hi, 3);
  std::vector<double> parts;
  for (const auto& prof : db.profiles) {
    if (prof.d < r.lo) continue;
    if (prof.d > r.hi) break;
    const i64 c = prof.count(3);
    if (c) parts.push_back(phi(double(prof.d) / double(D)) * double(c));
  }
  return pairwise_sum(parts);
}

DualIdentityReport dual_identity_check(const TorsionDatabase& db, i64 D,
                                       const SmoothTestFunction& phi, double eps) {
  if (!(eps > 0)) throw DomainError("dual_identity_check: eps must be positive");
  const PhiRange r = phi_range(phi, D);
  require_cover(db, std::max(r.lo, db.lo), r.hi, 3);
  DualIdentityReport rep;
  rep.lhs = dh_average(db, D, phi);
  for (const auto& prof : db.profiles)
    if (prof.d >= r.lo && prof.d <= r.hi) rep.classes += prof.count(3);
  const double ymax = std::sqrt(double(r.hi)) / 2;
  const double eps_class = eps / (2 * double(std::max(1LL, rep.classes)));
  const double U = psi_cutoff_for(eps_class, 1.0, ymax);
  const double tail = psi_class_tail(U, 1.0, ymax);
  const double psi_eps = 1e-16;
  const Rational cut = rational_above(U);
  std::vector<double> parts;
  double weight_classes = 0;
  for (const auto& prof : db.profiles) {
    if (prof.d < r.lo) continue;
    if (prof.d > r.hi) break;
    const auto it = prof.exact.find(3);
    if (it == prof.exact.end() || it->second.empty()) continue;
    const double w = phi(double(prof.d) / double(D));
    const double sd = std::sqrt(double(prof.d));
    double s = 0;
    for (const auto& form : it->second) {
      for (const auto& [g, a] : coset_images(form_to_ideal(form, prof.d), cut)) {
        (void)g;
        s += psi_kernel(double(a.N) / sd, psi_eps);
        ++rep.terms;
      }
    }
    weight_classes += w * double(it->second.size());
    parts.push_back(2 * w * s);
  }
  rep.rhs = pairwise_sum(parts);
  rep.abs_diff = std::abs(rep.lhs - rep.rhs);
  rep.bound = 2 * weight_classes * tail + 2 * double(rep.terms) * psi_eps +
              1e-15 * (std::abs(rep.lhs) + double(rep.terms));
  return rep;
}

int re_bin(i64 b, i64 N, int nx) {
  if (nx < 1) throw DomainError("re_bin: nx must be positive");
  if (b == 0) return nx / 2;
  auto pos = [&](i64 bb) {
    const i128 num = i128(nx) * (2 * i128(bb) + N), den = 2 * i128(N);
    return int((num + den - 1) / den) - 1;
  };
  return b > 0 ? pos(b) : nx - 1 - pos(-b);
}

Histogram equidist_histogram(const TorsionDatabase& db, i64 D, const Rational& Ymax,
                             const HistogramGrid& grid) {
  if (grid.nx < 1 || grid.y_edges.size() < 2) throw ConfigError("histogram: empty grid");
  for (std::size_t j = 1; j < grid.y_edges.size(); ++j)
    if (!(grid.y_edges[j] > grid.y_edges[j - 1])) throw ConfigError("histogram: y edges must ascend");
  if (grid.y_edges.front() * Ymax.value() < 1 - 1e-12)
    throw ConfigError("histogram: lowest edge lies below the cut 1/Ymax");
  require_cover(db, std::max<i64>(db.lo, 1), D, 3);
  Histogram H;
  H.grid = grid;
  const std::size_t ny = grid.y_edges.size() - 1;
  H.counts.assign(std::size_t(grid.nx), std::vector<i64>(ny, 0));
  H.model.assign(std::size_t(grid.nx), std::vector<double>(ny, 0));
  const double dens = 6 * double(D) / (kPi * kPi * kPi);
  for (std::size_t j = 0; j < ny; ++j) {
    const double y1 = grid.y_edges[j], y2 = grid.y_edges[j + 1];
    const double mass = (1 / y1 - (std::isinf(y2) ? 0.0 : 1 / y2)) / grid.nx;
    for (int i = 0; i < grid.nx; ++i) H.model[std::size_t(i)][j] = dens * mass;
  }
  for (const auto& prof : db.profiles) {
    if (prof.d > D) break;
    const auto it = prof.exact.find(3);
    if (it == prof.exact.end()) continue;
    const double sd = std::sqrt(double(prof.d));
    for (const auto& form : it->second)
      for (const auto& [g, a] : coset_images(form_to_ideal(form, prof.d), Ymax)) {
        (void)g;
        const double y = sd / double(a.N);
        if (y < grid.y_edges.front()) continue;
        ++H.total;
        auto up = std::upper_bound(grid.y_edges.begin(), grid.y_edges.end(), y);
        const std::size_t j = std::size_t(up - grid.y_edges.begin()) - 1;
        if (j >= ny) continue;
        ++H.counts[std::size_t(re_bin(a.b, a.N, grid.nx))][j];
      }
  }
  return H;
}

std::vector<CuspViolation> cusp_cutoff_audit(const std::vector<TorsionProfile>& profiles, int k) {
  check_torsion_order(k);
  std::vector<CuspViolation> out;
  for (const auto& prof : profiles) {
    const auto it = prof.exact.find(k);
    if (it == prof.exact.end()) continue;
    for (const auto& f : it->second) {
      // the reduced form's a is the least norm in its class
      i128 p = 1;
      for (int j = 0; j < k && p < prof.d; ++j) p *= f.a;
      if (p < prof.d) {
        const PrimitiveIdeal a = form_to_ideal(f, prof.d);
        out.push_back({prof.d, a.N, a.b});
      }
    }
  }
  return out;
}

std::vector<CuspViolation> cusp_cutoff_audit(const TorsionDatabase& db, i64 D, int k) {
  require_cover(db, std::max<i64>(db.lo, 1), D, k);
  std::vector<TorsionProfile> sel;
  for (const auto& p : db.profiles)
    if (p.d <= D) sel.push_back(p);
  return cusp_cutoff_audit(sel, k);
}

BijectionReport bijection_check(i64 Dmax, int k, const Rational& factor) {
  check_torsion_order(k);
  BijectionReport rep;
  auto fail = [&](i64 d, const std::string& what) {
    if (rep.mismatches.size() < 50) rep.mismatches.push_back("d=" + std::to_string(d) + ": " + what);
  };
  for (i64 d : sieve_discriminants(1, std::max<i64>(Dmax, 1))) {
    ++rep.discriminants;
    const i64 Nmax = norm_cut(d, factor);
    // tuple side
    std::set<PrimitiveIdeal> from_tuples;
    for (const auto& T : enumerate_tuples(d, k, Nmax)) {
      ++rep.tuples;
      const PrimitiveIdeal a = tuple_to_ideal(T, d);
      const PrimitiveIdeal rep_a = std::min(a, conjugate(a));
      if (!from_tuples.insert(rep_a).second) fail(d, "two tuples hit one conjugate pair");
      const IdealTupleResult back = ideal_to_tuple(a, k);
      if (back.status != TupleStatus::found || back.conjugate || !(back.tuple == T))
        fail(d, "round trip through ideal_to_tuple failed");
      const IdealTupleResult back_c = ideal_to_tuple(conjugate(a), k);
      if (back_c.status != TupleStatus::found || !back_c.conjugate || !(back_c.tuple == T))
        fail(d, "conjugate does not map back to the tuple");
    }
    // class group side
    const ClassGroup G = class_group_of(d);
    std::set<PrimitiveIdeal> from_classes;
    for (std::size_t i = 0; i < G.reduced_forms.size(); ++i) {
      if (k % G.orders[i] != 0) continue;
      const PrimitiveIdeal base = form_to_ideal(G.reduced_forms[i], d);
      for (const auto& [g, a] : coset_images(base, factor)) {
        (void)g;
        if (a.N == 1 || (a.N == d && a.b == 0)) continue;
        from_classes.insert(std::min(a, conjugate(a)));
      }
    }
    rep.pairs += i64(from_classes.size());
    if (from_tuples != from_classes) fail(d, "tuple images differ from the class group pairs");
  }
  return rep;
}

AsymptoticModel vertical_model(double Y, int k) {
  check_torsion_order(k);
  AsymptoticModel m;
  m.main_coeff = 6 / (kPi * kPi * kPi) * Y;
  const double e = 0.5 + 1.0 / k;
  m.secondary_exponent = e;
  // sharp cutoffs: phi_hat(s) = 1/s, Res psi_hat = 1
  if (k == 3)
    m.secondary_coeff = static_cast<double>(C56().value);
  else
    m.secondary_coeff = static_cast<double>(C1k(k).value) / e;
  return m;
}

AsymptoticModel smoothed_model(double Y, int k, const SmoothTestFunction& phi,
                               const SmoothTestFunction& psi) {
  check_torsion_order(k);
  AsymptoticModel m;
  const double e = 0.5 + 1.0 / k;
  m.main_coeff = 6 / (kPi * kPi * kPi) * phi.mellin(1.0).real() * psi.mellin(1.0).real() * Y;
  m.secondary_exponent = e;
  m.secondary_coeff = static_cast<double>(C1k(k).value) * phi.mellin(e).real() * psi.residue_zero;
  return m;
}

AsymptoticModel dh_model(int k, const SmoothTestFunction& phi) {
  check_torsion_order(k);
  AsymptoticModel m;
  const double e = 0.5 + 1.0 / k;
  m.main_coeff = 2 / (kPi * kPi) * phi.mellin(1.0).real();
  m.secondary_exponent = e;
  m.secondary_coeff = static_cast<double>(C1k(k).value) * phi.mellin(e).real();
  return m;
}

double asymptotic_model(double D, double Y, int k, const SmoothTestFunction& phi,
                        const SmoothTestFunction& psi) {
  return smoothed_model(Y, k, phi, psi).predict(D);
}

} // namespace ht
