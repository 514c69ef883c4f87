#include "ht/classgroup.hpp"

#include <algorithm>
#include <unordered_set>

namespace ht {

bool QuadForm::is_reduced() const {
  if (a <= 0 || c <= 0) return false;
  i64 ab = b < 0 ? -b : b;
  if (ab > a || a > c) return false;
  if ((ab == a || a == c) && b < 0) return false;
  return true;
}

namespace {

// b into (-a, a]
void normalize(i128& a, i128& b, i128& c) {
  i128 two_a = 2 * a;
  i128 r = mod_floor128(b, two_a);
  if (r > a) r -= two_a;
  i128 q = (b - r) / two_a;
  // (a, b, c) -> (a, b - 2aq, c - bq + aq^2)
  c = c - b * q + a * q * q;
  b = r;
}

} // namespace

QuadForm reduce_form(QuadForm f) {
  if (f.disc() >= 0) throw DomainError("reduce_form: discriminant must be negative");
  if (f.a <= 0) throw DomainError("reduce_form: a must be positive");
  i128 a = f.a, b = f.b, c = f.c;
  normalize(a, b, c);
  while (a > c) {
    std::swap(a, c);
    b = -b;
    normalize(a, b, c);
  }
  if (a == c && b < 0) b = -b;
  return {narrow(a), narrow(b), narrow(c)};
}

QuadForm identity_form(i64 d) { return {1, 0, d}; }

QuadForm inverse_form(const QuadForm& f) {
  QuadForm g{f.a, -f.b, f.c};
  if (g.is_reduced()) return g;
  return reduce_form(g);
}

QuadForm compose_unchecked(const QuadForm& f, const QuadForm& g) {
  QuadForm f1 = f, f2 = g;
  if (f1.a > f2.a) std::swap(f1, f2);
  const i64 a1 = f1.a, b1 = f1.b, a2 = f2.a, b2 = f2.b, c2 = f2.c;
  const i64 s = (b1 + b2) / 2;
  const i64 n = b2 - s;
  i64 y1, dd;
  if (a2 % a1 == 0) {
    y1 = 0;
    dd = a1;
  } else {
    ExtGcd e = ext_gcd(a2, a1);
    dd = e.g;
    y1 = e.x;
  }
  i64 x2, y2, d1;
  if (s % dd == 0) {
    y2 = -1;
    x2 = 0;
    d1 = dd;
  } else {
    ExtGcd e = ext_gcd(s, dd);
    d1 = e.g;
    x2 = e.x;
    y2 = -e.y;
  }
  const i64 v1 = a1 / d1, v2 = a2 / d1;
  const i128 r = mod_floor128(i128(y1) * y2 * n - i128(x2) * c2, v1);
  const i128 b3 = b2 + 2 * i128(v2) * r;
  const i128 a3 = i128(v1) * v2;
  const i128 c3 = (i128(c2) * d1 + r * (b2 + i128(v2) * r)) / v1;
  return reduce_form({narrow(a3), narrow(b3), narrow(c3)});
}

QuadForm compose_classes(const QuadForm& f, const QuadForm& g, i64 d) {
  const i128 D = -4 * i128(d);
  if (f.disc() != D || g.disc() != D)
    throw DomainError("compose_classes: discriminant mismatch");
  if (f.a <= 0 || g.a <= 0) throw DomainError("compose_classes: forms must be positive definite");
  return compose_unchecked(f, g);
}

QuadForm power_form(const QuadForm& f, i64 e, i64 d) {
  QuadForm base = f, r = identity_form(d);
  if (e < 0) {
    base = inverse_form(f);
    e = -e;
  }
  while (e) {
    if (e & 1) r = compose_unchecked(r, base);
    e >>= 1;
    if (e) base = compose_unchecked(base, base);
  }
  return r;
}

std::vector<QuadForm> reduced_forms(i64 d, const SmallestFactorTable* spf) {
  if (d <= 0) throw DomainError("reduced_forms: d must be positive");
  std::vector<QuadForm> out;
  // b = 2B with 3B^2 <= d; a runs over divisors of B^2 + d with 2B <= a <= c
  for (i64 B = 0; 3 * B * B <= d; ++B) {
    const i64 n = B * B + d;
    Factorization f = spf ? spf->factor(n) : factor_trial(n);
    for (i64 a : divisors(f)) {
      if (a < 2 * B) continue;
      if (a > n / a) break;
      const i64 c = n / a;
      out.push_back({a, 2 * B, c});
      if (B > 0 && 2 * B != a && a != c) out.push_back({a, -2 * B, c});
    }
  }
  std::sort(out.begin(), out.end(), [](const QuadForm& x, const QuadForm& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });
  return out;
}

namespace {

u64 pack(const QuadForm& f) { return (u64(f.a) << 32) ^ u64(std::uint32_t(f.b)); }

i64 order_in_group(const QuadForm& f, i64 h, const Factorization& fh, i64 d) {
  i64 e = h;
  for (auto [p, k] : fh) {
    for (int i = 0; i < k; ++i) {
      if (power_form(f, e / p, d).a != 1) break;
      e /= p;
    }
  }
  return e;
}

// partition of the p-group with counts[j] = #{x : x^(p^j) = 1}
std::vector<int> partition_from_counts(const std::vector<i64>& counts, i64 p) {
  std::vector<int> logs;
  for (i64 c : counts) {
    int l = 0;
    while (c > 1) { c /= p; ++l; }
    logs.push_back(l);
  }
  // number of parts >= j is logs[j] - logs[j-1]
  std::vector<int> parts;
  for (std::size_t j = 1; j < logs.size(); ++j) {
    int ge_j = logs[j] - logs[j - 1];
    int ge_next = j + 1 < logs.size() ? logs[j + 1] - logs[j] : 0;
    for (int i = 0; i < ge_j - ge_next; ++i) parts.push_back(int(j));
  }
  std::sort(parts.rbegin(), parts.rend());
  return parts;
}

std::vector<i64> combine_partitions(const std::vector<std::pair<i64, std::vector<int>>>& parts) {
  std::size_t r = 0;
  for (auto& [p, v] : parts) r = std::max(r, v.size());
  std::vector<i64> inv(r, 1);
  for (auto& [p, v] : parts)
    for (std::size_t i = 0; i < v.size(); ++i)
      for (int j = 0; j < v[i]; ++j) inv[i] *= p;
  std::reverse(inv.begin(), inv.end());
  return inv;
}

} // namespace

i64 ClassGroup::index_of(const QuadForm& f) const {
  auto it = std::lower_bound(reduced_forms.begin(), reduced_forms.end(), f,
                             [](const QuadForm& x, const QuadForm& y) {
                               return x.a != y.a ? x.a < y.a : x.b < y.b;
                             });
  if (it == reduced_forms.end() || !(*it == f)) return -1;
  return i64(it - reduced_forms.begin());
}

i64 ClassGroup::order_of(const QuadForm& f) const {
  i64 i = index_of(f);
  if (i < 0) throw DomainError("order_of: form is not a reduced form of this class group");
  return orders[std::size_t(i)];
}

ClassGroup class_group_of(i64 d) {
  check_discriminant(d);
  ClassGroup G;
  G.d = d;
  G.reduced_forms = reduced_forms(d);
  G.h = i64(G.reduced_forms.size());
  const Factorization fh = factor_trial(G.h);
  G.orders.reserve(G.reduced_forms.size());
  for (const QuadForm& f : G.reduced_forms) G.orders.push_back(order_in_group(f, G.h, fh, d));
  std::vector<std::pair<i64, std::vector<int>>> parts;
  for (auto [p, e] : fh) {
    std::vector<i64> counts(std::size_t(e) + 1, 0);
    for (i64 o : G.orders) {
      // o must be a power of p
      i64 x = o;
      int v = 0;
      while (x % p == 0) { x /= p; ++v; }
      if (x != 1) continue;
      for (int j = v; j <= e; ++j) ++counts[std::size_t(j)];
    }
    parts.push_back({p, partition_from_counts(counts, p)});
  }
  G.structure = combine_partitions(parts);
  return G;
}

std::vector<QuadForm> torsion_classes(const ClassGroup& G, int k, bool exact) {
  if (k < 1 || k % 2 == 0) throw DomainError("torsion_classes: k must be odd and positive");
  std::vector<QuadForm> out;
  for (std::size_t i = 0; i < G.reduced_forms.size(); ++i) {
    const i64 o = G.orders[i];
    if (exact ? o == k : (o != 1 && k % o == 0)) out.push_back(G.reduced_forms[i]);
  }
  return out;
}

i64 subgroup_closure_size(const std::vector<QuadForm>& gens, i64 d) {
  std::unordered_set<u64> seen;
  std::vector<QuadForm> elems{identity_form(d)};
  seen.insert(pack(elems[0]));
  for (std::size_t i = 0; i < elems.size(); ++i)
    for (const QuadForm& g : gens) {
      QuadForm x = compose_unchecked(elems[i], g);
      if (seen.insert(pack(x)).second) elems.push_back(x);
    }
  return i64(elems.size());
}

std::vector<i64> invariant_factors(const std::vector<QuadForm>& forms, i64 h, i64 d) {
  std::vector<std::pair<i64, std::vector<int>>> parts;
  for (auto [p, e] : factor_trial(h)) {
    if (e == 1) {
      parts.push_back({p, {1}});
      continue;
    }
    i64 pe = 1;
    for (int i = 0; i < e; ++i) pe *= p;
    const i64 m = h / pe;
    std::vector<QuadForm> S{identity_form(d)};
    std::unordered_set<u64> in_S{pack(S[0])};
    for (const QuadForm& f : forms) {
      if (i64(S.size()) == pe) break;
      const QuadForm g = power_form(f, m, d);
      if (in_S.count(pack(g))) continue;
      const std::vector<QuadForm> base = S;
      QuadForm gi = g;
      while (!in_S.count(pack(gi))) {
        for (const QuadForm& x : base) {
          QuadForm y = compose_unchecked(gi, x);
          if (in_S.insert(pack(y)).second) S.push_back(y);
        }
        gi = compose_unchecked(gi, g);
      }
    }
    if (i64(S.size()) != pe) throw IntegrityError("Sylow closure did not reach p^e");
    std::vector<i64> counts(std::size_t(e) + 1, 0);
    for (const QuadForm& x : S) {
      int v = 0;
      QuadForm y = x;
      while (y.a != 1) {
        y = power_form(y, p, d);
        ++v;
      }
      for (int j = v; j <= e; ++j) ++counts[std::size_t(j)];
    }
    parts.push_back({p, partition_from_counts(counts, p)});
  }
  return combine_partitions(parts);
}

TorsionProfile torsion_profile(i64 d, const std::vector<int>& ks, bool with_invariants,
                               const SmallestFactorTable* spf) {
  TorsionProfile P;
  P.d = d;
  const std::vector<QuadForm> forms = reduced_forms(d, spf);
  P.h = i64(forms.size());
  for (int k : ks) {
    if (k < 3 || k % 2 == 0) throw DomainError("torsion_profile: k must be odd and >= 3");
    P.exact[k];
  }
  if (!ks.empty()) {
    std::vector<std::pair<int, Factorization>> kf;
    for (int k : ks)
      if (P.h % k == 0) kf.push_back({k, factor_trial(k)});
    if (!kf.empty())
      for (const QuadForm& f : forms) {
        // ambiguous forms have order <= 2
        if (f.b <= 0 || f.b == f.a || f.a == f.c) continue;
        const QuadForm finv{f.a, -f.b, f.c};
        for (auto& [k, fk] : kf) {
          bool hit;
          if (k == 3) {
            hit = compose_unchecked(f, f) == finv;
          } else {
            hit = power_form(f, k, d).a == 1;
            for (std::size_t i = 0; hit && i < fk.size(); ++i)
              if (power_form(f, k / fk[i].first, d).a == 1) hit = false;
          }
          if (hit) {
            auto& v = P.exact[k];
            v.push_back(finv);
            v.push_back(f);
          }
        }
      }
  }
  for (auto& [k, v] : P.exact)
    std::sort(v.begin(), v.end(), [](const QuadForm& x, const QuadForm& y) {
      return x.a != y.a ? x.a < y.a : x.b < y.b;
    });
  if (with_invariants) {
    P.invariants = invariant_factors(forms, P.h, d);
    P.has_invariants = true;
  }
  return P;
}

} // namespace ht
