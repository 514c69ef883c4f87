#include <doctest.h>

#include <set>

#include "ht/classgroup.hpp"

using namespace ht;

namespace {

// reduced forms of discriminant -4d by direct search
std::vector<QuadForm> brute_reduced(i64 d) {
  std::vector<QuadForm> out;
  for (i64 a = 1; 3 * a * a <= 4 * d; ++a)
    for (i64 b = -a + 1; b <= a; ++b) {
      const i64 num = b * b + 4 * d;
      if (num % (4 * a)) continue;
      const i64 c = num / (4 * a);
      if (c < a || (c == a && b < 0)) continue;
      if (gcd(gcd(a, b), c) != 1) continue;
      out.push_back({a, b, c});
    }
  std::sort(out.begin(), out.end());
  return out;
}

// Hurwitz style class number from reduced forms
i64 brute_h(i64 d) { return i64(brute_reduced(d).size()); }

} // namespace

TEST_CASE("known class numbers") {
  // h(-4d) for d = 2 mod 4 squarefree
  const std::vector<std::pair<i64, i64>> known = {{2, 1},  {6, 2},  {10, 2}, {14, 4},
                                                  {22, 2}, {26, 6}, {30, 4}, {58, 2},
                                                  {74, 10}, {86, 10}, {110, 12}};
  for (auto [d, h] : known) CHECK(class_group_of(d).h == h);
}

TEST_CASE("reduced forms match brute force") {
  for (i64 d = 2; d <= 3000; d += 4) {
    if (!is_valid_discriminant(d)) continue;
    auto rf = reduced_forms(d);
    std::sort(rf.begin(), rf.end());
    CHECK(rf == brute_reduced(d));
    for (const auto& f : rf) {
      CHECK(f.is_reduced());
      CHECK(f.disc() == -4 * i128(d));
    }
  }
}

TEST_CASE("group laws hold") {
  for (i64 d : {26, 74, 434, 1886, 9998}) {
    if (!is_valid_discriminant(d)) continue;
    const ClassGroup G = class_group_of(d);
    const QuadForm e = identity_form(d);
    for (const auto& f : G.reduced_forms) {
      CHECK(compose_classes(f, e, d) == f);
      CHECK(compose_classes(f, inverse_form(f), d) == e);
      CHECK(power_form(f, G.h, d) == e);
      for (const auto& g : G.reduced_forms) {
        CHECK(compose_classes(f, g, d) == compose_classes(g, f, d));
        CHECK(G.index_of(compose_classes(f, g, d)) >= 0);
      }
    }
    i64 prod = 1;
    for (i64 n : G.structure) prod *= n;
    CHECK(prod == G.h);
    for (std::size_t i = 1; i < G.structure.size(); ++i) CHECK(G.structure[i] % G.structure[i - 1] == 0);
  }
}

TEST_CASE("element orders and torsion subsets") {
  for (i64 d = 2; d <= 4000; d += 4) {
    if (!is_valid_discriminant(d)) continue;
    const ClassGroup G = class_group_of(d);
    CHECK(G.h == brute_h(d));
    for (std::size_t i = 0; i < G.reduced_forms.size(); ++i) {
      // order by repeated composition
      QuadForm x = G.reduced_forms[i];
      i64 n = 1;
      while (!(x == identity_form(d))) {
        x = compose_classes(x, G.reduced_forms[i], d);
        ++n;
      }
      CHECK(G.orders[i] == n);
    }
    for (int k : {3, 5, 7, 9}) {
      i64 exact = 0, dividing = 0;
      for (i64 o : G.orders) {
        exact += o == k;
        dividing += (o != 1 && k % o == 0);
      }
      CHECK(i64(torsion_classes(G, k, true).size()) == exact);
      CHECK(i64(torsion_classes(G, k, false).size()) == dividing);
    }
  }
}

TEST_CASE("3-rank structure is a group") {
  // the 3-torsion including identity has size a power of 3
  for (i64 d = 2; d <= 20000; d += 4) {
    if (!is_valid_discriminant(d)) continue;
    const ClassGroup G = class_group_of(d);
    const i64 n = i64(torsion_classes(G, 3, false).size()) + 1;
    i64 m = n;
    while (m % 3 == 0) m /= 3;
    CHECK(m == 1);
  }
}

TEST_CASE("torsion profile agrees with the full group") {
  const SmallestFactorTable spf(50000);
  for (i64 d = 30002; d <= 32000; d += 4) {
    if (!is_valid_discriminant(d)) continue;
    const ClassGroup G = class_group_of(d);
    const TorsionProfile P = torsion_profile(d, {3, 5, 7, 9}, true, &spf);
    CHECK(P.h == G.h);
    CHECK(P.invariants == G.structure);
    for (int k : {3, 5, 7, 9}) {
      auto a = torsion_classes(G, k, true);
      auto b = P.exact.at(k);
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      CHECK(a == b);
    }
  }
}

TEST_CASE("invalid discriminants are rejected") {
  CHECK_THROWS_AS(class_group_of(18), DomainError);
  CHECK_THROWS_AS(class_group_of(3), DomainError);
  CHECK_THROWS_AS(compose_classes(identity_form(6), identity_form(10), 6), DomainError);
}
