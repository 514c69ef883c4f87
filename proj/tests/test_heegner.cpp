#include <doctest.h>

#include <cmath>
#include <set>

#include "ht/heegner.hpp"

using namespace ht;

namespace {

std::vector<PrimitiveIdeal> brute_ideals(i64 d, i64 Nmax) {
  std::vector<PrimitiveIdeal> out;
  for (i64 N = 1; N <= Nmax; ++N)
    for (i64 b = -(N - 1) / 2; b <= N / 2; ++b)
      if ((b * b + d) % N == 0) out.push_back({d, N, b});
  return out;
}

} // namespace

TEST_CASE("ideal enumeration matches brute force") {
  for (i64 d : {2, 6, 14, 30, 74, 210, 1110}) {
    const auto a = enumerate_primitive_ideals(d, i64(200));
    CHECK(a == brute_ideals(d, 200));
    for (const auto& x : a) CHECK(make_ideal(d, x.N, x.b) == x);
  }
  CHECK_THROWS_AS(make_ideal(6, 4, 0), DomainError);
}

TEST_CASE("b normalization and conjugation") {
  CHECK(normalize_b(5, 4) == 1);
  CHECK(normalize_b(2, 4) == 2);
  CHECK(normalize_b(-2, 4) == 2);
  CHECK(normalize_b(3, 6) == 3);
  const PrimitiveIdeal a = make_ideal(14, 5, 1);
  CHECK(conjugate(a) == make_ideal(14, 5, -1));
  CHECK(conjugate(conjugate(a)) == a);
}

TEST_CASE("Heegner point of an ideal") {
  const PrimitiveIdeal a = make_ideal(14, 3, 1);
  const HeegnerPoint z = heegner_point(a);
  CHECK(z.re == doctest::Approx(1.0 / 3));
  CHECK(z.im == doctest::Approx(std::sqrt(14.0) / 3));
  const QuadForm f = ideal_form(a);
  CHECK(f.a == 3);
  CHECK(f.b == -2);
  CHECK(f.c == 5);
  CHECK(f.disc() == -56);
}

TEST_CASE("ideal classes and reduced forms correspond") {
  for (i64 d : {26, 74, 1886}) {
    const ClassGroup G = class_group_of(d);
    std::set<QuadForm> seen;
    for (const auto& x : enumerate_primitive_ideals(d, i64(300))) seen.insert(ideal_class_form(x));
    CHECK(i64(seen.size()) == G.h);
    for (const auto& f : G.reduced_forms) {
      const PrimitiveIdeal a = form_to_ideal(f, d);
      CHECK(ideal_class_form(a) == f);
      // the Heegner point of a reduced ideal lies in the fundamental domain
      const HeegnerPoint z = heegner_point(a);
      CHECK(std::abs(z.re) <= 0.5 + 1e-12);
      CHECK(z.re * z.re + z.im * z.im >= 1 - 1e-12);
    }
  }
}

TEST_CASE("ideal multiplication is compatible with form composition") {
  const i64 d = 1886;
  const auto ideals = enumerate_primitive_ideals(d, i64(60));
  for (const auto& x : ideals)
    for (const auto& y : ideals) {
      const IdealProduct p = ideal_multiply(x, y);
      CHECK(p.content * p.content * p.ideal.N == x.N * y.N);
      CHECK(ideal_class_form(p.ideal) ==
            compose_classes(ideal_class_form(x), ideal_class_form(y), d));
    }
}

TEST_CASE("coset images and the cut") {
  const Rational Y(3);
  for (i64 d : {14, 86, 1886}) {
    const ClassGroup G = class_group_of(d);
    for (const auto& f : G.reduced_forms) {
      const PrimitiveIdeal a = form_to_ideal(f, d);
      const auto imgs = coset_images(a, Y);
      CHECK(i64(imgs.size()) == coset_image_count(a, Y));
      // images are the ideals of the class with N <= Y sqrt(d)
      std::set<PrimitiveIdeal> want;
      for (const auto& x : enumerate_primitive_ideals(d, norm_cut(d, Y)))
        if (ideal_class_form(x) == f) want.insert(x);
      std::set<PrimitiveIdeal> got;
      for (const auto& [g, x] : imgs) {
        CHECK(coset_in_cut(a, g, Y));
        CHECK(coset_image(a, g) == x);
        got.insert(x);
      }
      CHECK(got == want);
    }
  }
}

TEST_CASE("reduction to the fundamental domain") {
  for (const auto& x : enumerate_primitive_ideals(i64(2006), i64(100))) {
    auto [z, f] = reduce_point_to_F(x);
    CHECK(f.is_reduced());
    CHECK(f == ideal_class_form(x));
    CHECK(z.im >= std::sqrt(3.0) / 2 - 1e-12);
  }
}

TEST_CASE("principal primitive ideal count") {
  // principal primitive ideals other than (1): (n + sqrt(-d)) of norm n^2 + d, primitive
  const Rational Y(4);
  i64 total = 0;
  for (i64 d = 2; d <= 2000; ++d) {
    if (!is_valid_discriminant(d)) continue;
    const i64 cut = norm_cut(d, Y);
    i64 c = 0;
    for (const auto& x : enumerate_primitive_ideals(d, cut))
      if (x.N > 1 && ideal_class_form(x) == identity_form(d)) ++c;
    CHECK(principal_primitive_count_for(d, cut) == c);
    total += c;
  }
  CHECK(principal_primitive_count(2000, Y) == total);
}
