#pragma once

#include <utility>
#include <vector>

#include "ht/arith.hpp"
#include "ht/classgroup.hpp"

namespace ht {

/// The ideal [N, b + sqrt(-d)] with N | b^2 + d and -N/2 < b <= N/2.
struct PrimitiveIdeal {
  i64 d = 0;
  i64 N = 1;
  i64 b = 0;

  bool operator==(const PrimitiveIdeal&) const = default;
  auto operator<=>(const PrimitiveIdeal&) const = default;
};

struct HeegnerPoint {
  i64 b = 0, N = 1, d = 0;
  double re = 0, im = 0;
};

struct CosetElement {
  i64 c = 0, e = 1;
  bool operator==(const CosetElement&) const = default;
  auto operator<=>(const CosetElement&) const = default;
};

// representative of b mod N in (-N/2, N/2]
i64 normalize_b(i64 b, i64 N);
// validates and normalizes; throws DomainError when N does not divide b^2 + d
PrimitiveIdeal make_ideal(i64 d, i64 N, i64 b);
PrimitiveIdeal conjugate(const PrimitiveIdeal& a);

// roots b mod N of b^2 = -d, ascending in [0, N)
std::vector<i64> roots_of_minus_d(i64 d, i64 N);

// all primitive ideals of norm <= Nmax, ordered by (N, b)
std::vector<PrimitiveIdeal> enumerate_primitive_ideals(i64 d, i64 Nmax);
std::vector<PrimitiveIdeal> enumerate_primitive_ideals(i64 d, double B);

HeegnerPoint heegner_point(const PrimitiveIdeal& a);

// (N, -2b, (b^2 + d)/N), unreduced
QuadForm ideal_form(const PrimitiveIdeal& a);
QuadForm ideal_class_form(const PrimitiveIdeal& a);
// ideal whose Heegner point is the root of the reduced form f
PrimitiveIdeal form_to_ideal(const QuadForm& f, i64 d);

// Im(gamma z_a) >= 1/Y, decided exactly
bool coset_in_cut(const PrimitiveIdeal& a, const CosetElement& g, const Rational& Y);
PrimitiveIdeal coset_image(const PrimitiveIdeal& a, const CosetElement& g);
std::vector<std::pair<CosetElement, PrimitiveIdeal>> coset_images(const PrimitiveIdeal& a,
                                                                  const Rational& Y);
// same count without building the image ideals
i64 coset_image_count(const PrimitiveIdeal& a, const Rational& Y);

std::pair<HeegnerPoint, QuadForm> reduce_point_to_F(const PrimitiveIdeal& a);

// primitive principal ideals != (1) with N <= Y sqrt(d), summed over valid d <= D
i64 principal_primitive_count(i64 D, const Rational& Y);
i64 principal_primitive_count_for(i64 d, i64 Nmax);

// a1 * a2 = content * [N, b + sqrt(-d)]
struct IdealProduct {
  i64 content = 1;
  PrimitiveIdeal ideal;
};
IdealProduct ideal_multiply(const PrimitiveIdeal& x, const PrimitiveIdeal& y);

} // namespace ht
