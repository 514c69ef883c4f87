#pragma once

#include <compare>
#include <map>
#include <vector>

#include "ht/arith.hpp"

namespace ht {

struct QuadForm {
  i64 a = 1, b = 0, c = 1;

  auto operator<=>(const QuadForm&) const = default;
  bool operator==(const QuadForm&) const = default;
  // b^2 - 4ac
  i128 disc() const { return i128(b) * b - 4 * i128(a) * c; }
  bool is_reduced() const;
};

QuadForm reduce_form(QuadForm f);
QuadForm identity_form(i64 d);
QuadForm inverse_form(const QuadForm& f);
// composition followed by reduction; throws DomainError on discriminant mismatch
QuadForm compose_classes(const QuadForm& f, const QuadForm& g, i64 d);
// same, without the discriminant checks
QuadForm compose_unchecked(const QuadForm& f, const QuadForm& g);
QuadForm power_form(const QuadForm& f, i64 e, i64 d);

// reduced forms of discriminant -4d in (a, b) order
std::vector<QuadForm> reduced_forms(i64 d, const SmallestFactorTable* spf = nullptr);

struct ClassGroup {
  i64 d = 0;
  std::vector<QuadForm> reduced_forms;
  i64 h = 0;
  std::vector<i64> orders;     // aligned with reduced_forms
  std::vector<i64> structure;  // invariant factors n1 | n2 | ..., empty when h = 1

  // index into reduced_forms; -1 when f is not a reduced form of this group
  i64 index_of(const QuadForm& f) const;
  i64 order_of(const QuadForm& f) const;
};

ClassGroup class_group_of(i64 d);

// exact: order exactly k; otherwise order dividing k, identity excluded
std::vector<QuadForm> torsion_classes(const ClassGroup& G, int k, bool exact);

// size of the subgroup generated by gens
i64 subgroup_closure_size(const std::vector<QuadForm>& gens, i64 d);

// invariant factors from a group given only by its forms and order
std::vector<i64> invariant_factors(const std::vector<QuadForm>& forms, i64 h, i64 d);

// Census-facing summary: h, optional structure, and order-exactly-k forms.
struct TorsionProfile {
  i64 d = 0;
  i64 h = 0;
  bool has_invariants = false;
  std::vector<i64> invariants;
  std::map<int, std::vector<QuadForm>> exact;

  i64 count(int k) const {
    auto it = exact.find(k);
    return it == exact.end() ? 0 : i64(it->second.size());
  }
};

TorsionProfile torsion_profile(i64 d, const std::vector<int>& ks, bool with_invariants,
                               const SmallestFactorTable* spf = nullptr);

} // namespace ht
