#pragma once

#include "ethlab/half_int.hpp"

#include <optional>
#include <utility>

namespace ethlab {

/// Arguments of the Clebsch–Gordan coefficient <J, M | j1, m1; j2, m2>.
struct CgKey {
  HalfInt j1, m1, j2, m2, J, M;
  friend bool operator==(const CgKey&, const CgKey&) = default;
};

/// <J, M | j1, m1; j2, m2> in the Condon–Shortley phase convention.
///
/// The coefficient is a signed square root of a rational number; the rational
/// is accumulated with arbitrary-precision integers and rounded once at the
/// end, so the result is accurate to a few ulp for any spins whose factorials
/// fit in memory. Returns exactly 0 when the magnetic selection rule or the
/// triangle rule fails. Throws std::domain_error when a projection is invalid
/// for its spin (|m| > j or j - m non-integral).
///
/// Results are memoized in a process-wide read-mostly cache.
double cg_exact(const CgKey& key);

inline double cg_exact(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M) {
  return cg_exact(CgKey{j1, m1, j2, m2, J, M});
}

/// Leading large-s value of <s + nu, m + q | s, m; k, q>, dropping the
/// 1 + O(1/s) correction. Three regimes: nu > q, nu == q (value 1) and
/// nu < q (sign (-1)^(q - nu)). Returns 0 on a selection-rule violation;
/// throws std::domain_error if s - m < 0.
double cg_asymptotic(HalfInt s, HalfInt m, HalfInt k, HalfInt q, HalfInt nu);

/// Recoupling factor relating the reduced elements of a composed tensor
/// T^(k) = [A^(k1) x B^(k2)]^(k) to products of A and B reduced elements
/// through an intermediate spin s_app:
///
///   U = sum_q' <k,q|k1,q';k2,q-q'> <s_a,m|s_app,m-q';k1,q'>
///              <s_app,m-q'|s_ap,m-q;k2,q-q'> / <s_a,m|s_ap,m-q;k,q>
///
/// Throws std::domain_error if the denominator vanishes at (m, q).
double upsilon(HalfInt s_a, HalfInt s_ap, HalfInt s_app, HalfInt k, HalfInt k1, HalfInt k2,
               HalfInt m, HalfInt q);

/// Default evaluation point (m = s_a, q = s_a - s_ap) when admissible, else the
/// first admissible (m, q) in a fixed scan order. Empty if none exists.
std::optional<std::pair<HalfInt, HalfInt>> upsilon_evaluation_point(HalfInt s_a, HalfInt s_ap,
                                                                   HalfInt k);

/// upsilon evaluated at upsilon_evaluation_point.
double upsilon(HalfInt s_a, HalfInt s_ap, HalfInt s_app, HalfInt k, HalfInt k1, HalfInt k2);

/// Large-spin limit <k, s_a - s_ap | k1, s_a - s_app; k2, s_app - s_ap>.
double upsilon_asymptotic(HalfInt s_a, HalfInt s_ap, HalfInt s_app, HalfInt k, HalfInt k1,
                          HalfInt k2);

namespace testing {
/// Flips the sign of every cg_exact result with m2 < 0 while alive. Used by
/// mutation tests to confirm that validation notices a broken coefficient.
class ScopedCgSignFault {
public:
  ScopedCgSignFault();
  ~ScopedCgSignFault();
  ScopedCgSignFault(const ScopedCgSignFault&) = delete;
  ScopedCgSignFault& operator=(const ScopedCgSignFault&) = delete;
};
bool cg_sign_fault_active();
}  // namespace testing

}  // namespace ethlab
