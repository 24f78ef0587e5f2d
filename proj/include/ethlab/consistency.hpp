#pragma once

#include "ethlab/half_int.hpp"
#include "ethlab/model.hpp"
#include "ethlab/spectral.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace ethlab {

struct IdentityReport {
  std::string identity;
  std::string instance;
  double max_abs_deviation = 0.0;
  double max_rel_deviation = 0.0;  // max_abs_deviation / max |reference|
  std::size_t comparisons = 0;
  std::optional<double> slope;     // cg_asymptotic_scan only
  std::vector<std::string> notes;  // evaluation-point switches, skipped points

  nlohmann::json to_json() const;
};

/// Reduces T = [A x B]^(k)_q directly and compares every (s, s') table with
///   sum_{s''} U(s, s', s'') <s||A||s''> <s''||B||s'>
/// summed over every intermediate spin of the chain (absent factors count as zero).
/// Throws std::invalid_argument if k violates the triangle rule with the ranks.
IdentityReport check_composition_identity(const SphericalTensor& a, const SphericalTensor& b, HalfInt k, HalfInt q,
                                          const Eigensystem& system);

/// Max pairwise deviation of upsilon over the given (m, q) points; inadmissible
/// points are dropped and noted. An empty sample means every admissible point.
/// Throws std::invalid_argument if fewer than two points remain.
IdentityReport check_upsilon_independence(HalfInt s_a, HalfInt s_ap, HalfInt s_app, HalfInt k, HalfInt k1,
                                          HalfInt k2, std::vector<std::pair<HalfInt, HalfInt>> points = {});

struct ScanPoint {
  double s;
  double exact;
  double asymptotic;
  double relative_error;
};

struct CgScan {
  IdentityReport report;
  std::vector<ScanPoint> points;
};

/// Relative error of cg_asymptotic against cg_exact at m = s - s_minus_m over
/// the grid; slope of log(error) vs log(s). Points with cg_exact = 0 or zero
/// error are excluded from the fit and noted.
CgScan cg_asymptotic_scan(HalfInt k, HalfInt q, HalfInt nu, HalfInt s_minus_m, const std::vector<HalfInt>& s_grid);

/// Geometric grid s = 20, 40, ..., 640.
std::vector<HalfInt> default_scan_grid();

/// Reduced tables of every component at every admissible m, compared to the
/// first. For rank 0, also confirms that tables with s != s' are absent.
IdentityReport check_wigner_eckart(const SphericalTensor& family, const Eigensystem& system);

/// Union of block eigenvalues vs the dense spectrum of the materialized
/// Hamiltonian. N <= 12.
IdentityReport check_exact_spectrum(const Eigensystem& system);

}  // namespace ethlab
