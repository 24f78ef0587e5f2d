#include "ethlab/consistency.hpp"

#include "ethlab/spin_algebra.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ethlab {

using nlohmann::json;

json IdentityReport::to_json() const {
  json j{{"identity", identity},
         {"instance", instance},
         {"max_abs_deviation", max_abs_deviation},
         {"max_rel_deviation", max_rel_deviation},
         {"comparisons", comparisons},
         {"notes", notes}};
  if (slope) j["slope"] = *slope;
  return j;
}

namespace {

void record(IdentityReport& report, const Eigen::MatrixXd& value, const Eigen::MatrixXd& reference,
            double& reference_scale) {
  if (value.size() == 0) return;
  report.max_abs_deviation = std::max(report.max_abs_deviation, (value - reference).cwiseAbs().maxCoeff());
  reference_scale = std::max(reference_scale, reference.cwiseAbs().maxCoeff());
  report.comparisons += static_cast<std::size_t>(value.size());
}

void finish(IdentityReport& report, double reference_scale) {
  report.max_rel_deviation = reference_scale > 0.0 ? report.max_abs_deviation / reference_scale : report.max_abs_deviation;
}

// Reduced elements of a family through its first component with an admissible m.
std::optional<Eigen::MatrixXd> reduce_family(const SphericalTensor& family, const Eigensystem& system,
                                             HalfInt s_row, HalfInt s_col) {
  if (!triangle(s_col, family.rank, s_row)) return std::nullopt;
  const int start = family.rank.is_integer() ? 0 : 1;
  for (int t = start; t <= family.rank.twice(); t += 2) {
    for (int sign : {1, -1}) {
      if (t == 0 && sign < 0) continue;
      const HalfInt q = HalfInt::from_twice(sign * t);
      if (!admissible_m_cols(s_row, s_col, family.rank, q).empty()) {
        return reduced_elements(family.component(q), system, s_row, s_col).elements;
      }
    }
  }
  throw std::logic_error("reduce_family: no admissible component although the triangle rule holds");
}

}  // namespace

IdentityReport check_composition_identity(const SphericalTensor& a, const SphericalTensor& b, HalfInt k, HalfInt q,
                                          const Eigensystem& system) {
  const TensorOpSpec composed = compose_tensor(a, b, k, q);
  IdentityReport report;
  report.identity = "composition";
  std::ostringstream inst;
  inst << "N=" << system.num_qubits() << " A=" << a.name << " B=" << b.name << " k=" << k.str() << " q=" << q.str();
  report.instance = inst.str();

  const auto spins = system.spins();
  double scale = 0.0;
  for (HalfInt s : spins) {
    for (HalfInt sp : spins) {
      if (!triangle(sp, k, s)) continue;
      const auto lhs = reduced_elements(composed, system, s, sp);
      Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(lhs.elements.rows(), lhs.elements.cols());
      const auto point = upsilon_evaluation_point(s, sp, k);
      if (!point) throw std::logic_error("check_composition_identity: no evaluation point for upsilon");
      if (point->first != s || point->second != s - sp) {
        report.notes.push_back("upsilon(" + s.str() + ", " + sp.str() + ") evaluated at m=" + point->first.str() +
                               ", q=" + point->second.str());
      }
      for (HalfInt spp : spins) {
        const auto ra = reduce_family(a, system, s, spp);
        const auto rb = reduce_family(b, system, spp, sp);
        if (!ra || !rb) continue;
        const double u = upsilon(s, sp, spp, k, a.rank, b.rank, point->first, point->second);
        rhs += u * (*ra) * (*rb);
      }
      record(report, rhs, lhs.elements, scale);
    }
  }
  finish(report, scale);
  return report;
}

IdentityReport check_upsilon_independence(HalfInt s_a, HalfInt s_ap, HalfInt s_app, HalfInt k, HalfInt k1,
                                          HalfInt k2, std::vector<std::pair<HalfInt, HalfInt>> points) {
  IdentityReport report;
  report.identity = "upsilon_independence";
  report.instance = "s=(" + s_a.str() + "," + s_ap.str() + "," + s_app.str() + ") k=" + k.str() + " k1=" + k1.str() +
                    " k2=" + k2.str();
  if (points.empty()) {
    for (HalfInt m = -s_a; m <= s_a; m += 1) {
      for (HalfInt q = -k; q <= k; q += 1) points.emplace_back(m, q);
    }
  }
  std::vector<double> values;
  for (const auto& [m, q] : points) {
    try {
      values.push_back(upsilon(s_a, s_ap, s_app, k, k1, k2, m, q));
    } catch (const std::domain_error&) {
      report.notes.push_back("skipped inadmissible (m=" + m.str() + ", q=" + q.str() + ")");
    }
  }
  if (values.size() < 2) {
    throw std::invalid_argument("check_upsilon_independence: fewer than two admissible (m, q) points for " +
                                report.instance);
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  report.max_abs_deviation = *hi - *lo;
  const double scale = std::max(std::abs(*lo), std::abs(*hi));
  report.max_rel_deviation = scale > 0.0 ? report.max_abs_deviation / scale : report.max_abs_deviation;
  report.comparisons = values.size();
  return report;
}

std::vector<HalfInt> default_scan_grid() {
  std::vector<HalfInt> grid;
  for (int s = 20; s <= 640; s *= 2) grid.emplace_back(s);
  return grid;
}

CgScan cg_asymptotic_scan(HalfInt k, HalfInt q, HalfInt nu, HalfInt s_minus_m, const std::vector<HalfInt>& s_grid) {
  CgScan scan;
  auto& report = scan.report;
  report.identity = "cg_asymptotic";
  report.instance = "k=" + k.str() + " q=" + q.str() + " nu=" + nu.str() + " s-m=" + s_minus_m.str();
  std::vector<double> xs, ys;
  for (HalfInt s : s_grid) {
    const HalfInt m = s - s_minus_m;
    const HalfInt J = s + nu, M = m + q;
    if (!valid_projection(s, m) || !valid_projection(k, q)) {
      report.notes.push_back("s=" + s.str() + ": invalid projection, skipped");
      continue;
    }
    const double exact = valid_projection(J, M) ? cg_exact(s, m, k, q, J, M) : 0.0;
    const double approx = cg_asymptotic(s, m, k, q, nu);
    if (exact == 0.0) {
      report.notes.push_back("s=" + s.str() + ": exact coefficient is 0, skipped");
      continue;
    }
    const double rel = std::abs(exact - approx) / std::abs(exact);
    scan.points.push_back({s.value(), exact, approx, rel});
    report.max_abs_deviation = std::max(report.max_abs_deviation, std::abs(exact - approx));
    report.max_rel_deviation = std::max(report.max_rel_deviation, rel);
    ++report.comparisons;
    if (rel == 0.0) {
      report.notes.push_back("s=" + s.str() + ": asymptotic form exact, excluded from fit");
      continue;
    }
    xs.push_back(std::log(s.value()));
    ys.push_back(std::log(rel));
  }
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i] / n;
      my += ys[i] / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    report.slope = sxy / sxx;
  }
  return scan;
}

IdentityReport check_wigner_eckart(const SphericalTensor& family, const Eigensystem& system) {
  IdentityReport report;
  report.identity = "wigner_eckart";
  report.instance = "N=" + std::to_string(system.num_qubits()) + " family=" + family.name + " k=" + family.rank.str();
  const auto spins = system.spins();
  double scale = 0.0;
  for (HalfInt s : spins) {
    for (HalfInt sp : spins) {
      if (!triangle(sp, family.rank, s)) {
        for (HalfInt q = -family.rank; q <= family.rank; q += 1) {
          if (reduced_elements(family.component(q), system, s, sp).present) {
            throw std::logic_error("check_wigner_eckart: table present despite the triangle rule");
          }
        }
        continue;
      }
      std::optional<Eigen::MatrixXd> reference;
      for (HalfInt q = -family.rank; q <= family.rank; q += 1) {
        const auto op = family.component(q);
        for (HalfInt m_col : admissible_m_cols(s, sp, family.rank, q)) {
          const auto table = reduced_elements_at(op, system, s, sp, m_col);
          if (!reference) reference = table.elements;
          else record(report, table.elements, *reference, scale);
        }
      }
    }
  }
  finish(report, scale);
  return report;
}

IdentityReport check_exact_spectrum(const Eigensystem& system) {
  const int n = system.num_qubits();
  if (n > 12) throw std::invalid_argument("check_exact_spectrum: dense oracle limited to N <= 12");
  IdentityReport report;
  report.identity = "exact_spectrum";
  report.instance = "N=" + std::to_string(n);
  const Eigen::MatrixXd dense = system.hamiltonian().to_dense<double>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd blocks = full_spectrum(system);
  if (blocks.size() != solver.eigenvalues().size()) {
    report.max_abs_deviation = std::numeric_limits<double>::infinity();
    report.notes.push_back("level count " + std::to_string(blocks.size()) + " vs " +
                           std::to_string(solver.eigenvalues().size()));
    return report;
  }
  double scale = 0.0;
  record(report, blocks, solver.eigenvalues(), scale);
  finish(report, scale);
  return report;
}

}  // namespace ethlab
