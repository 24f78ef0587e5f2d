#include "ethlab/eth_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace ethlab {

namespace {

double sample_mean(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

std::vector<double> energy_densities(const BlockSpectrum& spectrum) {
  std::vector<double> out(static_cast<std::size_t>(spectrum.dim()));
  for (Eigen::Index i = 0; i < spectrum.dim(); ++i) {
    out[static_cast<std::size_t>(i)] = spectrum.eigenvalues(i) / spectrum.num_qubits;
  }
  return out;
}

std::vector<Eigen::Index> indices_in(const BlockSpectrum& spectrum, const EnergyWindow& window) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < spectrum.dim(); ++i) {
    if (window.contains(spectrum.eigenvalues(i) / spectrum.num_qubits)) out.push_back(i);
  }
  return out;
}

void require_present(const ReducedElementTable& table, const char* who) {
  if (!table.present) {
    throw std::invalid_argument(std::string(who) + ": table (" + table.s_row.str() + ", " + table.s_col.str() +
                                ") is absent by the triangle rule for rank " + table.rank.str());
  }
}

}  // namespace

// --- histograms and fits -------------------------------------------------------

Histogram make_histogram(std::span<const double> values, double lo, double hi, std::size_t bins) {
  if (bins == 0 || !(hi > lo)) throw std::invalid_argument("make_histogram: need bins > 0 and hi > lo");
  Histogram h;
  h.edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  std::size_t inside = 0;
  for (double x : values) {
    if (x < lo || x > hi) continue;
    auto b = static_cast<std::size_t>((x - lo) / width);
    h.counts[std::min(b, bins - 1)]++;
    ++inside;
  }
  h.densities.assign(bins, 0.0);
  if (inside > 0) {
    for (std::size_t i = 0; i < bins; ++i) {
      h.densities[i] = static_cast<double>(h.counts[i]) / (static_cast<double>(inside) * width);
    }
  }
  return h;
}

std::size_t sturges_bins(std::size_t count) {
  if (count < 2) return 1;
  return static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(count)))) + 1;
}

double r_squared_linear(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("r_squared_linear: need matching samples");
  const double mx = sample_mean(x), my = sample_mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy * sxy / (sxx * syy);
}

double r_squared_direct(std::span<const double> observed, std::span<const double> model) {
  if (observed.size() != model.size() || observed.empty()) {
    throw std::invalid_argument("r_squared_direct: need matching samples");
  }
  const double mean = sample_mean(observed);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    ss_res += (observed[i] - model[i]) * (observed[i] - model[i]);
    ss_tot += (observed[i] - mean) * (observed[i] - mean);
  }
  return ss_tot == 0.0 ? 0.0 : 1.0 - ss_res / ss_tot;
}

double ks_critical_5pct(std::size_t n) {
  const double r = std::sqrt(static_cast<double>(n));
  return 1.358 / (r + 0.12 + 0.11 / r);
}

double lilliefors_critical_5pct(std::size_t n) {
  const double r = std::sqrt(static_cast<double>(n));
  return 0.895 / (r - 0.01 + 0.85 / r);
}

GaussianFit fit_gaussian(std::span<const double> samples, std::size_t bins) {
  if (samples.size() < 2) throw std::invalid_argument("fit_gaussian: need at least 2 samples");
  GaussianFit fit;
  fit.count = samples.size();
  fit.mean = sample_mean(samples);
  fit.variance = sample_variance(samples, fit.mean);
  fit.ks_critical = ks_critical_5pct(fit.count);
  fit.lilliefors_critical = lilliefors_critical_5pct(fit.count);

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = std::sqrt(fit.variance);
  if (sd == 0.0) {
    fit.ks_statistic = 0.0;
    fit.r_squared = 1.0;
    return fit;
  }
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-(sorted[i] - fit.mean) / (sd * std::numbers::sqrt2));
    d = std::max({d, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  fit.ks_statistic = d;

  fit.histogram = make_histogram(sorted, sorted.front(), sorted.back(), bins == 0 ? sturges_bins(sorted.size()) : bins);
  std::vector<double> pdf(fit.histogram.bins());
  for (std::size_t i = 0; i < pdf.size(); ++i) {
    const double z = (fit.histogram.center(i) - fit.mean) / sd;
    pdf[i] = std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
  }
  fit.r_squared = r_squared_direct(fit.histogram.densities, pdf);
  return fit;
}

// --- density of states -----------------------------------------------------------

DosTable::DosTable(int num_qubits, std::map<HalfInt, std::vector<double>> energy_densities)
    : num_qubits_(num_qubits), levels_(std::move(energy_densities)) {
  for (auto& [s, v] : levels_) std::sort(v.begin(), v.end());
}

DosTable DosTable::from(const Eigensystem& system) {
  std::map<HalfInt, std::vector<double>> levels;
  for (HalfInt s : system.spins()) levels[s] = energy_densities(system.spectrum(s));
  return DosTable(system.num_qubits(), std::move(levels));
}

const std::vector<double>& DosTable::levels(HalfInt s) const {
  auto it = levels_.find(s);
  if (it == levels_.end()) throw std::out_of_range("DosTable: no levels for spin " + s.str());
  return it->second;
}

std::vector<HalfInt> DosTable::spins() const {
  std::vector<HalfInt> out;
  for (const auto& [s, v] : levels_) out.push_back(s);
  return out;
}

std::size_t DosTable::count(HalfInt s, double lo, double hi) const {
  const auto& v = levels(s);
  return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), hi) - std::lower_bound(v.begin(), v.end(), lo));
}

std::size_t DosTable::count(HalfInt s, double center, double width, bool closed) const {
  const auto& v = levels(s);
  const double lo = center - 0.5 * width, hi = center + 0.5 * width;
  auto end = closed ? std::upper_bound(v.begin(), v.end(), hi) : std::lower_bound(v.begin(), v.end(), hi);
  return static_cast<std::size_t>(end - std::lower_bound(v.begin(), v.end(), lo));
}

double DosTable::density(HalfInt s, double center, double width) const {
  return static_cast<double>(count(s, center, width, false)) / (width * num_qubits_);
}

double DosTable::entropy(HalfInt s, double center, double width) const {
  return std::log(density(s, center, width));
}

double DosTable::peak(HalfInt s, double width, double step) const {
  const auto& v = levels(s);
  if (v.empty()) throw std::invalid_argument("DosTable::peak: empty block");
  const double first = std::floor(v.front() / step) * step;
  const auto points = static_cast<long>(std::ceil((v.back() - first) / step)) + 1;
  double best_center = first;
  std::size_t best = 0;
  for (long i = 0; i <= points; ++i) {
    const double c = first + step * static_cast<double>(i);
    const std::size_t n = count(s, c, width, false);
    if (n > best) {
      best = n;
      best_center = c;
    }
  }
  return best_center;
}

std::vector<std::size_t> DosTable::partition_counts(HalfInt s, std::span<const double> edges) const {
  std::vector<std::size_t> out;
  const auto& v = levels(s);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const bool last = i + 2 == edges.size();
    auto end = last ? std::upper_bound(v.begin(), v.end(), edges[i + 1])
                    : std::lower_bound(v.begin(), v.end(), edges[i + 1]);
    out.push_back(static_cast<std::size_t>(end - std::lower_bound(v.begin(), v.end(), edges[i])));
  }
  return out;
}

// --- gap ratios --------------------------------------------------------------------

double p_goe(double r) {
  if (r < 0.0) throw std::domain_error("p_goe: r must be non-negative");
  return 6.75 * r * (1.0 + r) / std::pow(1.0 + r + r * r, 2.5);
}

GapRatioResult gap_ratios(std::span<const double> eigenvalues, std::size_t bins) {
  if (eigenvalues.size() < 3) throw std::invalid_argument("gap_ratios: need at least 3 levels");
  std::vector<double> e(eigenvalues.begin(), eigenvalues.end());
  std::sort(e.begin(), e.end());
  const double threshold = 1e-12 * (e.back() - e.front());
  GapRatioResult out;
  std::vector<double> gaps;
  for (std::size_t i = 1; i < e.size(); ++i) {
    const double g = e[i] - e[i - 1];
    if (g <= threshold) ++out.dropped_gaps;
    else gaps.push_back(g);
  }
  if (gaps.size() < 2) throw std::invalid_argument("gap_ratios: fewer than 3 levels after removing degeneracies");
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    out.r.push_back(std::min(gaps[i], gaps[i - 1]) / std::max(gaps[i], gaps[i - 1]));
  }
  out.mean = sample_mean(out.r);
  out.histogram = make_histogram(out.r, 0.0, 1.0, bins);
  std::vector<double> model_p(bins), model_2p(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    model_p[i] = p_goe(out.histogram.center(i));
    model_2p[i] = 2.0 * model_p[i];
  }
  out.r_squared = r_squared_linear(model_2p, out.histogram.densities);
  out.r_squared_direct_2p = r_squared_direct(out.histogram.densities, model_2p);
  out.r_squared_direct_p = r_squared_direct(out.histogram.densities, model_p);
  return out;
}

// --- bands and windows -----------------------------------------------------------

std::vector<BandPoint> band_data(const ReducedElementTable& table, const BlockSpectrum& spectrum) {
  require_present(table, "band_data");
  if (table.elements.rows() != table.elements.cols() || table.elements.rows() != spectrum.dim()) {
    throw std::invalid_argument("band_data: need a square table matching the spectrum");
  }
  std::vector<BandPoint> out;
  for (Eigen::Index i = 0; i < spectrum.dim(); ++i) {
    out.push_back({spectrum.eigenvalues(i) / spectrum.num_qubits, table.elements(i, i)});
  }
  std::stable_sort(out.begin(), out.end(), [](const BandPoint& a, const BandPoint& b) {
    return a.energy_density < b.energy_density;
  });
  return out;
}

std::vector<BandWindowMean> band_window_means(std::span<const BandPoint> band, double width) {
  std::vector<BandWindowMean> out;
  if (band.empty()) return out;
  const double first = band.front().energy_density;
  std::size_t i = 0;
  for (double lo = first; i < band.size(); lo += width) {
    BandWindowMean w{lo + 0.5 * width, 0, 0.0};
    while (i < band.size() && band[i].energy_density < lo + width) {
      w.mean += band[i].value;
      ++w.count;
      ++i;
    }
    if (w.count > 0) w.mean /= static_cast<double>(w.count);
    out.push_back(w);
  }
  return out;
}

DiagWindowStats diag_residual_stats(const ReducedElementTable& table, const BlockSpectrum& spectrum,
                                    const EnergyWindow& window, std::size_t min_count, std::size_t bins) {
  require_present(table, "diag_residual_stats");
  if (table.s_row != table.s_col) throw std::invalid_argument("diag_residual_stats: table is not block-diagonal");
  const auto idx = indices_in(spectrum, window);
  if (idx.size() < 2) {
    throw std::invalid_argument("diag_residual_stats: window [" + std::to_string(window.lo()) + ", " +
                                std::to_string(window.hi()) + ") holds " + std::to_string(idx.size()) + " levels");
  }
  DiagWindowStats out;
  out.window = window;
  out.count = idx.size();
  std::vector<double> values;
  for (auto i : idx) values.push_back(table.elements(i, i));
  out.mean = sample_mean(values);
  for (double v : values) out.residuals.push_back(v - out.mean);
  out.fit = fit_gaussian(out.residuals, bins);
  out.low_stats = out.count < min_count;
  return out;
}

namespace {

std::vector<double> offdiag_samples(const ReducedElementTable& table, const BlockSpectrum& row,
                                    const BlockSpectrum& col, const EnergyWindow& row_window,
                                    const EnergyWindow& col_window) {
  const auto rows = indices_in(row, row_window);
  const auto cols = indices_in(col, col_window);
  const bool same_block = table.s_row == table.s_col;
  const bool same_window = row_window.center == col_window.center && row_window.width == col_window.width;
  std::vector<double> out;
  for (auto i : rows) {
    for (auto j : cols) {
      if (same_block && (same_window ? j <= i : j == i)) continue;
      out.push_back(table.elements(i, j));
    }
  }
  return out;
}

}  // namespace

OffdiagWindowStats offdiag_window_stats(const ReducedElementTable& table, const BlockSpectrum& row,
                                        const BlockSpectrum& col, const EnergyWindow& row_window,
                                        const EnergyWindow& col_window, std::size_t min_count, std::size_t bins) {
  require_present(table, "offdiag_window_stats");
  OffdiagWindowStats out;
  out.row_window = row_window;
  out.col_window = col_window;
  out.samples = offdiag_samples(table, row, col, row_window, col_window);
  if (out.samples.size() < 2) throw std::invalid_argument("offdiag_window_stats: no off-diagonal pairs in the windows");
  out.fit = fit_gaussian(out.samples, bins);
  out.low_stats = out.samples.size() < min_count;
  return out;
}

FScanResult f_magnitude(const ReducedElementTable& table, const BlockSpectrum& row, const BlockSpectrum& col,
                        const DosTable& dos, const FScanGrid& grid) {
  require_present(table, "f_magnitude");
  const int n = row.num_qubits;
  FScanResult out;
  for (double e : grid.energy_densities) {
    for (double omega : grid.omegas) {
      FScanCell cell;
      cell.energy_density = e;
      cell.spin = 0.5 * (table.s_row + table.s_col).value();
      cell.nu = (table.s_row - table.s_col).value();
      cell.omega = omega;
      const EnergyWindow rw{e + 0.5 * omega / n, grid.width};
      const EnergyWindow cw{e - 0.5 * omega / n, grid.width};
      const auto samples = offdiag_samples(table, row, col, rw, cw);
      cell.count = samples.size();
      cell.dos = table.s_row == table.s_col
                     ? dos.density(table.s_row, e, grid.width)
                     : std::sqrt(dos.density(table.s_row, e, grid.width) * dos.density(table.s_col, e, grid.width));
      if (cell.count >= 2) {
        cell.variance = sample_variance(samples, sample_mean(samples));
        cell.magnitude = std::sqrt(cell.variance * cell.dos);
      }
      cell.reliable = cell.count >= grid.min_count && cell.count >= 2;
      out.cells.push_back(cell);
    }
  }
  return out;
}

VarianceRatioEntry variance_ratio(const ReducedElementTable& table, const BlockSpectrum& spectrum,
                                  const VarianceSweep& sweep) {
  require_present(table, "variance_ratio");
  if (table.s_row != table.s_col) throw std::invalid_argument("variance_ratio: table is not block-diagonal");
  VarianceRatioEntry out;
  out.s = table.s_row;
  const double first = sweep.center - 0.5 * sweep.encompassing_width + 0.5 * sweep.window_width;
  const double last = sweep.center + 0.5 * sweep.encompassing_width - 0.5 * sweep.window_width;
  const auto steps = static_cast<long>(std::floor((last - first) / sweep.step + 1e-9));
  for (long i = 0; i <= steps; ++i) {
    const EnergyWindow w{first + sweep.step * static_cast<double>(i), sweep.window_width};
    const auto idx = indices_in(spectrum, w);
    const auto off = offdiag_samples(table, spectrum, spectrum, w, w);
    if (idx.size() < sweep.min_diag || off.size() < sweep.min_offdiag) {
      ++out.skipped;
      continue;
    }
    std::vector<double> diag;
    for (auto a : idx) diag.push_back(table.elements(a, a));
    const double var_diag = sample_variance(diag, sample_mean(diag));
    const double var_off = sample_variance(off, sample_mean(off));
    if (var_off <= 0.0) {
      ++out.skipped;
      continue;
    }
    out.centers.push_back(w.center);
    out.ratios.push_back(var_diag / var_off);
  }
  if (out.ratios.empty()) {
    throw std::runtime_error("variance_ratio: every window for spin " + out.s.str() + " had fewer than " +
                             std::to_string(sweep.min_diag) + " diagonal or " + std::to_string(sweep.min_offdiag) +
                             " off-diagonal samples");
  }
  out.mean = sample_mean(out.ratios);
  out.std = std::sqrt(sample_variance(out.ratios, out.mean));
  out.standard_error = out.std / std::sqrt(static_cast<double>(out.ratios.size()));
  return out;
}

Eigen::MatrixXd sample_goe(Eigen::Index n, std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> normal(0.0, sigma);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    m(j, j) = std::numbers::sqrt2 * normal(rng);
    for (Eigen::Index i = j + 1; i < n; ++i) m(i, j) = m(j, i) = normal(rng);
  }
  return m;
}

}  // namespace ethlab
