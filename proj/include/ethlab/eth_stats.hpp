#pragma once

#include "ethlab/half_int.hpp"
#include "ethlab/spectral.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <random>
#include <span>
#include <vector>

namespace ethlab {

struct Histogram {
  std::vector<double> edges;  // bins + 1 ascending edges
  std::vector<std::size_t> counts;
  std::vector<double> densities;  // normalized so that sum(density * width) = 1

  std::size_t bins() const { return counts.size(); }
  double center(std::size_t i) const { return 0.5 * (edges[i] + edges[i + 1]); }
};

/// Equal-width histogram on [lo, hi]; values outside are ignored, hi is
/// included in the last bin.
Histogram make_histogram(std::span<const double> values, double lo, double hi, std::size_t bins);
std::size_t sturges_bins(std::size_t count);

/// Coefficient of determination of a least-squares line y ~ a + b x.
double r_squared_linear(std::span<const double> x, std::span<const double> y);
/// 1 - SS_res / SS_tot with `model` taken as the prediction directly.
double r_squared_direct(std::span<const double> observed, std::span<const double> model);

/// Level counts per spin block. Energies are kept as E/N; densities are in
/// states per unit absolute energy at a single m (width_density * N in the
/// denominator).
class DosTable {
public:
  static DosTable from(const Eigensystem& system);
  DosTable(int num_qubits, std::map<HalfInt, std::vector<double>> energy_densities);

  int num_qubits() const { return num_qubits_; }
  const std::vector<double>& levels(HalfInt s) const;
  std::vector<HalfInt> spins() const;

  /// Levels with E/N in [lo, hi).
  std::size_t count(HalfInt s, double lo, double hi) const;
  std::size_t count(HalfInt s, double center, double width, bool closed) const;
  double density(HalfInt s, double center, double width) const;
  /// log of density(); -inf for an empty window.
  double entropy(HalfInt s, double center, double width) const;
  /// Center of the width-`width` window holding the most levels, scanned on a
  /// grid of spacing `step`. Ties go to the lowest center.
  double peak(HalfInt s, double width = 0.5, double step = 0.01) const;
  /// Counts over consecutive [edges[i], edges[i+1]); the last bin is closed.
  std::vector<std::size_t> partition_counts(HalfInt s, std::span<const double> edges) const;

private:
  int num_qubits_;
  std::map<HalfInt, std::vector<double>> levels_;
};

/// (27/4) r (1 + r) / (1 + r + r^2)^(5/2).
double p_goe(double r);

struct GapRatioResult {
  std::vector<double> r;
  std::size_t dropped_gaps = 0;
  Histogram histogram;
  /// Regression with intercept of the histogram densities on 2 P_GOE at bin
  /// centers. Invariant under rescaling the model, so it is also the R^2 of P_GOE.
  double r_squared = 0.0;
  /// Unfitted R^2 treating 2 P_GOE (resp. P_GOE) as the prediction.
  double r_squared_direct_2p = 0.0;
  double r_squared_direct_p = 0.0;
  double mean = 0.0;
};

/// Minimal gap ratios of ascending levels. Gaps below 1e-12 x bandwidth are
/// dropped first. Throws std::invalid_argument with fewer than 3 levels left.
GapRatioResult gap_ratios(std::span<const double> eigenvalues, std::size_t bins = 25);

struct GaussianFit {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double ks_statistic = 0.0;
  /// 5% critical values: Kolmogorov with a fully specified null, and the
  /// Lilliefors value that accounts for the estimated mean and variance.
  double ks_critical = 0.0;
  double lilliefors_critical = 0.0;
  Histogram histogram;
  double r_squared = 0.0;  // histogram density vs fitted normal pdf at bin centers

  bool ks_pass() const { return ks_statistic < ks_critical; }
};

/// Fits a normal by sample moments. bins = 0 selects Sturges' rule.
/// Throws std::invalid_argument for fewer than 2 samples.
GaussianFit fit_gaussian(std::span<const double> samples, std::size_t bins = 0);
double ks_critical_5pct(std::size_t n);
double lilliefors_critical_5pct(std::size_t n);

struct EnergyWindow {
  double center = 0.0;  // E / N
  double width = 0.1;

  double lo() const { return center - 0.5 * width; }
  double hi() const { return center + 0.5 * width; }
  bool contains(double energy_density) const { return energy_density >= lo() && energy_density < hi(); }
};

struct BandPoint {
  double energy_density;
  double value;
};

/// Diagonal reduced elements against E/N, ascending in energy.
/// Throws std::invalid_argument for an absent or non-square table.
std::vector<BandPoint> band_data(const ReducedElementTable& table, const BlockSpectrum& spectrum);

struct BandWindowMean {
  double center;
  std::size_t count;
  double mean;
};

/// Means over consecutive windows of `width` tiling [first, last] level.
std::vector<BandWindowMean> band_window_means(std::span<const BandPoint> band, double width);

struct DiagWindowStats {
  EnergyWindow window;
  std::size_t count = 0;
  double mean = 0.0;
  std::vector<double> residuals;
  GaussianFit fit;
  bool low_stats = false;  // fewer than `min_count` elements
};

/// Diagonal elements with E/N in the window, minus their mean.
/// Throws std::invalid_argument for an empty window (or fewer than 2 levels).
DiagWindowStats diag_residual_stats(const ReducedElementTable& table, const BlockSpectrum& spectrum,
                                    const EnergyWindow& window, std::size_t min_count = 30, std::size_t bins = 0);

struct OffdiagWindowStats {
  EnergyWindow row_window, col_window;
  std::vector<double> samples;
  GaussianFit fit;
  bool low_stats = false;
};

/// Elements <alpha||T||alpha'> with E_alpha/N in row_window and E_alpha'/N in
/// col_window, alpha != alpha'. For a block-diagonal table with identical
/// windows each unordered pair is taken once (alpha < alpha').
/// Throws std::invalid_argument when no pair qualifies.
OffdiagWindowStats offdiag_window_stats(const ReducedElementTable& table, const BlockSpectrum& row,
                                        const BlockSpectrum& col, const EnergyWindow& row_window,
                                        const EnergyWindow& col_window, std::size_t min_count = 100,
                                        std::size_t bins = 0);

struct FScanGrid {
  std::vector<double> energy_densities;  // mean energy E/N of the cell
  std::vector<double> omegas;            // absolute energy difference E_alpha - E_alpha'
  double width = 0.1;
  std::size_t min_count = 30;
};

struct FScanCell {
  double energy_density = 0.0;
  double spin = 0.0;  // (s_row + s_col) / 2
  double nu = 0.0;    // s_row - s_col
  double omega = 0.0;
  std::size_t count = 0;
  double variance = 0.0;
  double dos = 0.0;
  double magnitude = 0.0;
  bool reliable = false;
};

struct FScanResult {
  std::vector<FScanCell> cells;  // energy-major, then omega
};

/// |f| = sqrt(variance * D). The row window is centered at (E + omega/2)/N,
/// the column window at (E - omega/2)/N. D is the row block's density at E/N,
/// or the geometric mean of both blocks' densities when nu != 0. Empty or
/// sparse cells are flagged, never fabricated.
FScanResult f_magnitude(const ReducedElementTable& table, const BlockSpectrum& row, const BlockSpectrum& col,
                        const DosTable& dos, const FScanGrid& grid);

struct VarianceSweep {
  double center = 0.0;
  double encompassing_width = 0.5;
  double window_width = 0.1;
  double step = 0.1;
  std::size_t min_diag = 30;
  std::size_t min_offdiag = 100;
};

struct VarianceRatioEntry {
  HalfInt s;
  std::vector<double> centers;  // accepted windows
  std::vector<double> ratios;
  std::size_t skipped = 0;
  double mean = 0.0;
  double std = 0.0;  // across windows (unbiased; 0 for one window)
  double standard_error = 0.0;
};

struct VarianceRatioResult {
  std::vector<VarianceRatioEntry> entries;
};

/// sigma^2_diag / sigma^2_off over narrow windows inside the encompassing one.
/// Throws std::runtime_error when every window is skipped.
VarianceRatioEntry variance_ratio(const ReducedElementTable& table, const BlockSpectrum& spectrum,
                                  const VarianceSweep& sweep);

/// Symmetric matrix with N(0, 2 sigma^2) diagonal and N(0, sigma^2) off-diagonal entries.
Eigen::MatrixXd sample_goe(Eigen::Index n, std::mt19937_64& rng, double sigma = 1.0);

}  // namespace ethlab
