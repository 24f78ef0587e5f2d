#include "ethlab/eth_stats.hpp"
#include "ethlab/spectral.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace ethlab;

namespace {

BlockSpectrum uniform_levels(int num_qubits, Eigen::Index count, double lo, double hi) {
  BlockSpectrum b;
  b.num_qubits = num_qubits;
  b.s = HalfInt(0);
  b.eigenvalues = Eigen::VectorXd::LinSpaced(count, lo * num_qubits, hi * num_qubits);
  b.eigenvectors = Eigen::MatrixXd::Identity(count, count);
  return b;
}

ReducedElementTable square_table(Eigen::MatrixXd elements) {
  ReducedElementTable t;
  t.s_row = t.s_col = HalfInt(0);
  t.rank = HalfInt(0);
  t.present = true;
  t.elements = std::move(elements);
  return t;
}

}  // namespace

TEST_CASE("gap ratio examples") {
  const std::vector<double> even{0, 1, 2, 3};
  const auto a = gap_ratios(even);
  REQUIRE(a.r.size() == 2);
  CHECK(a.r[0] == 1.0);
  CHECK(a.r[1] == 1.0);
  const auto b = gap_ratios(std::vector<double>{0, 1, 3});
  REQUIRE(b.r.size() == 1);
  CHECK(b.r[0] == 0.5);
  const auto c = gap_ratios(std::vector<double>{0, 1, 1, 3});
  CHECK(c.dropped_gaps == 1);
  CHECK(c.r == b.r);
  CHECK_THROWS_AS(gap_ratios(std::vector<double>{0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(gap_ratios(std::vector<double>{1, 1, 1, 2}), std::invalid_argument);
}

TEST_CASE("p_goe normalization") {
  CHECK(p_goe(1.0) == doctest::Approx(6.75 * 2 / std::pow(3.0, 2.5)));
  CHECK(p_goe(1.0) == doctest::Approx(0.866025).epsilon(1e-5));
  // Simpson's rule: the (27/4) form is already a density on [0, 1], and
  // integrates to 2 over [0, inf).
  const int n = 2000;
  double sum = p_goe(0.0) + p_goe(1.0);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * p_goe(static_cast<double>(i) / n);
  CHECK(sum / (3.0 * n) == doctest::Approx(1.0).epsilon(1e-8));
  double tail = 0.0;  // substitute r = 1/u on [1, inf)
  for (int i = 1; i < n; ++i) {
    const double u = static_cast<double>(i) / n;
    tail += (i % 2 ? 4.0 : 2.0) * p_goe(1.0 / u) / (u * u);
  }
  CHECK((sum + tail + p_goe(1.0)) / (3.0 * n) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK_THROWS_AS(p_goe(-0.1), std::domain_error);
}

TEST_CASE("GOE spectra follow the gap-ratio distribution") {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd m = sample_goe(1000, rng);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd e = solver.eigenvalues();
  // Central half of the semicircle, where the density is roughly flat.
  const std::vector<double> bulk(e.data() + 250, e.data() + 750);
  const auto all = gap_ratios(std::vector<double>(e.data(), e.data() + e.size()));
  CHECK(all.mean == doctest::Approx(0.5307).epsilon(0.02));
  CHECK(gap_ratios(bulk).mean == doctest::Approx(0.5307).epsilon(0.04));
  CHECK(all.r_squared > 0.7);

  // Poisson levels give a clearly different mean (2 ln 2 - 1).
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> poisson(5000);
  for (auto& x : poisson) x = uni(rng);
  CHECK(gap_ratios(poisson).mean == doctest::Approx(2 * std::log(2.0) - 1).epsilon(0.03));
}

TEST_CASE("gap ratios are invariant under shifts and positive rescaling") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  std::vector<double> e(300);
  for (auto& x : e) x = normal(rng);
  const auto base = gap_ratios(e);
  std::vector<double> moved(e);
  for (auto& x : moved) x = 3.5 * x - 12.0;
  const auto other = gap_ratios(moved);
  REQUIRE(other.r.size() == base.r.size());
  for (std::size_t i = 0; i < base.r.size(); ++i) CHECK(other.r[i] == doctest::Approx(base.r[i]).epsilon(1e-12));
}

TEST_CASE("histogram and R^2 helpers") {
  const std::vector<double> v{0.0, 0.1, 0.5, 0.99, 1.0, 1.5};
  const auto h = make_histogram(v, 0.0, 1.0, 2);
  CHECK(h.counts == std::vector<std::size_t>{2, 3});
  CHECK(h.densities[0] * 0.5 + h.densities[1] * 0.5 == doctest::Approx(1.0));
  CHECK(sturges_bins(100) == 8);
  const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  CHECK(r_squared_linear(x, y) == doctest::Approx(1.0));
  CHECK(r_squared_direct(y, y) == doctest::Approx(1.0));
  CHECK(r_squared_direct(y, x) < 0.0);
}

TEST_CASE("Gaussian fits of synthetic normal samples") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> normal(0.0, 0.3);
  int passes = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(500);
    for (auto& v : x) v = normal(rng);
    const auto fit = fit_gaussian(x);
    passes += fit.ks_pass();
    if (trial == 0) {
      CHECK(fit.variance == doctest::Approx(0.09).epsilon(0.2));
      CHECK(fit.histogram.bins() == sturges_bins(500));
    }
  }
  CHECK(passes >= 90);
  CHECK(ks_critical_5pct(100) == doctest::Approx(1.358 / (10 + 0.12 + 0.011)));
  CHECK(lilliefors_critical_5pct(100) < ks_critical_5pct(100));

  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> flat(2000);
  for (auto& v : flat) v = uni(rng);
  CHECK_FALSE(fit_gaussian(flat).ks_pass());
  CHECK_THROWS_AS(fit_gaussian(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("constant diagonal gives zero residual variance") {
  const auto spec = uniform_levels(10, 50, -0.2, 0.2);
  const auto table = square_table(Eigen::MatrixXd::Constant(50, 50, 0.25));
  const auto d = diag_residual_stats(table, spec, {0.0, 0.1});
  CHECK(d.mean == doctest::Approx(0.25));
  CHECK(d.fit.variance == doctest::Approx(0.0));
  CHECK(d.low_stats);
  CHECK_THROWS_AS(diag_residual_stats(table, spec, {5.0, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(offdiag_window_stats(table, spec, spec, {5.0, 0.1}, {5.0, 0.1}), std::invalid_argument);
  ReducedElementTable absent = table;
  absent.present = false;
  CHECK_THROWS_AS(band_data(absent, spec), std::invalid_argument);
}

TEST_CASE("off-diagonal windows") {
  const auto spec = uniform_levels(1, 10, 0.0, 0.9);  // E/N = 0, 0.1, ..., 0.9
  Eigen::MatrixXd m(10, 10);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) m(i, j) = 10 * i + j;
  const auto table = square_table(m);
  const auto same = offdiag_window_stats(table, spec, spec, {0.15, 0.36}, {0.15, 0.36});
  CHECK(same.samples == std::vector<double>{1, 2, 3, 12, 13, 23});  // alpha < alpha' over levels 0..3
  const auto cross = offdiag_window_stats(table, spec, spec, {0.05, 0.15}, {0.75, 0.15});
  CHECK(cross.samples == std::vector<double>{7, 8, 17, 18});
}

TEST_CASE("density of states") {
  std::map<HalfInt, std::vector<double>> levels{{HalfInt(0), {-0.3, -0.05, 0.0, 0.02, 0.05, 0.4}}};
  const DosTable dos(10, levels);
  CHECK(dos.count(HalfInt(0), 0.0, 0.1, false) == 3);
  CHECK(dos.count(HalfInt(0), 0.0, 0.1, true) == 4);
  CHECK(dos.density(HalfInt(0), 0.0, 0.1) == doctest::Approx(3.0 / (0.1 * 10)));
  CHECK(dos.entropy(HalfInt(0), 0.0, 0.1) == doctest::Approx(std::log(3.0)));
  CHECK(std::isinf(dos.entropy(HalfInt(0), 2.0, 0.1)));
  const double p = dos.peak(HalfInt(0), 0.1, 0.01);
  CHECK(dos.count(HalfInt(0), p, 0.1, false) == 3);
  const std::vector<double> edges{-0.3, -0.1, 0.1, 0.4};
  const auto parts = dos.partition_counts(HalfInt(0), edges);
  CHECK(parts[0] + parts[1] + parts[2] == 6);
  CHECK_THROWS_AS(dos.levels(HalfInt(3)), std::out_of_range);
}

TEST_CASE("variance ratio of synthetic ensembles") {
  std::mt19937_64 rng(3);
  const Eigen::Index n = 2000;
  const auto spec = uniform_levels(1, n, -0.25, 0.25);
  VarianceSweep sweep;
  sweep.center = 0.0;
  const auto goe = variance_ratio(square_table(sample_goe(n, rng)), spec, sweep);
  CHECK(goe.ratios.size() == 5);
  CHECK(goe.skipped == 0);
  CHECK(goe.mean == doctest::Approx(2.0).epsilon(0.1));
  CHECK(goe.standard_error == doctest::Approx(goe.std / std::sqrt(5.0)));

  std::normal_distribution<double> normal;
  Eigen::MatrixXd iid(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j; i < n; ++i) iid(i, j) = iid(j, i) = normal(rng);
  CHECK(variance_ratio(square_table(iid), spec, sweep).mean == doctest::Approx(1.0).epsilon(0.1));

  VarianceSweep strict = sweep;
  strict.min_diag = 10'000;
  CHECK_THROWS_AS(variance_ratio(square_table(iid), spec, strict), std::runtime_error);
}

TEST_CASE("f magnitude of a synthetic ensemble") {
  std::mt19937_64 rng(5);
  const int num_qubits = 10;
  const Eigen::Index n = 1500;
  const auto spec = uniform_levels(num_qubits, n, -0.5, 0.5);
  const double sigma = 0.2;
  const auto table = square_table(sample_goe(n, rng, sigma));
  std::map<HalfInt, std::vector<double>> levels{{HalfInt(0), {}}};
  for (Eigen::Index i = 0; i < n; ++i) levels[HalfInt(0)].push_back(spec.eigenvalues(i) / num_qubits);
  const DosTable dos(num_qubits, levels);
  FScanGrid grid;
  grid.energy_densities = {0.0};
  grid.omegas = {0.0, 2.0};
  const auto result = f_magnitude(table, spec, spec, dos, grid);
  REQUIRE(result.cells.size() == 2);
  const double density = (n - 1) / (1.0 * num_qubits);  // levels per unit energy
  for (const auto& cell : result.cells) {
    CHECK(cell.reliable);
    CHECK(cell.dos == doctest::Approx(density).epsilon(0.02));
    CHECK(cell.magnitude == doctest::Approx(std::sqrt(cell.variance * cell.dos)));
    CHECK(cell.magnitude == doctest::Approx(sigma * std::sqrt(density)).epsilon(0.05));
  }
  grid.omegas = {40.0};
  const auto empty = f_magnitude(table, spec, spec, dos, grid);
  CHECK(empty.cells[0].count == 0);
  CHECK_FALSE(empty.cells[0].reliable);
  CHECK(empty.cells[0].magnitude == 0.0);
}

TEST_CASE("statistics are invariant under eigenvector phase flips") {
  auto sys = Eigensystem::compute([] {
    ModelSpec m;
    m.num_qubits = 10;
    return m;
  }());
  const auto op = builtin_tensor_op("T10", 10);
  const HalfInt s(1);
  const auto before = reduced_elements(op, sys, s, s);
  BlockSpectrum flipped = sys.spectrum(s);
  for (Eigen::Index j = 0; j < flipped.dim(); j += 3) flipped.eigenvectors.col(j) *= -1.0;
  sys.replace_spectrum(flipped);
  const auto after = reduced_elements(op, sys, s, s);
  CHECK((before.elements.cwiseAbs() - after.elements.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((before.elements.diagonal() - after.elements.diagonal()).cwiseAbs().maxCoeff() < 1e-12);

  const EnergyWindow w{DosTable::from(sys).peak(s), 0.2};
  const auto d0 = diag_residual_stats(before, sys.spectrum(s), w);
  const auto d1 = diag_residual_stats(after, sys.spectrum(s), w);
  CHECK(d0.fit.variance == doctest::Approx(d1.fit.variance).epsilon(1e-10));
  const auto o0 = offdiag_window_stats(before, sys.spectrum(s), sys.spectrum(s), w, w);
  const auto o1 = offdiag_window_stats(after, sys.spectrum(s), sys.spectrum(s), w, w);
  double sq0 = 0, sq1 = 0;
  for (double x : o0.samples) sq0 += x * x;
  for (double x : o1.samples) sq1 += x * x;
  CHECK(sq0 == doctest::Approx(sq1).epsilon(1e-10));
}
