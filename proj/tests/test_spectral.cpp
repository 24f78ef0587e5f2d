#include "ethlab/spectral.hpp"
#include "ethlab/spectrum_cache.hpp"
#include "ethlab/spin_algebra.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <thread>

using namespace ethlab;

namespace {

HalfInt h(int twice) { return HalfInt::from_twice(twice); }

ModelSpec chain(int n) {
  ModelSpec m;
  m.num_qubits = n;
  return m;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ethlab-test-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("block_matrix examples") {
  const auto h2 = build_hamiltonian(chain(2));
  const auto b = block_matrix(h2, HalfInt(0), HalfInt(0));
  REQUIRE(b.rows() == 1);
  CHECK(b(0, 0) == doctest::Approx(-3.0));
  const auto h3 = build_hamiltonian(chain(3));
  for (HalfInt m : {h(1), h(-1)}) {
    const auto b3 = block_matrix(h3, h(1), m);
    REQUIRE(b3.rows() == 2);
    const auto e = diagonalize_block(b3).eigenvalues;
    CHECK(e(0) == doctest::Approx(-3.0));
    CHECK(e(1) == doctest::Approx(-3.0));
  }
}

TEST_CASE("block matrices do not depend on m") {
  for (int n = 2; n <= 8; ++n) {
    const auto h = build_hamiltonian(chain(n));
    double worst = 0.0;
    for (const auto& [s, d] : sector_layout(n).multiplicity) {
      const Eigen::MatrixXd ref = block_matrix(h, s, s);
      for (HalfInt m = -s; m < s; m += 1) worst = std::max(worst, (block_matrix(h, s, m) - ref).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("diagonalize_block") {
  Eigen::MatrixXd one(1, 1);
  one << -3.0;
  CHECK(diagonalize_block(one).eigenvalues(0) == -3.0);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
  bad(0, 1) = bad(1, 0) = std::nan("");
  CHECK_THROWS_AS(diagonalize_block(bad), std::domain_error);

  const auto h = build_hamiltonian(chain(8));
  const Eigen::MatrixXd b = block_matrix(h, HalfInt(1), HalfInt(1));
  const auto spec = diagonalize_block(b);
  for (Eigen::Index i = 0; i < spec.dim(); ++i) {
    CHECK((b * spec.eigenvectors.col(i) - spec.eigenvalues(i) * spec.eigenvectors.col(i)).norm() <= 1e-9 * b.norm());
    Eigen::Index pivot;
    spec.eigenvectors.col(i).cwiseAbs().maxCoeff(&pivot);
    CHECK(spec.eigenvectors(pivot, i) > 0);
    if (i > 0) CHECK(spec.eigenvalues(i) >= spec.eigenvalues(i - 1));
  }
  const Eigen::MatrixXd gram = spec.eigenvectors.transpose() * spec.eigenvectors;
  CHECK((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("block spectra reproduce the dense spectrum") {
  for (int n = 2; n <= 8; ++n) {
    const auto sys = Eigensystem::compute(chain(n));
    const Eigen::VectorXd e = full_spectrum(sys);
    const Eigen::VectorXd ref = oracle::dense_spectrum(chain(n));
    REQUIRE(e.size() == ref.size());
    CHECK((e - ref).cwiseAbs().maxCoeff() <= 1e-9);
    for (HalfInt s : sys.spins()) CHECK(sys.spectrum(s).dim() == static_cast<Eigen::Index>(multiplicity(n, s)));
  }
  const auto pbc = Eigensystem::compute(ModelSpec::periodic(6));
  CHECK((full_spectrum(pbc) - oracle::dense_spectrum(ModelSpec::periodic(6))).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("trace consistency") {
  for (int n : {4, 9, 12}) {
    const auto sys = Eigensystem::compute(chain(n));
    CHECK(std::abs(full_spectrum(sys).sum()) <= 1e-8);
  }
}

TEST_CASE("threaded computation is deterministic") {
  Eigensystem::Options serial, threaded;
  threaded.threads = 3;
  const auto a = Eigensystem::compute(chain(10), serial);
  const auto b = Eigensystem::compute(chain(10), threaded);
  for (HalfInt s : a.spins()) {
    CHECK(a.spectrum(s).eigenvalues == b.spectrum(s).eigenvalues);
    CHECK(a.spectrum(s).eigenvectors == b.spectrum(s).eigenvectors);
  }
}

TEST_CASE("matrix elements at N = 2") {
  const auto sys = Eigensystem::compute(chain(2));
  const auto t10 = builtin_tensor_op("T10", 2);
  CHECK(matrix_element(t10, sys, {0, HalfInt(1), HalfInt(0)}, {0, HalfInt(0), HalfInt(0)}) == doctest::Approx(0.5));
  CHECK(matrix_element(t10, sys, {0, HalfInt(1), HalfInt(1)}, {0, HalfInt(1), HalfInt(1)}) == doctest::Approx(0.5));
  CHECK(matrix_element(t10, sys, {0, HalfInt(1), HalfInt(1)}, {0, HalfInt(1), HalfInt(0)}) == 0.0);
}

TEST_CASE("reduced elements at N = 2") {
  const auto sys = Eigensystem::compute(chain(2));
  const auto t10 = builtin_tensor_op("T10", 2);
  const auto a = reduced_elements(t10, sys, HalfInt(1), HalfInt(0));
  REQUIRE(a.present);
  CHECK(a.elements(0, 0) == doctest::Approx(0.5));
  CHECK(a.choice.m_col == HalfInt(0));
  const auto b = reduced_elements(t10, sys, HalfInt(1), HalfInt(1));
  REQUIRE(b.present);
  CHECK(b.elements(0, 0) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(b.choice.m_col != HalfInt(0));
  CHECK_FALSE(reduced_elements(t10, sys, HalfInt(0), HalfInt(0)).present);
  CHECK_THROWS_AS(reduced_elements_at(t10, sys, HalfInt(1), HalfInt(1), HalfInt(0)), std::domain_error);
}

TEST_CASE("reduced elements agree with dense sandwiches") {
  const int n = 6;
  const auto sys = Eigensystem::compute(chain(n));
  const auto op = builtin_tensor_op("T11", n);
  const Eigen::MatrixXd full = oracle::tensor_op("T11", n);
  for (HalfInt s : sys.spins()) {
    for (HalfInt sp : sys.spins()) {
      const auto t = reduced_elements(op, sys, s, sp);
      if (!t.present) continue;
      const auto& c = t.choice;
      const Eigen::MatrixXd block =
          oracle::restrict(full, oracle::sector_states(n, c.m_row), oracle::sector_states(n, c.m_col));
      const Eigen::MatrixXd direct = sys.eigenstates(s, c.m_row)->transpose() * block * *sys.eigenstates(sp, c.m_col);
      CHECK((direct / c.cg - t.elements).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("Wigner-Eckart factorization across m and q") {
  for (int n : {4, 6, 7}) {
    const auto sys = Eigensystem::compute(chain(n));
    for (const char* name : {"T1", "T2"}) {
      const auto fam = builtin_tensor_family(name, n);
      double worst = 0.0;
      for (HalfInt s : sys.spins()) {
        for (HalfInt sp : sys.spins()) {
          if (!triangle(sp, fam.rank, s)) continue;
          const auto ref = reduced_elements(fam.component(HalfInt(0)), sys, s, sp).elements;
          const double scale = std::max(1.0, ref.cwiseAbs().maxCoeff());
          for (HalfInt q = -fam.rank; q <= fam.rank; q += 1) {
            for (HalfInt m : admissible_m_cols(s, sp, fam.rank, q)) {
              const auto t = reduced_elements_at(fam.component(q), sys, s, sp, m);
              worst = std::max(worst, (t.elements - ref).cwiseAbs().maxCoeff() / scale);
            }
          }
        }
      }
      CHECK(worst <= 1e-8);
    }
  }
}

TEST_CASE("sum rule over the full eigenbasis") {
  const int n = 6;
  const auto sys = Eigensystem::compute(chain(n));
  const auto op = builtin_tensor_op("T11", n);
  for (HalfInt m_col : {HalfInt(-1), HalfInt(0), HalfInt(1)}) {
    const HalfInt m_row = m_col + HalfInt(1);
    double total = 0.0;
    for (HalfInt s : sys.spins()) {
      if (abs(m_row) > s) continue;
      for (HalfInt sp : sys.spins()) {
        if (abs(m_col) > sp) continue;
        const Eigen::MatrixXd sandwich =
            sys.eigenstates(s, m_row)->transpose() * Eigen::MatrixXd(op.op.to_sparse<double>(m_col, m_row)) *
            *sys.eigenstates(sp, m_col);
        total += sandwich.squaredNorm();
      }
    }
    CHECK(total == doctest::Approx(Eigen::MatrixXd(op.op.to_sparse<double>(m_col, m_row)).squaredNorm()).epsilon(1e-10));
  }
}

TEST_CASE("Lanczos extremal eigenvalues") {
  const auto h = build_hamiltonian(chain(10));
  const auto [lo, hi] = extremal_eigenvalues(h, HalfInt(0));
  const auto sys = Eigensystem::compute(chain(10));
  const auto e = full_spectrum(sys);
  CHECK(lo == doctest::Approx(e(0)).epsilon(1e-9));
  CHECK(hi == doctest::Approx(e(e.size() - 1)).epsilon(1e-9));
}

TEST_CASE("spectrum cache round trip") {
  const auto dir = scratch("cache");
  const SpectrumCache cache(dir);
  const auto model = chain(4);
  const auto sys = Eigensystem::compute(model);
  const auto key = SpectrumCache::spectrum_key(model, HalfInt(1));
  CHECK_FALSE(cache.load_spectrum(key).has_value());
  cache.store(key, sys.spectrum(HalfInt(1)));
  const auto back = cache.load_spectrum(key);
  REQUIRE(back.has_value());
  CHECK(back->eigenvalues == sys.spectrum(HalfInt(1)).eigenvalues);
  CHECK(back->eigenvectors == sys.spectrum(HalfInt(1)).eigenvectors);
  CHECK(back->s == HalfInt(1));

  ModelSpec altered = model;
  altered.offset = 0.31;
  CHECK_FALSE(cache.load_spectrum(SpectrumCache::spectrum_key(altered, HalfInt(1))).has_value());

  // A file renamed to another key is a miss, as is a truncated file.
  std::filesystem::copy_file(cache.spectrum_path(key), cache.spectrum_path(key + 1));
  CHECK_FALSE(cache.load_spectrum(key + 1).has_value());
  std::filesystem::resize_file(cache.spectrum_path(key + 1), 40);
  CHECK_FALSE(cache.load_spectrum(key + 1).has_value());

  const auto t = reduced_elements(builtin_tensor_op("T10", 4), sys, HalfInt(1), HalfInt(1));
  const auto tkey = SpectrumCache::table_key(model, builtin_tensor_op("T10", 4), HalfInt(1), HalfInt(1));
  cache.store(tkey, t);
  const auto tb = cache.load_table(tkey);
  REQUIRE(tb.has_value());
  CHECK(tb->elements == t.elements);
  CHECK(tb->choice.m_col == t.choice.m_col);
  CHECK(tb->choice.cg == t.choice.cg);
  std::filesystem::remove_all(dir);
}

TEST_CASE("concurrent identical stores leave one valid file") {
  const auto dir = scratch("concurrent");
  const SpectrumCache cache(dir);
  const auto model = chain(8);
  const auto sys = Eigensystem::compute(model);
  const auto key = SpectrumCache::spectrum_key(model, HalfInt(1));
  std::vector<std::thread> pool;
  for (int i = 0; i < 6; ++i) pool.emplace_back([&] { cache.store(key, sys.spectrum(HalfInt(1))); });
  for (auto& t : pool) t.join();
  int files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) files += entry.is_regular_file();
  CHECK(files == 1);
  const auto back = cache.load_spectrum(key);
  REQUIRE(back.has_value());
  CHECK(back->eigenvectors == sys.spectrum(HalfInt(1)).eigenvectors);
  std::filesystem::remove_all(dir);
}

TEST_CASE("Eigensystem reuses cached spectra") {
  const auto dir = scratch("reuse");
  Eigensystem::Options options;
  options.cache_dir = dir;
  const auto first = Eigensystem::compute(chain(6), options);
  CHECK(first.diagonalizations() == 4);
  const auto second = Eigensystem::compute(chain(6), options);
  CHECK(second.diagonalizations() == 0);
  for (HalfInt s : first.spins()) CHECK(first.spectrum(s).eigenvectors == second.spectrum(s).eigenvectors);
  std::filesystem::remove_all(dir);
}
