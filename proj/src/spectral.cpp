#include "ethlab/spectral.hpp"

#include "ethlab/parallel.hpp"
#include "ethlab/spectrum_cache.hpp"
#include "ethlab/spin_algebra.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace ethlab {

Eigen::MatrixXd block_matrix(const PauliStringOperator& hamiltonian, HalfInt s, HalfInt m) {
  const Eigen::MatrixXd basis = sector_basis(hamiltonian.num_qubits(), s, m);
  const Eigen::SparseMatrix<double> h = hamiltonian.to_sparse<double>(m, m);
  Eigen::MatrixXd hv = h * basis;
  Eigen::MatrixXd block = basis.transpose() * hv;
  // Exact symmetry; the two triangles differ only by rounding.
  return 0.5 * (block + block.transpose());
}

BlockSpectrum diagonalize_block(const Eigen::Ref<const Eigen::MatrixXd>& block) {
  if (block.rows() != block.cols()) throw std::invalid_argument("diagonalize_block: matrix is not square");
  if (!block.allFinite()) throw std::domain_error("diagonalize_block: non-finite entries");
  BlockSpectrum out;
  if (block.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(block);
  if (solver.info() != Eigen::Success) throw std::runtime_error("diagonalize_block: eigensolver failed");
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();
  for (Eigen::Index c = 0; c < out.eigenvectors.cols(); ++c) {
    Eigen::Index pivot = 0;
    out.eigenvectors.col(c).cwiseAbs().maxCoeff(&pivot);
    if (out.eigenvectors(pivot, c) < 0.0) out.eigenvectors.col(c) *= -1.0;
  }
  return out;
}

// --- Eigensystem ---------------------------------------------------------------

Eigensystem Eigensystem::compute(const ModelSpec& model, const Options& options) {
  Eigensystem sys;
  sys.model_ = model;
  sys.hamiltonian_ = build_hamiltonian(model);
  const int n = model.num_qubits;

  std::vector<HalfInt> spins = options.spins;
  if (spins.empty()) {
    for (const auto& [s, d] : sector_layout(n).multiplicity) spins.push_back(s);
  }
  std::sort(spins.begin(), spins.end());
  spins.erase(std::unique(spins.begin(), spins.end()), spins.end());
  for (HalfInt s : spins) {
    if (multiplicity(n, s) == 0) throw std::domain_error("Eigensystem: no spin-" + s.str() + " states for N = " + std::to_string(n));
  }

  std::optional<SpectrumCache> cache;
  if (options.cache_dir) cache.emplace(*options.cache_dir);

  std::vector<BlockSpectrum> blocks(spins.size());
  std::vector<char> computed(spins.size(), 0);
  parallel_for(spins.size(), options.threads, [&](std::size_t i) {
    const HalfInt s = spins[i];
    const auto key = SpectrumCache::spectrum_key(model, s);
    if (cache) {
      if (auto hit = cache->load_spectrum(key)) {
        blocks[i] = std::move(*hit);
        return;
      }
    }
    BlockSpectrum b = diagonalize_block(block_matrix(sys.hamiltonian_, s, s));
    b.num_qubits = n;
    b.s = s;
    b.model_fingerprint = model.fingerprint();
    if (cache) cache->store(key, b);
    blocks[i] = std::move(b);
    computed[i] = 1;
  });
  for (std::size_t i = 0; i < spins.size(); ++i) {
    sys.diagonalizations_ += computed[i];
    sys.spectra_.emplace(spins[i], std::move(blocks[i]));
  }
  return sys;
}

std::vector<HalfInt> Eigensystem::spins() const {
  std::vector<HalfInt> out;
  for (const auto& [s, b] : spectra_) out.push_back(s);
  return out;
}

const BlockSpectrum& Eigensystem::spectrum(HalfInt s) const {
  auto it = spectra_.find(s);
  if (it == spectra_.end()) throw std::out_of_range("Eigensystem: spin " + s.str() + " not computed");
  return it->second;
}

std::shared_ptr<const Eigen::MatrixXd> Eigensystem::eigenstates(HalfInt s, HalfInt m) const {
  const auto& spec = spectrum(s);
  if (!valid_projection(s, m)) throw std::domain_error("eigenstates: |m| exceeds s");
  {
    std::lock_guard lock(*mutex_);
    if (auto it = states_.find({s, m}); it != states_.end()) return it->second;
  }
  auto states = std::make_shared<Eigen::MatrixXd>(sector_basis(num_qubits(), s, m) * spec.eigenvectors);
  std::lock_guard lock(*mutex_);
  auto [it, inserted] = states_.emplace(std::pair{s, m}, std::move(states));
  return it->second;
}

void Eigensystem::release_eigenstates() const {
  std::lock_guard lock(*mutex_);
  states_.clear();
}

void Eigensystem::replace_spectrum(BlockSpectrum spectrum) {
  std::lock_guard lock(*mutex_);
  std::erase_if(states_, [&](const auto& kv) { return kv.first.first == spectrum.s; });
  spectra_[spectrum.s] = std::move(spectrum);
}

// --- matrix elements ------------------------------------------------------------

double matrix_element(const TensorOpSpec& op, const Eigensystem& system, const StateLabel& bra,
                      const StateLabel& ket) {
  if (bra.m != ket.m + op.component) return 0.0;
  const auto psi_bra = system.eigenstates(bra.s, bra.m);
  const auto psi_ket = system.eigenstates(ket.s, ket.m);
  const Eigen::SparseMatrix<double> t = op.op.to_sparse<double>(ket.m, bra.m);
  const Eigen::VectorXd image = t * psi_ket->col(ket.alpha);
  return psi_bra->col(bra.alpha).dot(image);
}

std::vector<HalfInt> admissible_m_cols(HalfInt s_row, HalfInt s_col, HalfInt k, HalfInt q) {
  std::vector<HalfInt> out;
  if (!triangle(s_col, k, s_row) || !valid_projection(k, q)) return out;
  const int start = s_col.is_integer() ? 0 : 1;
  auto consider = [&](HalfInt m_col) {
    if (!valid_projection(s_col, m_col) || !valid_projection(s_row, m_col + q)) return;
    if (cg_exact(s_col, m_col, k, q, s_row, m_col + q) != 0.0) out.push_back(m_col);
  };
  for (int t = start; t <= s_col.twice(); t += 2) {
    consider(HalfInt::from_twice(t));
    if (t != 0) consider(HalfInt::from_twice(-t));
  }
  return out;
}

ReducedElementTable reduced_elements_at(const TensorOpSpec& op, const Eigensystem& system, HalfInt s_row,
                                        HalfInt s_col, HalfInt m_col) {
  ReducedElementTable table;
  table.s_row = s_row;
  table.s_col = s_col;
  table.rank = op.rank;
  table.component = op.component;
  table.operator_fingerprint = op.fingerprint();
  table.model_fingerprint = system.model().fingerprint();
  if (!triangle(s_col, op.rank, s_row)) return table;

  const HalfInt m_row = m_col + op.component;
  if (!valid_projection(s_col, m_col) || !valid_projection(s_row, m_row)) {
    throw std::domain_error("reduced_elements_at: m_col = " + m_col.str() + " inadmissible");
  }
  const double cg = cg_exact(s_col, m_col, op.rank, op.component, s_row, m_row);
  if (cg == 0.0) {
    throw std::domain_error("reduced_elements_at: vanishing Clebsch-Gordan divisor at m_col = " + m_col.str());
  }
  const auto psi_row = system.eigenstates(s_row, m_row);
  const auto psi_col = system.eigenstates(s_col, m_col);
  const Eigen::SparseMatrix<double> t = op.op.to_sparse<double>(m_col, m_row);
  const Eigen::MatrixXd image = t * (*psi_col);
  table.elements = (psi_row->transpose() * image) / cg;
  table.present = true;
  table.choice = MChoice{m_row, m_col, op.component, cg};
  return table;
}

ReducedElementTable reduced_elements(const TensorOpSpec& op, const Eigensystem& system, HalfInt s_row,
                                     HalfInt s_col) {
  if (!triangle(s_col, op.rank, s_row)) {
    ReducedElementTable absent;
    absent.s_row = s_row;
    absent.s_col = s_col;
    absent.rank = op.rank;
    absent.component = op.component;
    absent.operator_fingerprint = op.fingerprint();
    absent.model_fingerprint = system.model().fingerprint();
    return absent;
  }
  const auto candidates = admissible_m_cols(s_row, s_col, op.rank, op.component);
  if (candidates.empty()) {
    throw std::logic_error("reduced_elements: no admissible m choice although the triangle rule holds");
  }
  return reduced_elements_at(op, system, s_row, s_col, candidates.front());
}

Eigen::VectorXd full_spectrum(const Eigensystem& system) {
  std::vector<double> values;
  for (HalfInt s : system.spins()) {
    const auto& e = system.spectrum(s).eigenvalues;
    for (int rep = 0; rep < s.twice() + 1; ++rep) values.insert(values.end(), e.data(), e.data() + e.size());
  }
  std::sort(values.begin(), values.end());
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::pair<double, double> extremal_eigenvalues(const PauliStringOperator& hamiltonian, HalfInt m,
                                               int max_iterations, double tolerance) {
  const Eigen::SparseMatrix<double> h = hamiltonian.to_sparse<double>(m, m);
  const Eigen::Index dim = h.rows();
  if (dim <= 64) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver{Eigen::MatrixXd(h)};
    return {solver.eigenvalues()(0), solver.eigenvalues()(dim - 1)};
  }
  const int steps = static_cast<int>(std::min<Eigen::Index>(max_iterations, dim));
  Eigen::MatrixXd q(dim, steps + 1);
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = uniform(rng);
  q.col(0) = v.normalized();
  std::vector<double> alpha, beta;
  double lo_prev = 0.0, hi_prev = 0.0;
  for (int j = 0; j < steps; ++j) {
    Eigen::VectorXd w = h * q.col(j);
    alpha.push_back(q.col(j).dot(w));
    // Full reorthogonalization, twice.
    for (int pass = 0; pass < 2; ++pass) {
      w -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * w);
    }
    const double b = w.norm();
    const int size = j + 1;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(size, size);
    for (int i = 0; i < size; ++i) {
      t(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < size) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(t, Eigen::EigenvaluesOnly);
    const double lo = ritz.eigenvalues()(0), hi = ritz.eigenvalues()(size - 1);
    const bool converged = j > 10 && std::abs(lo - lo_prev) < tolerance && std::abs(hi - hi_prev) < tolerance;
    lo_prev = lo;
    hi_prev = hi;
    if (converged || b < 1e-12) break;
    beta.push_back(b);
    q.col(j + 1) = w / b;
  }
  return {lo_prev, hi_prev};
}

}  // namespace ethlab
