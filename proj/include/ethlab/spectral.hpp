#pragma once

#include "ethlab/coupled_basis.hpp"
#include "ethlab/half_int.hpp"
#include "ethlab/model.hpp"
#include "ethlab/pauli_operator.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace ethlab {

class SpectrumCache;

/// Eigenpairs of the Hamiltonian restricted to one total-spin block, in the
/// multiplicity (coupling-path) basis. Columns of `eigenvectors` are sign
/// fixed: the largest-magnitude coefficient is positive.
struct BlockSpectrum {
  int num_qubits = 0;
  HalfInt s;
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // multiplicity x multiplicity
  std::uint64_t model_fingerprint = 0;

  Eigen::Index dim() const { return eigenvalues.size(); }
};

/// d x d matrix <s,m,n|H|s,m,n'> over the coupling paths of spin s.
Eigen::MatrixXd block_matrix(const PauliStringOperator& hamiltonian, HalfInt s, HalfInt m);

/// Dense symmetric eigensolve with deterministic ordering and signs. Throws
/// std::domain_error on non-finite input.
BlockSpectrum diagonalize_block(const Eigen::Ref<const Eigen::MatrixXd>& block);

/// Which (m_row, m_col, q) a reduced table was divided out at.
struct MChoice {
  HalfInt m_row, m_col, q;
  double cg = 0.0;  // <s_row, m_row | s_col, m_col; k, q>
};

/// <alpha||T^(k)||alpha'> for every alpha in spin s_row and alpha' in s_col.
struct ReducedElementTable {
  HalfInt s_row, s_col, rank, component;
  bool present = false;  // false when |s_row - s_col| > k
  Eigen::MatrixXd elements;
  MChoice choice;
  std::uint64_t operator_fingerprint = 0;
  std::uint64_t model_fingerprint = 0;
};

/// Spin blocks of one chain: cached spectra plus lazily built eigenvectors in
/// the computational basis of any S_z sector. Thread-safe for concurrent reads.
class Eigensystem {
public:
  struct Options {
    int threads = 1;
    std::optional<std::filesystem::path> cache_dir;
    /// Restrict to these spins; empty means all.
    std::vector<HalfInt> spins;
  };

  static Eigensystem compute(const ModelSpec& model, const Options& options);
  static Eigensystem compute(const ModelSpec& model) { return compute(model, Options{}); }

  const ModelSpec& model() const { return model_; }
  int num_qubits() const { return model_.num_qubits; }
  const PauliStringOperator& hamiltonian() const { return hamiltonian_; }
  std::vector<HalfInt> spins() const;
  bool has(HalfInt s) const { return spectra_.count(s) > 0; }
  const BlockSpectrum& spectrum(HalfInt s) const;
  /// Number of blocks diagonalized (as opposed to loaded from cache).
  int diagonalizations() const { return diagonalizations_; }

  /// Columns are |alpha, m> for alpha in the spin-s block, rows follow
  /// sector_index(N).states(m).
  std::shared_ptr<const Eigen::MatrixXd> eigenstates(HalfInt s, HalfInt m) const;
  void release_eigenstates() const;

  /// Replaces a block's eigenvectors (e.g. flipped signs); drops cached states.
  void replace_spectrum(BlockSpectrum spectrum);

private:
  ModelSpec model_;
  PauliStringOperator hamiltonian_;
  std::map<HalfInt, BlockSpectrum> spectra_;
  int diagonalizations_ = 0;
  mutable std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
  mutable std::map<std::pair<HalfInt, HalfInt>, std::shared_ptr<const Eigen::MatrixXd>> states_;
};

struct StateLabel {
  Eigen::Index alpha;
  HalfInt s, m;
};

/// <alpha, m| T |alpha', m'>; exactly 0 unless m = m' + q.
double matrix_element(const TensorOpSpec& op, const Eigensystem& system, const StateLabel& bra,
                      const StateLabel& ket);

/// Reduced elements with the default m choice: m_col = 0 (or 1/2), m_row =
/// m_col + q, falling back through m_col = 1, -1, 2, ... until the
/// Clebsch–Gordan divisor is nonzero. Absent table when the triangle rule fails.
ReducedElementTable reduced_elements(const TensorOpSpec& op, const Eigensystem& system, HalfInt s_row,
                                     HalfInt s_col);

/// Reduced elements divided out at a prescribed m_col (m_row = m_col + q).
/// Throws std::domain_error if the divisor vanishes there.
ReducedElementTable reduced_elements_at(const TensorOpSpec& op, const Eigensystem& system, HalfInt s_row,
                                        HalfInt s_col, HalfInt m_col);

/// Every admissible m_col for the pair, in the default scan order.
std::vector<HalfInt> admissible_m_cols(HalfInt s_row, HalfInt s_col, HalfInt k, HalfInt q);

/// Union over spins of block eigenvalues, each repeated 2s+1 times, sorted.
Eigen::VectorXd full_spectrum(const Eigensystem& system);

/// Extremal eigenvalues of H in the S_z = m sector by Lanczos with full
/// reorthogonalization; used for bandwidth checks where dense blocks are too big.
std::pair<double, double> extremal_eigenvalues(const PauliStringOperator& hamiltonian, HalfInt m,
                                               int max_iterations = 300, double tolerance = 1e-10);

}  // namespace ethlab
