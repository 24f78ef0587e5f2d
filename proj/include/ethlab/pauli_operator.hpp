#pragma once

#include "ethlab/coupled_basis.hpp"
#include "ethlab/half_int.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace ethlab {

using Complex = std::complex<double>;

/// Single-qubit factor. Plus = |up><down| and Minus = |down><up|, so the
/// spin-unit ladder operators are S_+ = sum_j Plus_j and S_- = sum_j Minus_j.
enum class PauliLetter : std::uint8_t { I, X, Y, Z, Plus, Minus };

char to_char(PauliLetter letter);
PauliLetter letter_from_char(char c);

struct PauliTerm {
  Complex coefficient{1.0, 0.0};
  /// (1-based site, letter), ascending in site, identities omitted.
  std::vector<std::pair<int, PauliLetter>> factors;

  /// Change of total S_z (in units of 1/2, i.e. twice the change) for terms
  /// built from Z, Plus and Minus only; nullopt when X or Y appears.
  std::optional<int> twice_delta_m() const;
};

/// Sparse operator on N qubits written as a sum of weighted Pauli-type strings.
class PauliStringOperator {
public:
  PauliStringOperator() = default;
  explicit PauliStringOperator(int num_qubits) : num_qubits_(num_qubits) {}

  /// coefficient * prod_i letter_i acting on site_i (1-based).
  static PauliStringOperator single(int num_qubits, Complex coefficient,
                                    std::vector<std::pair<int, PauliLetter>> factors);
  static PauliStringOperator identity(int num_qubits, Complex coefficient = 1.0);

  int num_qubits() const { return num_qubits_; }
  const std::vector<PauliTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  void add_term(Complex coefficient, std::vector<std::pair<int, PauliLetter>> factors);

  PauliStringOperator& operator+=(const PauliStringOperator& other);
  PauliStringOperator& operator-=(const PauliStringOperator& other);
  PauliStringOperator& operator*=(Complex scale);
  friend PauliStringOperator operator+(PauliStringOperator a, const PauliStringOperator& b) { return a += b; }
  friend PauliStringOperator operator-(PauliStringOperator a, const PauliStringOperator& b) { return a -= b; }
  friend PauliStringOperator operator*(PauliStringOperator a, Complex s) { return a *= s; }
  friend PauliStringOperator operator*(Complex s, PauliStringOperator a) { return a *= s; }
  /// Operator product (a then b acting to the left: a * b |psi> = a (b |psi>)).
  friend PauliStringOperator operator*(const PauliStringOperator& a, const PauliStringOperator& b);

  /// Merged duplicates, dropped zero terms, canonical term order; single-site
  /// products rewritten in the {Z, Plus, Minus} basis.
  PauliStringOperator simplified(double tolerance = 1e-14) const;
  PauliStringOperator adjoint() const;
  bool is_hermitian(double tolerance = 1e-12) const;
  /// True if every coefficient and letter keeps a real matrix representation.
  bool is_real(double tolerance = 0.0) const;
  /// Common S_z shift of all terms (twice units), if there is one.
  std::optional<int> twice_delta_m() const;

  /// Full 2^N matrix. Real Scalar throws if an imaginary entry appears.
  template <typename Scalar>
  Eigen::SparseMatrix<Scalar> to_sparse() const;

  /// Block mapping the S_z = m_col sector to the S_z = m_row sector, indexed
  /// by sector_index(N). Entries landing outside the row sector are dropped.
  template <typename Scalar>
  Eigen::SparseMatrix<Scalar> to_sparse(HalfInt m_col, HalfInt m_row) const;

  template <typename Scalar>
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> to_dense() const {
    return Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>(to_sparse<Scalar>());
  }

  /// Applies one term to a basis state; returns the image state and factor,
  /// or nullopt when the term annihilates it.
  std::optional<std::pair<Bitstring, Complex>> apply(const PauliTerm& term, Bitstring state) const;

  std::string str() const;

private:
  using Triplets = std::vector<std::pair<std::pair<std::int64_t, std::int64_t>, Complex>>;
  Triplets full_entries() const;
  Triplets sector_entries(HalfInt m_col, HalfInt m_row) const;

  int num_qubits_ = 0;
  std::vector<PauliTerm> terms_;
};

/// S_z = (1/2) sum_j Z_j.
PauliStringOperator total_spin_z(int num_qubits);
/// S_+ = sum_j Plus_j.
PauliStringOperator total_spin_raise(int num_qubits);
/// S_- = sum_j Minus_j.
PauliStringOperator total_spin_lower(int num_qubits);
/// sigma^tot_a = sum_j sigma_a^(j), a in {X, Y, Z}.
PauliStringOperator total_pauli(int num_qubits, PauliLetter a);
/// S^2 = S_- S_+ + S_z^2 + S_z.
PauliStringOperator total_spin_squared(int num_qubits);

// ---------------------------------------------------------------------------

namespace detail {
template <typename Scalar>
Scalar narrow_scalar(Complex value) {
  if constexpr (std::is_same_v<Scalar, Complex>) {
    return value;
  } else {
    if (value.imag() != 0.0) {
      throw std::domain_error("PauliStringOperator: imaginary entry in a real materialization");
    }
    return static_cast<Scalar>(value.real());
  }
}

template <typename Scalar, typename Entries>
Eigen::SparseMatrix<Scalar> assemble(Eigen::Index rows, Eigen::Index cols, const Entries& entries) {
  std::vector<Eigen::Triplet<Scalar>> triplets;
  triplets.reserve(entries.size());
  for (const auto& [rc, value] : entries) {
    triplets.emplace_back(static_cast<Eigen::Index>(rc.first), static_cast<Eigen::Index>(rc.second),
                          narrow_scalar<Scalar>(value));
  }
  Eigen::SparseMatrix<Scalar> m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.prune(Scalar(0));
  return m;
}
}  // namespace detail

template <typename Scalar>
Eigen::SparseMatrix<Scalar> PauliStringOperator::to_sparse() const {
  const auto dim = static_cast<Eigen::Index>(Bitstring{1} << num_qubits_);
  return detail::assemble<Scalar>(dim, dim, full_entries());
}

template <typename Scalar>
Eigen::SparseMatrix<Scalar> PauliStringOperator::to_sparse(HalfInt m_col, HalfInt m_row) const {
  const auto& index = sector_index(num_qubits_);
  return detail::assemble<Scalar>(static_cast<Eigen::Index>(index.states(m_row).size()),
                                  static_cast<Eigen::Index>(index.states(m_col).size()),
                                  sector_entries(m_col, m_row));
}

}  // namespace ethlab
