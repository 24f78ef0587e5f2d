#pragma once

#include "ethlab/half_int.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace ethlab {

/// Computational basis state of an N-qubit chain. Qubit j (1-based) sits at
/// bit N - j, so integer order equals lexicographic order of the bitstring
/// read from qubit 1. A set bit is a down spin.
using Bitstring = std::uint64_t;

/// Sequence of intermediate total spins s_1 = 1/2, s_2, ..., s_N = s obtained
/// by adding one spin-1/2 at a time.
struct CouplingPath {
  std::vector<HalfInt> spins;

  int num_qubits() const { return static_cast<int>(spins.size()); }
  HalfInt final_spin() const { return spins.back(); }
  bool valid() const;
  friend bool operator==(const CouplingPath&, const CouplingPath&) = default;
  friend auto operator<=>(const CouplingPath&, const CouplingPath&) = default;
};

struct CoupledBasisVector {
  HalfInt s, m;
  CouplingPath path;
  /// Nonzero amplitudes, ascending in bitstring.
  std::vector<std::pair<Bitstring, double>> amplitudes;
};

struct SectorLayout {
  int num_qubits = 0;
  std::map<HalfInt, std::uint64_t> multiplicity;  // s -> d(N, s)
};

/// Number of spin-s multiplets of N spin-1/2 sites; 0 for a parity mismatch or
/// s outside [0, N/2].
std::uint64_t multiplicity(int num_qubits, HalfInt s);

SectorLayout sector_layout(int num_qubits);

/// All coupling paths ending at s, lexicographic in the intermediate spins.
std::vector<CouplingPath> enumerate_paths(int num_qubits, HalfInt s);

/// |s, m, path> expanded in the computational basis by chaining
/// Clebsch–Gordan coefficients along the path. The global sign of each path
/// is fixed at m = s (first nonzero amplitude positive) and carried to all m,
/// so the lowering operator maps |s,m,path> to a positive multiple of
/// |s,m-1,path>.
CoupledBasisVector build_basis_vector(const CouplingPath& path, HalfInt m);

/// Hamming weight of the S_z = m sector.
int sector_weight(int num_qubits, HalfInt m);

/// Ordered computational states of each fixed-magnetization sector, with an
/// inverse rank table. Shared, immutable, one per N.
class SectorIndex {
public:
  explicit SectorIndex(int num_qubits);

  int num_qubits() const { return num_qubits_; }
  const std::vector<Bitstring>& states(HalfInt m) const;
  const std::vector<Bitstring>& states_with_weight(int weight) const { return by_weight_.at(weight); }
  std::int32_t rank(Bitstring b) const { return rank_[b]; }

private:
  int num_qubits_;
  std::vector<std::vector<Bitstring>> by_weight_;
  std::vector<std::int32_t> rank_;
};

const SectorIndex& sector_index(int num_qubits);

/// Columns are |s, m, path> for every path from enumerate_paths(N, s), rows
/// follow sector_index(N).states(m).
Eigen::MatrixXd sector_basis(int num_qubits, HalfInt s, HalfInt m);

}  // namespace ethlab
