#pragma once

#include "ethlab/half_int.hpp"
#include "ethlab/pauli_operator.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace ethlab {

enum class Boundary { Open, Periodic };

/// Next-nearest-neighbor Heisenberg chain
///   H = sum_j J_j s_j . s_{j+1} + sum_j J'_j s_j . s_{j+2}   (Pauli units)
/// with J_j = base + offset * delta_{j, offset_site} on both bond families
/// unless explicit per-bond couplings are supplied.
struct ModelSpec {
  int num_qubits = 12;
  Boundary boundary = Boundary::Open;
  double nn_base = 1.0;
  double nnn_base = 1.0;
  int offset_site = 3;
  double offset = 0.3;
  /// Optional per-bond overrides, indexed j - 1.
  std::vector<double> nn_couplings;
  std::vector<double> nnn_couplings;

  /// Uniform J = 1 ring.
  static ModelSpec periodic(int num_qubits);

  int nn_bond_count() const;
  int nnn_bond_count() const;
  double nn_coupling(int bond) const;
  double nnn_coupling(int bond) const;

  nlohmann::json to_json() const;
  static ModelSpec from_json(const nlohmann::json& j);
  /// Content hash of the canonical JSON form.
  std::uint64_t fingerprint() const;
};

/// Throws std::domain_error for N < 2.
PauliStringOperator build_hamiltonian(const ModelSpec& spec);

/// One component T^(k)_q of a spherical tensor operator.
struct TensorOpSpec {
  std::string name;
  HalfInt rank;
  HalfInt component;
  PauliStringOperator op;
  int anchor_site = 1;

  int num_qubits() const { return op.num_qubits(); }
  nlohmann::json to_json() const;
  static TensorOpSpec from_json(const nlohmann::json& j, int num_qubits);
  std::uint64_t fingerprint() const;
};

/// All components q = -k..k of one tensor operator.
struct SphericalTensor {
  std::string name;
  HalfInt rank;
  std::vector<PauliStringOperator> components;  // index q + k
  int anchor_site = 1;

  TensorOpSpec component(HalfInt q) const;
};

/// Middle site ceil(N/2).
int anchor_site(int num_qubits);

/// Spin vector of one site as a rank-1 tensor: T_{+1} = -S_+/sqrt2,
/// T_0 = S_z, T_{-1} = S_-/sqrt2.
SphericalTensor site_vector(int num_qubits, int site);

/// Builtins anchored at ceil(N/2): "T10" = S_z, "T11" = -sigma_+/sqrt2,
/// "T20" = (zz - (+-) - (-+))/sqrt24 on (c, c+1), "T22" = (1/2)(++) on (c, c+1).
/// Throws std::invalid_argument for an unknown name.
TensorOpSpec builtin_tensor_op(const std::string& name, int num_qubits);

/// Full family containing a builtin: "T1" (single site) or "T2" (two sites),
/// also accepted as any builtin component name.
SphericalTensor builtin_tensor_family(const std::string& name, int num_qubits);

/// T^(k)_q = sum_q' <k,q|k1,q';k2,q-q'> A_q' B_(q-q'). Throws
/// std::invalid_argument if k violates the triangle rule with (k1, k2) or |q| > k.
TensorOpSpec compose_tensor(const SphericalTensor& a, const SphericalTensor& b, HalfInt k, HalfInt q);
SphericalTensor compose_family(const SphericalTensor& a, const SphericalTensor& b, HalfInt k);

nlohmann::json operator_to_json(const PauliStringOperator& op);
PauliStringOperator operator_from_json(const nlohmann::json& j, int num_qubits);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace ethlab
