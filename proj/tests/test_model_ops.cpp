#include "ethlab/model.hpp"
#include "ethlab/pauli_operator.hpp"
#include "ethlab/spin_algebra.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace ethlab;

namespace {

Eigen::VectorXd eigenvalues(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues();
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Eigen::MatrixXd dense(const PauliStringOperator& op) { return op.to_dense<double>(); }

}  // namespace

TEST_CASE("Pauli operator algebra") {
  const auto x = PauliStringOperator::single(1, 1.0, {{1, PauliLetter::X}});
  const auto y = PauliStringOperator::single(1, 1.0, {{1, PauliLetter::Y}});
  const auto z = PauliStringOperator::single(1, 1.0, {{1, PauliLetter::Z}});
  const auto xy = (x * y).simplified();
  CHECK((xy.to_dense<Complex>() - Complex(0, 1) * z.to_dense<Complex>()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(x.is_hermitian());
  const auto plus = PauliStringOperator::single(2, 1.0, {{1, PauliLetter::Plus}});
  CHECK_FALSE(plus.is_hermitian());
  CHECK(plus.twice_delta_m() == 2);
  CHECK(max_abs(dense(plus.adjoint()) - dense(plus).transpose()) == 0.0);
  CHECK_THROWS(y.to_sparse<double>());
  CHECK_THROWS_AS(PauliStringOperator::single(2, 1.0, {{3, PauliLetter::Z}}), std::out_of_range);
  CHECK(max_abs(dense(PauliStringOperator::single(3, 1.0, {{2, PauliLetter::Minus}, {3, PauliLetter::Z}})) -
                oracle::string_op(3, {{2, '-'}, {3, 'z'}}).real()) == 0.0);
}

TEST_CASE("sector-restricted materialization matches the dense restriction") {
  const int n = 6;
  const auto op = builtin_tensor_op("T11", n).op + builtin_tensor_op("T10", n).op;
  const Eigen::MatrixXd full = dense(op);
  for (HalfInt m : {HalfInt(0), HalfInt(1), HalfInt(-2)}) {
    for (HalfInt mr : {m, m + HalfInt(1)}) {
      if (abs(mr) > HalfInt(3)) continue;
      const Eigen::MatrixXd block = Eigen::MatrixXd(op.to_sparse<double>(m, mr));
      CHECK(max_abs(block - oracle::restrict(full, oracle::sector_states(n, mr), oracle::sector_states(n, m))) == 0.0);
    }
  }
}

TEST_CASE("build_hamiltonian examples") {
  ModelSpec two;
  two.num_qubits = 2;
  const Eigen::VectorXd e2 = eigenvalues(dense(build_hamiltonian(two)));
  CHECK(e2(0) == doctest::Approx(-3.0));
  for (int i = 1; i < 4; ++i) CHECK(e2(i) == doctest::Approx(1.0));

  ModelSpec three;
  three.num_qubits = 3;
  const Eigen::VectorXd e3 = eigenvalues(dense(build_hamiltonian(three)));
  for (int i = 0; i < 4; ++i) CHECK(e3(i) == doctest::Approx(-3.0));
  for (int i = 4; i < 8; ++i) CHECK(e3(i) == doctest::Approx(3.0));

  ModelSpec one;
  one.num_qubits = 1;
  CHECK_THROWS_AS(build_hamiltonian(one), std::domain_error);
  CHECK_THROWS_AS(build_hamiltonian(ModelSpec::periodic(2)), std::domain_error);
}

TEST_CASE("Hamiltonian matches the Kronecker-product oracle, is Hermitian and traceless") {
  for (int n = 2; n <= 9; ++n) {
    for (auto model : {ModelSpec{}, ModelSpec::periodic(std::max(n, 3))}) {
      model.num_qubits = model.boundary == Boundary::Periodic ? std::max(n, 3) : n;
      const Eigen::MatrixXd h = dense(build_hamiltonian(model));
      CHECK(max_abs(h - oracle::heisenberg(model)) < 1e-13);
      CHECK(max_abs(h - h.transpose()) == 0.0);
      CHECK(std::abs(h.trace()) < 1e-10);
    }
  }
  ModelSpec m;
  CHECK(m.nn_coupling(3) == doctest::Approx(1.3));
  CHECK(m.nnn_coupling(3) == doctest::Approx(1.3));
  CHECK(m.nn_coupling(2) == 1.0);
}

TEST_CASE("charge conservation") {
  for (int n = 2; n <= 10; n += 2) {
    ModelSpec model;
    model.num_qubits = n;
    const auto h = build_hamiltonian(model);
    for (PauliLetter a : {PauliLetter::X, PauliLetter::Z}) {
      const auto sigma = total_pauli(n, a);
      const Eigen::SparseMatrix<double> hs = h.to_sparse<double>(), ss = sigma.to_sparse<double>();
      const Eigen::SparseMatrix<double> comm = hs * ss - ss * hs;
      CHECK((comm.size() == 0 || Eigen::MatrixXd(comm).cwiseAbs().maxCoeff() <= 1e-12));
    }
    const auto sy = total_pauli(n, PauliLetter::Y);
    const Eigen::SparseMatrix<Complex> hc = h.to_sparse<Complex>(), yc = sy.to_sparse<Complex>();
    CHECK(Eigen::MatrixXcd(hc * yc - yc * hc).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("builtin tensor operators") {
  CHECK(builtin_tensor_op("T10", 2).op.str() == PauliStringOperator::single(2, 0.5, {{1, PauliLetter::Z}}).str());
  CHECK(builtin_tensor_op("T22", 4).op.str() ==
        PauliStringOperator::single(4, 0.5, {{2, PauliLetter::Plus}, {3, PauliLetter::Plus}}).str());
  const Eigen::MatrixXd t10 = dense(builtin_tensor_op("T10", 5).op);
  CHECK(max_abs(t10 - Eigen::MatrixXd(t10.diagonal().asDiagonal())) == 0.0);
  for (const char* name : {"T10", "T11", "T20", "T22"}) {
    for (int n : {2, 5}) CHECK(max_abs(dense(builtin_tensor_op(name, n).op) - oracle::tensor_op(name, n)) < 1e-15);
  }
  CHECK_THROWS_AS(builtin_tensor_op("T33", 4), std::invalid_argument);
  CHECK(builtin_tensor_op("T20", 4).op.is_hermitian());
  CHECK_FALSE(builtin_tensor_op("T11", 4).op.is_hermitian());
}

TEST_CASE("compose_tensor") {
  const auto s = site_vector(3, 2);
  // [S x S]^0 = -(S.S)/sqrt(3) = -(3/4)/sqrt(3) on a spin-1/2 site.
  const auto scalar = compose_tensor(s, s, HalfInt(0), HalfInt(0));
  const Eigen::MatrixXd expected = -(0.75 / std::sqrt(3.0)) * Eigen::MatrixXd::Identity(8, 8);
  CHECK(max_abs(dense(scalar.op) - expected) < 1e-14);
  CHECK_THROWS_AS(compose_tensor(s, s, HalfInt(3), HalfInt(0)), std::invalid_argument);
  CHECK_THROWS_AS(compose_tensor(s, s, HalfInt(1), HalfInt(2)), std::invalid_argument);
  const auto t2 = builtin_tensor_family("T2", 4);
  CHECK(max_abs(dense(t2.component(HalfInt(0)).op) - oracle::tensor_op("T20", 4)) < 1e-14);
  CHECK(max_abs(dense(t2.component(HalfInt(2)).op) - oracle::tensor_op("T22", 4)) < 1e-14);
}

TEST_CASE("spherical tensor commutators for builtin and composed families") {
  for (int n : {2, 4, 6, 8}) {
    const Eigen::SparseMatrix<double> sz = total_spin_z(n).to_sparse<double>();
    const Eigen::SparseMatrix<double> sp = total_spin_raise(n).to_sparse<double>();
    const Eigen::SparseMatrix<double> sm = total_spin_lower(n).to_sparse<double>();
    std::vector<SphericalTensor> families{builtin_tensor_family("T1", n), builtin_tensor_family("T2", n)};
    const auto a = site_vector(n, 1), b = site_vector(n, n);
    for (int k = 0; k <= 2; ++k) families.push_back(compose_family(a, b, HalfInt(k)));
    families.push_back(compose_family(builtin_tensor_family("T2", n), a, HalfInt(3)));
    double worst = 0.0;
    for (const auto& fam : families) {
      const double k = fam.rank.value();
      for (HalfInt q = -fam.rank; q <= fam.rank; q += 1) {
        const Eigen::SparseMatrix<double> t = fam.component(q).op.to_sparse<double>();
        const Eigen::SparseMatrix<double> cz = sz * t - t * sz;
        worst = std::max(worst, max_abs(Eigen::MatrixXd(cz) - q.value() * Eigen::MatrixXd(t)));
        const double qv = q.value();
        Eigen::MatrixXd up = Eigen::MatrixXd(sp * t - t * sp), down = Eigen::MatrixXd(sm * t - t * sm);
        if (q < fam.rank) up -= std::sqrt((k - qv) * (k + qv + 1)) * Eigen::MatrixXd(fam.component(q + HalfInt(1)).op.to_sparse<double>());
        if (q > -fam.rank) down -= std::sqrt((k + qv) * (k - qv + 1)) * Eigen::MatrixXd(fam.component(q - HalfInt(1)).op.to_sparse<double>());
        worst = std::max({worst, max_abs(up), max_abs(down)});
      }
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("ModelSpec and TensorOpSpec JSON round trip") {
  ModelSpec m;
  m.num_qubits = 10;
  m.offset = 0.25;
  const auto back = ModelSpec::from_json(m.to_json());
  CHECK(back.fingerprint() == m.fingerprint());
  ModelSpec other = m;
  other.offset = 0.3;
  CHECK(other.fingerprint() != m.fingerprint());
  const auto t = builtin_tensor_op("T20", 6);
  const auto t_back = TensorOpSpec::from_json(t.to_json(), 6);
  CHECK(t_back.fingerprint() == t.fingerprint());
  CHECK(t_back.op.str() == t.op.str());
  nlohmann::json bad = t.to_json();
  bad["component"] = "3";
  CHECK_THROWS_AS(TensorOpSpec::from_json(bad, 6), std::invalid_argument);
}
