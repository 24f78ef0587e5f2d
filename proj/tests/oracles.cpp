#include "oracles.hpp"

#include <Eigen/Eigenvalues>

#include <bit>
#include <cmath>
#include <stdexcept>

namespace oracle {

namespace {

// Angular momentum matrices in the |j, m> basis ordered m = j, j-1, ..., -j.
struct SpinMatrices {
  Eigen::MatrixXd z, raise, lower;
};

SpinMatrices spin_matrices(HalfInt j) {
  const int dim = j.twice() + 1;
  SpinMatrices s{Eigen::MatrixXd::Zero(dim, dim), Eigen::MatrixXd::Zero(dim, dim), Eigen::MatrixXd::Zero(dim, dim)};
  for (int i = 0; i < dim; ++i) {
    const double m = j.value() - i;
    s.z(i, i) = m;
    if (i > 0) {
      // <m+1|J+|m>
      s.raise(i - 1, i) = std::sqrt(j.value() * (j.value() + 1) - m * (m + 1));
    }
  }
  s.lower = s.raise.transpose();
  return s;
}

int index_of(HalfInt j, HalfInt m) { return (j - m).twice() / 2; }

}  // namespace

double cg(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M) {
  if (!ethlab::valid_projection(j1, m1) || !ethlab::valid_projection(j2, m2) || !ethlab::valid_projection(J, M)) {
    throw std::domain_error("oracle::cg: invalid projection");
  }
  if (m1 + m2 != M || !ethlab::triangle(j1, j2, J)) return 0.0;
  const auto a = spin_matrices(j1), b = spin_matrices(j2);
  const int d1 = j1.twice() + 1, d2 = j2.twice() + 1;
  const Eigen::MatrixXd i1 = Eigen::MatrixXd::Identity(d1, d1), i2 = Eigen::MatrixXd::Identity(d2, d2);
  auto kron = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    Eigen::MatrixXd out(x.rows() * y.rows(), x.cols() * y.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r)
      for (Eigen::Index c = 0; c < x.cols(); ++c) out.block(r * y.rows(), c * y.cols(), y.rows(), y.cols()) = x(r, c) * y;
    return out;
  };
  const Eigen::MatrixXd jz = kron(a.z, i2) + kron(i1, b.z);
  const Eigen::MatrixXd jp = kron(a.raise, i2) + kron(i1, b.raise);
  const Eigen::MatrixXd jm = kron(a.lower, i2) + kron(i1, b.lower);

  // States with total projection J; the highest-weight vector spans ker(J+) there.
  std::vector<int> sector;
  for (int i = 0; i < jz.rows(); ++i) {
    if (std::abs(jz(i, i) - J.value()) < 1e-12) sector.push_back(i);
  }
  Eigen::MatrixXd jp_sector(jp.rows(), static_cast<Eigen::Index>(sector.size()));
  for (std::size_t c = 0; c < sector.size(); ++c) jp_sector.col(static_cast<Eigen::Index>(c)) = jp.col(sector[c]);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jp_sector, Eigen::ComputeFullV);
  const Eigen::VectorXd kernel = svd.matrixV().col(svd.matrixV().cols() - 1);
  Eigen::VectorXd state = Eigen::VectorXd::Zero(jz.rows());
  for (std::size_t c = 0; c < sector.size(); ++c) state(sector[c]) = kernel(static_cast<Eigen::Index>(c));
  // Phase: component with m1 = j1 positive.
  const int top = index_of(j1, j1) * d2 + index_of(j2, J - j1);
  if (state(top) < 0) state = -state;
  state.normalize();
  for (HalfInt m = J; m > M; m -= 1) {
    state = jm * state;
    state /= std::sqrt(J.value() * (J.value() + 1) - m.value() * (m.value() - 1));
  }
  return state(index_of(j1, m1) * d2 + index_of(j2, m2));
}

Eigen::Matrix2cd pauli(char letter) {
  using C = std::complex<double>;
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  switch (letter) {
    case 'i': m << 1, 0, 0, 1; break;
    case 'x': m << 0, 1, 1, 0; break;
    case 'y': m << 0, C(0, -1), C(0, 1), 0; break;
    case 'z': m << 1, 0, 0, -1; break;
    case '+': m << 0, 1, 0, 0; break;
    case '-': m << 0, 0, 1, 0; break;
    default: throw std::invalid_argument("oracle::pauli: unknown letter");
  }
  return m;
}

Eigen::MatrixXcd string_op(int n, const std::vector<std::pair<int, char>>& factors) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Ones(1, 1);
  for (int site = 1; site <= n; ++site) {
    Eigen::Matrix2cd f = pauli('i');
    for (const auto& [s, l] : factors) {
      if (s == site) f = f * pauli(l);
    }
    Eigen::MatrixXcd next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index r = 0; r < out.rows(); ++r)
      for (Eigen::Index c = 0; c < out.cols(); ++c) next.block(2 * r, 2 * c, 2, 2) = out(r, c) * f;
    out = next;
  }
  return out;
}

Eigen::MatrixXd heisenberg(const ethlab::ModelSpec& model) {
  const int n = model.num_qubits;
  const Eigen::Index dim = Eigen::Index(1) << n;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  auto bond = [&](int a, int b, double J) {
    for (char l : {'x', 'y', 'z'}) h += J * string_op(n, {{a, l}, {b, l}});
  };
  const bool pbc = model.boundary == ethlab::Boundary::Periodic;
  const int nn = pbc ? n : n - 1, nnn = pbc ? n : n - 2;
  for (int j = 1; j <= nn; ++j) bond(j, (j % n) + 1, model.nn_coupling(j));
  for (int j = 1; j <= nnn; ++j) bond(j, ((j + 1) % n) + 1, model.nnn_coupling(j));
  return h.real();
}

Eigen::MatrixXd spin_z(int n) {
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(Eigen::Index(1) << n, Eigen::Index(1) << n);
  for (int j = 1; j <= n; ++j) s += 0.5 * string_op(n, {{j, 'z'}});
  return s.real();
}

Eigen::MatrixXd spin_raise(int n) {
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(Eigen::Index(1) << n, Eigen::Index(1) << n);
  for (int j = 1; j <= n; ++j) s += string_op(n, {{j, '+'}});
  return s.real();
}

Eigen::MatrixXd spin_lower(int n) { return spin_raise(n).transpose(); }

Eigen::MatrixXd spin_squared(int n) {
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(Eigen::Index(1) << n, Eigen::Index(1) << n);
  for (char l : {'x', 'y', 'z'}) {
    Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(s.rows(), s.cols());
    for (int j = 1; j <= n; ++j) total += 0.5 * string_op(n, {{j, l}});
    s += total * total;
  }
  return s.real();
}

Eigen::MatrixXd tensor_op(const std::string& name, int n) {
  const int c = (n + 1) / 2;
  if (name == "T10") return (0.5 * string_op(n, {{c, 'z'}})).real();
  if (name == "T11") return (-std::sqrt(0.5) * string_op(n, {{c, '+'}})).real();
  if (name == "T22") return (0.5 * string_op(n, {{c, '+'}, {c + 1, '+'}})).real();
  if (name == "T20") {
    // (3 S_z S_z - S.S) / sqrt(6) for spin-1/2 sites.
    Eigen::MatrixXcd m = 2.0 * string_op(n, {{c, 'z'}, {c + 1, 'z'}}) - string_op(n, {{c, 'x'}, {c + 1, 'x'}}) -
                         string_op(n, {{c, 'y'}, {c + 1, 'y'}});
    return (m / (4.0 * std::sqrt(6.0))).real();
  }
  throw std::invalid_argument("oracle::tensor_op: unknown operator " + name);
}

std::vector<std::uint64_t> sector_states(int n, HalfInt m) {
  const int weight = (HalfInt::half(n) - m).as_int();
  std::vector<std::uint64_t> out;
  for (std::uint64_t b = 0; b < (std::uint64_t(1) << n); ++b) {
    if (std::popcount(b) == weight) out.push_back(b);
  }
  return out;
}

Eigen::MatrixXd restrict(const Eigen::MatrixXd& full, const std::vector<std::uint64_t>& rows,
                         const std::vector<std::uint64_t>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          full(static_cast<Eigen::Index>(rows[r]), static_cast<Eigen::Index>(cols[c]));
  return out;
}

Eigen::VectorXd dense_spectrum(const ethlab::ModelSpec& model) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(heisenberg(model), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

}  // namespace oracle
