#include "ethlab/coupled_basis.hpp"

#include "ethlab/spin_algebra.hpp"

#include <bit>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace ethlab {

namespace {

constexpr int kMaxIndexedQubits = 26;

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

// <s_new, M_new | s_prev, M_new - sigma; 1/2, sigma> for every step of an
// N-site chain, tabulated from cg_exact.
class HalfSpinCouplings {
public:
  explicit HalfSpinCouplings(int n) : n_(n), values_(static_cast<std::size_t>((n + 1) * (2 * n + 1) * 4), 0.0) {
    for (int ts_prev = 0; ts_prev <= n; ++ts_prev) {
      for (int tm = -n; tm <= n; ++tm) {
        for (int up = 0; up < 2; ++up) {
          for (int raise = 0; raise < 2; ++raise) {
            const int ts_new = ts_prev + (raise ? 1 : -1);
            const int sigma = up ? 1 : -1;
            const int tm_prev = tm - sigma;
            if (ts_new < 0) continue;
            const HalfInt s_prev = HalfInt::from_twice(ts_prev), s_new = HalfInt::from_twice(ts_new);
            const HalfInt M = HalfInt::from_twice(tm), M_prev = HalfInt::from_twice(tm_prev);
            if (!valid_projection(s_new, M) || !valid_projection(s_prev, M_prev)) continue;
            at(ts_prev, tm, up, raise) =
                cg_exact(s_prev, M_prev, HalfInt::half(1), HalfInt::from_twice(sigma), s_new, M);
          }
        }
      }
    }
  }

  double operator()(int ts_prev, int tm_new, bool up, bool raise) const {
    return values_[index(ts_prev, tm_new, up, raise)];
  }

private:
  std::size_t index(int ts_prev, int tm, int up, int raise) const {
    return static_cast<std::size_t>(((ts_prev * (2 * n_ + 1) + (tm + n_)) * 2 + up) * 2 + raise);
  }
  double& at(int ts_prev, int tm, int up, int raise) { return values_[index(ts_prev, tm, up, raise)]; }

  int n_;
  std::vector<double> values_;
};

// Depth-first walk over bitstrings with nonzero amplitude along one path,
// visiting leaves in ascending bitstring order.
template <typename Visit>
bool walk_path(const CouplingPath& path, int tm_target, const HalfSpinCouplings& cg, Visit&& visit) {
  const int n = path.num_qubits();
  std::vector<int> ts(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) ts[static_cast<std::size_t>(j)] = path.spins[static_cast<std::size_t>(j)].twice();

  // Returns false to abort the walk.
  auto recurse = [&](auto&& self, int j, Bitstring bits, int tm, double amp) -> bool {
    if (j == n) return tm == tm_target ? visit(bits, amp) : true;
    for (int down = 0; down < 2; ++down) {
      const int tm_new = tm + (down ? -1 : 1);
      const int remaining = n - j - 1;
      if (std::abs(tm_new) > ts[static_cast<std::size_t>(j)]) continue;
      if (std::abs(tm_target - tm_new) > remaining) continue;
      double c = 1.0;
      if (j > 0) {
        const bool raise = ts[static_cast<std::size_t>(j)] > ts[static_cast<std::size_t>(j - 1)];
        c = cg(ts[static_cast<std::size_t>(j - 1)], tm_new, !down, raise);
        if (c == 0.0) continue;
      }
      const Bitstring next = down ? (bits | (Bitstring{1} << (n - 1 - j))) : bits;
      if (!self(self, j + 1, next, tm_new, amp * c)) return false;
    }
    return true;
  };
  return recurse(recurse, 0, Bitstring{0}, 0, 1.0);
}

const HalfSpinCouplings& couplings(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<HalfSpinCouplings>> tables;
  std::lock_guard lock(mutex);
  auto& slot = tables[n];
  if (!slot) slot = std::make_unique<HalfSpinCouplings>(n);
  return *slot;
}

double path_sign(const CouplingPath& path, const HalfSpinCouplings& cg) {
  double sign = 1.0;
  walk_path(path, path.final_spin().twice(), cg, [&](Bitstring, double amp) {
    sign = amp < 0.0 ? -1.0 : 1.0;
    return false;
  });
  return sign;
}

void check_path(const CouplingPath& path, HalfInt m) {
  if (!path.valid()) throw std::invalid_argument("build_basis_vector: invalid coupling path");
  if (!valid_projection(path.final_spin(), m)) {
    throw std::domain_error("build_basis_vector: |m| = " + abs(m).str() + " exceeds s = " +
                            path.final_spin().str() + " or parity mismatch");
  }
}

}  // namespace

bool CouplingPath::valid() const {
  if (spins.empty() || spins.front() != HalfInt::half(1)) return false;
  for (std::size_t j = 1; j < spins.size(); ++j) {
    if (spins[j].twice() < 0 || std::abs(spins[j].twice() - spins[j - 1].twice()) != 1) return false;
  }
  return true;
}

std::uint64_t multiplicity(int num_qubits, HalfInt s) {
  if (num_qubits < 1 || s.twice() < 0 || s.twice() > num_qubits) return 0;
  if ((num_qubits - s.twice()) % 2 != 0) return 0;
  const int lower = (num_qubits - s.twice()) / 2;  // N/2 - s
  return binomial(num_qubits, lower) - binomial(num_qubits, lower - 1);
}

SectorLayout sector_layout(int num_qubits) {
  SectorLayout layout;
  layout.num_qubits = num_qubits;
  for (int ts = num_qubits % 2; ts <= num_qubits; ts += 2) {
    layout.multiplicity[HalfInt::from_twice(ts)] = multiplicity(num_qubits, HalfInt::from_twice(ts));
  }
  return layout;
}

std::vector<CouplingPath> enumerate_paths(int num_qubits, HalfInt s) {
  std::vector<CouplingPath> paths;
  if (multiplicity(num_qubits, s) == 0) return paths;
  CouplingPath current;
  current.spins.reserve(static_cast<std::size_t>(num_qubits));
  current.spins.push_back(HalfInt::half(1));
  auto recurse = [&](auto&& self) -> void {
    const int j = current.num_qubits();
    if (j == num_qubits) {
      if (current.final_spin() == s) paths.push_back(current);
      return;
    }
    for (int step : {-1, 1}) {
      const HalfInt next = current.spins.back() + HalfInt::from_twice(step);
      if (next.twice() < 0) continue;
      if (std::abs(s.twice() - next.twice()) > num_qubits - j - 1) continue;
      current.spins.push_back(next);
      self(self);
      current.spins.pop_back();
    }
  };
  recurse(recurse);
  return paths;
}

CoupledBasisVector build_basis_vector(const CouplingPath& path, HalfInt m) {
  check_path(path, m);
  const auto& cg = couplings(path.num_qubits());
  const double sign = path_sign(path, cg);
  CoupledBasisVector v{path.final_spin(), m, path, {}};
  walk_path(path, m.twice(), cg, [&](Bitstring b, double amp) {
    v.amplitudes.emplace_back(b, sign * amp);
    return true;
  });
  return v;
}

int sector_weight(int num_qubits, HalfInt m) {
  const int w2 = num_qubits - m.twice();
  if (w2 < 0 || w2 > 2 * num_qubits || w2 % 2 != 0) {
    throw std::domain_error("sector_weight: m = " + m.str() + " invalid for N = " + std::to_string(num_qubits));
  }
  return w2 / 2;
}

SectorIndex::SectorIndex(int num_qubits) : num_qubits_(num_qubits) {
  if (num_qubits < 1 || num_qubits > kMaxIndexedQubits) {
    throw std::domain_error("SectorIndex: N must lie in [1, " + std::to_string(kMaxIndexedQubits) + "]");
  }
  const Bitstring dim = Bitstring{1} << num_qubits;
  by_weight_.resize(static_cast<std::size_t>(num_qubits + 1));
  rank_.resize(dim);
  for (Bitstring b = 0; b < dim; ++b) {
    auto& bucket = by_weight_[static_cast<std::size_t>(std::popcount(b))];
    rank_[b] = static_cast<std::int32_t>(bucket.size());
    bucket.push_back(b);
  }
}

const std::vector<Bitstring>& SectorIndex::states(HalfInt m) const {
  return by_weight_.at(static_cast<std::size_t>(sector_weight(num_qubits_, m)));
}

const SectorIndex& sector_index(int num_qubits) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<SectorIndex>> indices;
  std::lock_guard lock(mutex);
  auto& slot = indices[num_qubits];
  if (!slot) slot = std::make_unique<SectorIndex>(num_qubits);
  return *slot;
}

Eigen::MatrixXd sector_basis(int num_qubits, HalfInt s, HalfInt m) {
  const auto paths = enumerate_paths(num_qubits, s);
  const auto& index = sector_index(num_qubits);
  const auto& cg = couplings(num_qubits);
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(index.states(m).size()),
                                                static_cast<Eigen::Index>(paths.size()));
  for (std::size_t col = 0; col < paths.size(); ++col) {
    check_path(paths[col], m);
    const double sign = path_sign(paths[col], cg);
    walk_path(paths[col], m.twice(), cg, [&](Bitstring b, double amp) {
      basis(index.rank(b), static_cast<Eigen::Index>(col)) = sign * amp;
      return true;
    });
  }
  return basis;
}

}  // namespace ethlab
