#include "ethlab/pauli_operator.hpp"

#include <algorithm>
#include <bit>
#include <array>
#include <cmath>
#include <map>
#include <sstream>

namespace ethlab {

namespace {

using Mat2 = std::array<Complex, 4>;  // row-major, index 0 = up

Mat2 matrix_of(PauliLetter l) {
  const Complex i{0.0, 1.0};
  switch (l) {
    case PauliLetter::I: return {1.0, 0.0, 0.0, 1.0};
    case PauliLetter::X: return {0.0, 1.0, 1.0, 0.0};
    case PauliLetter::Y: return {0.0, -i, i, 0.0};
    case PauliLetter::Z: return {1.0, 0.0, 0.0, -1.0};
    case PauliLetter::Plus: return {0.0, 1.0, 0.0, 0.0};
    case PauliLetter::Minus: return {0.0, 0.0, 1.0, 0.0};
  }
  return {};
}

Mat2 multiply(const Mat2& a, const Mat2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
          a[2] * b[1] + a[3] * b[3]};
}

// M = a I + b Z + c Plus + d Minus.
std::vector<std::pair<PauliLetter, Complex>> decompose(const Mat2& m) {
  std::vector<std::pair<PauliLetter, Complex>> out;
  const Complex a = 0.5 * (m[0] + m[3]), b = 0.5 * (m[0] - m[3]);
  if (a != 0.0) out.emplace_back(PauliLetter::I, a);
  if (b != 0.0) out.emplace_back(PauliLetter::Z, b);
  if (m[1] != 0.0) out.emplace_back(PauliLetter::Plus, m[1]);
  if (m[2] != 0.0) out.emplace_back(PauliLetter::Minus, m[2]);
  return out;
}

PauliLetter adjoint_letter(PauliLetter l) {
  if (l == PauliLetter::Plus) return PauliLetter::Minus;
  if (l == PauliLetter::Minus) return PauliLetter::Plus;
  return l;
}

void check_factors(int n, const std::vector<std::pair<int, PauliLetter>>& factors) {
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (factors[i].first < 1 || factors[i].first > n) {
      throw std::out_of_range("PauliStringOperator: site " + std::to_string(factors[i].first) +
                              " outside [1, " + std::to_string(n) + "]");
    }
    if (i > 0 && factors[i].first == factors[i - 1].first) {
      throw std::invalid_argument("PauliStringOperator: repeated site in one term");
    }
  }
}

}  // namespace

char to_char(PauliLetter letter) {
  switch (letter) {
    case PauliLetter::I: return 'i';
    case PauliLetter::X: return 'x';
    case PauliLetter::Y: return 'y';
    case PauliLetter::Z: return 'z';
    case PauliLetter::Plus: return '+';
    case PauliLetter::Minus: return '-';
  }
  return '?';
}

PauliLetter letter_from_char(char c) {
  switch (c) {
    case 'i': case 'I': return PauliLetter::I;
    case 'x': case 'X': return PauliLetter::X;
    case 'y': case 'Y': return PauliLetter::Y;
    case 'z': case 'Z': return PauliLetter::Z;
    case '+': return PauliLetter::Plus;
    case '-': return PauliLetter::Minus;
    default: throw std::invalid_argument(std::string("unknown Pauli letter '") + c + "'");
  }
}

std::optional<int> PauliTerm::twice_delta_m() const {
  int delta = 0;
  for (const auto& [site, l] : factors) {
    if (l == PauliLetter::X || l == PauliLetter::Y) return std::nullopt;
    if (l == PauliLetter::Plus) delta += 2;
    if (l == PauliLetter::Minus) delta -= 2;
  }
  return delta;
}

PauliStringOperator PauliStringOperator::single(int num_qubits, Complex coefficient,
                                                std::vector<std::pair<int, PauliLetter>> factors) {
  PauliStringOperator op(num_qubits);
  op.add_term(coefficient, std::move(factors));
  return op;
}

PauliStringOperator PauliStringOperator::identity(int num_qubits, Complex coefficient) {
  return single(num_qubits, coefficient, {});
}

void PauliStringOperator::add_term(Complex coefficient, std::vector<std::pair<int, PauliLetter>> factors) {
  std::erase_if(factors, [](const auto& f) { return f.second == PauliLetter::I; });
  std::sort(factors.begin(), factors.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  check_factors(num_qubits_, factors);
  terms_.push_back(PauliTerm{coefficient, std::move(factors)});
}

PauliStringOperator& PauliStringOperator::operator+=(const PauliStringOperator& other) {
  if (empty() && num_qubits_ == 0) num_qubits_ = other.num_qubits_;
  if (other.num_qubits_ != num_qubits_) throw std::invalid_argument("PauliStringOperator: qubit count mismatch");
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  return *this;
}

PauliStringOperator& PauliStringOperator::operator-=(const PauliStringOperator& other) {
  return *this += other * Complex(-1.0);
}

PauliStringOperator& PauliStringOperator::operator*=(Complex scale) {
  for (auto& t : terms_) t.coefficient *= scale;
  return *this;
}

PauliStringOperator operator*(const PauliStringOperator& a, const PauliStringOperator& b) {
  if (a.num_qubits_ != b.num_qubits_) throw std::invalid_argument("PauliStringOperator: qubit count mismatch");
  PauliStringOperator out(a.num_qubits_);
  for (const auto& ta : a.terms_) {
    for (const auto& tb : b.terms_) {
      // Expand site by site; a shared site may split into several letters.
      std::vector<std::pair<Complex, std::vector<std::pair<int, PauliLetter>>>> partial{{ta.coefficient * tb.coefficient, {}}};
      std::map<int, std::pair<PauliLetter, PauliLetter>> sites;
      for (const auto& [s, l] : ta.factors) sites[s].first = l;
      for (const auto& [s, l] : tb.factors) sites[s].second = l;
      for (const auto& [site, pair] : sites) {
        const auto parts = decompose(multiply(matrix_of(pair.first), matrix_of(pair.second)));
        const bool passthrough = pair.first == PauliLetter::I || pair.second == PauliLetter::I;
        std::vector<std::pair<Complex, std::vector<std::pair<int, PauliLetter>>>> next;
        for (auto& [c, f] : partial) {
          if (passthrough) {
            auto g = f;
            g.emplace_back(site, pair.first == PauliLetter::I ? pair.second : pair.first);
            next.emplace_back(c, std::move(g));
            continue;
          }
          for (const auto& [letter, coeff] : parts) {
            auto g = f;
            if (letter != PauliLetter::I) g.emplace_back(site, letter);
            next.emplace_back(c * coeff, std::move(g));
          }
        }
        partial = std::move(next);
      }
      for (auto& [c, f] : partial) {
        if (c != 0.0) out.add_term(c, std::move(f));
      }
    }
  }
  return out;
}

PauliStringOperator PauliStringOperator::simplified(double tolerance) const {
  std::map<std::vector<std::pair<int, PauliLetter>>, Complex> merged;
  for (const auto& t : terms_) merged[t.factors] += t.coefficient;
  PauliStringOperator out(num_qubits_);
  for (auto& [factors, c] : merged) {
    if (std::abs(c) > tolerance) out.terms_.push_back(PauliTerm{c, factors});
  }
  return out;
}

PauliStringOperator PauliStringOperator::adjoint() const {
  PauliStringOperator out(num_qubits_);
  for (const auto& t : terms_) {
    PauliTerm a{std::conj(t.coefficient), t.factors};
    for (auto& f : a.factors) f.second = adjoint_letter(f.second);
    out.terms_.push_back(std::move(a));
  }
  return out;
}

bool PauliStringOperator::is_hermitian(double tolerance) const {
  const auto diff = (*this - adjoint()).simplified(tolerance);
  return diff.empty();
}

bool PauliStringOperator::is_real(double tolerance) const {
  // Each Y contributes a factor i; the product is real iff the phases cancel.
  for (const auto& t : terms_) {
    const auto ys = std::count_if(t.factors.begin(), t.factors.end(),
                                  [](const auto& f) { return f.second == PauliLetter::Y; });
    Complex c = t.coefficient;
    for (long i = 0; i < ys; ++i) c *= Complex(0.0, 1.0);
    if (std::abs(c.imag()) > tolerance) return false;
  }
  return true;
}

std::optional<int> PauliStringOperator::twice_delta_m() const {
  std::optional<int> common;
  for (const auto& t : terms_) {
    const auto d = t.twice_delta_m();
    if (!d) return std::nullopt;
    if (common && *common != *d) return std::nullopt;
    common = d;
  }
  return common.value_or(0);
}

std::optional<std::pair<Bitstring, Complex>> PauliStringOperator::apply(const PauliTerm& term,
                                                                        Bitstring state) const {
  Complex factor = term.coefficient;
  for (const auto& [site, l] : term.factors) {
    const Bitstring mask = Bitstring{1} << (num_qubits_ - site);
    const bool down = (state & mask) != 0;
    switch (l) {
      case PauliLetter::I: break;
      case PauliLetter::X: state ^= mask; break;
      case PauliLetter::Y:
        factor *= down ? Complex(0.0, -1.0) : Complex(0.0, 1.0);
        state ^= mask;
        break;
      case PauliLetter::Z:
        if (down) factor = -factor;
        break;
      case PauliLetter::Plus:
        if (!down) return std::nullopt;
        state ^= mask;
        break;
      case PauliLetter::Minus:
        if (down) return std::nullopt;
        state ^= mask;
        break;
    }
  }
  return std::pair{state, factor};
}

PauliStringOperator::Triplets PauliStringOperator::full_entries() const {
  if (num_qubits_ < 1 || num_qubits_ > 26) throw std::domain_error("PauliStringOperator: N out of range");
  Triplets entries;
  const Bitstring dim = Bitstring{1} << num_qubits_;
  for (Bitstring col = 0; col < dim; ++col) {
    for (const auto& t : terms_) {
      if (auto image = apply(t, col)) {
        entries.push_back({{static_cast<std::int64_t>(image->first), static_cast<std::int64_t>(col)}, image->second});
      }
    }
  }
  return entries;
}

PauliStringOperator::Triplets PauliStringOperator::sector_entries(HalfInt m_col, HalfInt m_row) const {
  const auto& index = sector_index(num_qubits_);
  const auto& cols = index.states(m_col);
  const int row_weight = sector_weight(num_qubits_, m_row);
  const int shift = (m_row - m_col).twice();
  Triplets entries;
  for (const auto& t : terms_) {
    const auto d = t.twice_delta_m();
    if (d && *d != shift) continue;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      auto image = apply(t, cols[c]);
      if (!image || std::popcount(image->first) != row_weight) continue;
      entries.push_back({{index.rank(image->first), static_cast<std::int64_t>(c)}, image->second});
    }
  }
  return entries;
}

std::string PauliStringOperator::str() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (i) os << " + ";
    const auto& t = terms_[i];
    if (t.coefficient.imag() == 0.0) os << t.coefficient.real();
    else os << t.coefficient;
    for (const auto& [site, l] : t.factors) os << ' ' << to_char(l) << site;
  }
  return os.str();
}

PauliStringOperator total_spin_z(int n) {
  PauliStringOperator op(n);
  for (int j = 1; j <= n; ++j) op.add_term(0.5, {{j, PauliLetter::Z}});
  return op;
}

PauliStringOperator total_spin_raise(int n) {
  PauliStringOperator op(n);
  for (int j = 1; j <= n; ++j) op.add_term(1.0, {{j, PauliLetter::Plus}});
  return op;
}

PauliStringOperator total_spin_lower(int n) {
  PauliStringOperator op(n);
  for (int j = 1; j <= n; ++j) op.add_term(1.0, {{j, PauliLetter::Minus}});
  return op;
}

PauliStringOperator total_pauli(int n, PauliLetter a) {
  PauliStringOperator op(n);
  for (int j = 1; j <= n; ++j) op.add_term(1.0, {{j, a}});
  return op;
}

PauliStringOperator total_spin_squared(int n) {
  const auto sz = total_spin_z(n);
  return (total_spin_lower(n) * total_spin_raise(n) + sz * sz + sz).simplified();
}

}  // namespace ethlab
