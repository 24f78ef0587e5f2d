#include "ethlab/model.hpp"

#include "ethlab/spin_algebra.hpp"

#include <cmath>
#include <stdexcept>

namespace ethlab {

using nlohmann::json;

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// --- ModelSpec ---------------------------------------------------------------

ModelSpec ModelSpec::periodic(int num_qubits) {
  ModelSpec spec;
  spec.num_qubits = num_qubits;
  spec.boundary = Boundary::Periodic;
  spec.offset = 0.0;
  return spec;
}

int ModelSpec::nn_bond_count() const {
  return boundary == Boundary::Open ? num_qubits - 1 : num_qubits;
}

int ModelSpec::nnn_bond_count() const {
  return boundary == Boundary::Open ? std::max(0, num_qubits - 2) : num_qubits;
}

double ModelSpec::nn_coupling(int bond) const {
  if (!nn_couplings.empty()) return nn_couplings.at(static_cast<std::size_t>(bond - 1));
  return nn_base + (bond == offset_site ? offset : 0.0);
}

double ModelSpec::nnn_coupling(int bond) const {
  if (!nnn_couplings.empty()) return nnn_couplings.at(static_cast<std::size_t>(bond - 1));
  return nnn_base + (bond == offset_site ? offset : 0.0);
}

json ModelSpec::to_json() const {
  json j;
  j["num_qubits"] = num_qubits;
  j["boundary"] = boundary == Boundary::Open ? "open" : "periodic";
  j["nn_base"] = nn_base;
  j["nnn_base"] = nnn_base;
  j["offset_site"] = offset_site;
  j["offset"] = offset;
  j["nn_couplings"] = nn_couplings;
  j["nnn_couplings"] = nnn_couplings;
  return j;
}

ModelSpec ModelSpec::from_json(const json& j) {
  ModelSpec spec;
  const std::string boundary = j.value("boundary", std::string("open"));
  if (boundary == "periodic") spec = periodic(spec.num_qubits);
  else if (boundary != "open") throw std::invalid_argument("model.boundary must be 'open' or 'periodic'");
  spec.num_qubits = j.value("num_qubits", spec.num_qubits);
  spec.nn_base = j.value("nn_base", spec.nn_base);
  spec.nnn_base = j.value("nnn_base", spec.nnn_base);
  spec.offset_site = j.value("offset_site", spec.offset_site);
  spec.offset = j.value("offset", spec.offset);
  spec.nn_couplings = j.value("nn_couplings", std::vector<double>{});
  spec.nnn_couplings = j.value("nnn_couplings", std::vector<double>{});
  return spec;
}

std::uint64_t ModelSpec::fingerprint() const { return fnv1a64(to_json().dump()); }

PauliStringOperator build_hamiltonian(const ModelSpec& spec) {
  const int n = spec.num_qubits;
  if (n < 2) throw std::domain_error("build_hamiltonian: N must be at least 2");
  if (spec.boundary == Boundary::Periodic && n < 3) {
    throw std::domain_error("build_hamiltonian: periodic chains need N >= 3");
  }
  if (!spec.nn_couplings.empty() && static_cast<int>(spec.nn_couplings.size()) != spec.nn_bond_count()) {
    throw std::invalid_argument("build_hamiltonian: nn_couplings has the wrong length");
  }
  if (!spec.nnn_couplings.empty() && static_cast<int>(spec.nnn_couplings.size()) != spec.nnn_bond_count()) {
    throw std::invalid_argument("build_hamiltonian: nnn_couplings has the wrong length");
  }
  PauliStringOperator h(n);
  auto add_heisenberg = [&](int a, int b, double J) {
    if (J == 0.0) return;
    h.add_term(J, {{a, PauliLetter::Z}, {b, PauliLetter::Z}});
    h.add_term(2.0 * J, {{a, PauliLetter::Plus}, {b, PauliLetter::Minus}});
    h.add_term(2.0 * J, {{a, PauliLetter::Minus}, {b, PauliLetter::Plus}});
  };
  auto wrap = [n](int site) { return (site - 1) % n + 1; };
  for (int j = 1; j <= spec.nn_bond_count(); ++j) add_heisenberg(j, wrap(j + 1), spec.nn_coupling(j));
  for (int j = 1; j <= spec.nnn_bond_count(); ++j) add_heisenberg(j, wrap(j + 2), spec.nnn_coupling(j));
  return h.simplified();
}

// --- tensor operators ----------------------------------------------------------

json operator_to_json(const PauliStringOperator& op) {
  json terms = json::array();
  for (const auto& t : op.terms()) {
    json ops = json::object();
    for (const auto& [site, l] : t.factors) ops[std::to_string(site)] = std::string(1, to_char(l));
    json c = t.coefficient.imag() == 0.0 ? json(t.coefficient.real())
                                         : json::array({t.coefficient.real(), t.coefficient.imag()});
    terms.push_back({{"coefficient", c}, {"ops", ops}});
  }
  return terms;
}

PauliStringOperator operator_from_json(const json& j, int num_qubits) {
  if (!j.is_array()) throw std::invalid_argument("operator terms must be a JSON array");
  PauliStringOperator op(num_qubits);
  for (const auto& term : j) {
    Complex c;
    const auto& cj = term.at("coefficient");
    if (cj.is_array()) c = Complex(cj.at(0).get<double>(), cj.at(1).get<double>());
    else c = Complex(cj.get<double>(), 0.0);
    std::vector<std::pair<int, PauliLetter>> factors;
    for (const auto& [site, letter] : term.at("ops").items()) {
      const auto text = letter.get<std::string>();
      if (text.size() != 1) throw std::invalid_argument("operator letter must be one character");
      factors.emplace_back(std::stoi(site), letter_from_char(text[0]));
    }
    op.add_term(c, std::move(factors));
  }
  return op;
}

json TensorOpSpec::to_json() const {
  return {{"name", name},
          {"rank", rank.str()},
          {"component", component.str()},
          {"anchor_site", anchor_site},
          {"num_qubits", num_qubits()},
          {"terms", operator_to_json(op)}};
}

TensorOpSpec TensorOpSpec::from_json(const json& j, int num_qubits) {
  TensorOpSpec t;
  t.name = j.value("name", std::string("custom"));
  t.rank = HalfInt::parse(j.at("rank").is_string() ? j.at("rank").get<std::string>()
                                                    : std::to_string(j.at("rank").get<int>()));
  t.component = HalfInt::parse(j.at("component").is_string() ? j.at("component").get<std::string>()
                                                              : std::to_string(j.at("component").get<int>()));
  t.anchor_site = j.value("anchor_site", ethlab::anchor_site(num_qubits));
  t.op = operator_from_json(j.at("terms"), num_qubits);
  if (!valid_projection(t.rank, t.component)) {
    throw std::invalid_argument("tensor operator '" + t.name + "': |q| exceeds k");
  }
  return t;
}

std::uint64_t TensorOpSpec::fingerprint() const { return fnv1a64(to_json().dump()); }

TensorOpSpec SphericalTensor::component(HalfInt q) const {
  if (!valid_projection(rank, q)) throw std::invalid_argument("component q = " + q.str() + " outside rank " + rank.str());
  return TensorOpSpec{name + "_" + q.str(), rank, q,
                      components.at(static_cast<std::size_t>((q + rank).twice() / 2)), anchor_site};
}

int anchor_site(int num_qubits) { return (num_qubits + 1) / 2; }

SphericalTensor site_vector(int num_qubits, int site) {
  const double r = 1.0 / std::sqrt(2.0);
  SphericalTensor t{"S" + std::to_string(site), HalfInt(1), {}, site};
  t.components.push_back(PauliStringOperator::single(num_qubits, r, {{site, PauliLetter::Minus}}));
  t.components.push_back(PauliStringOperator::single(num_qubits, 0.5, {{site, PauliLetter::Z}}));
  t.components.push_back(PauliStringOperator::single(num_qubits, -r, {{site, PauliLetter::Plus}}));
  return t;
}

TensorOpSpec builtin_tensor_op(const std::string& name, int num_qubits) {
  const int c = anchor_site(num_qubits);
  if (name == "T10") {
    return {"T10", HalfInt(1), HalfInt(0), PauliStringOperator::single(num_qubits, 0.5, {{c, PauliLetter::Z}}), c};
  }
  if (name == "T11") {
    return {"T11", HalfInt(1), HalfInt(1),
            PauliStringOperator::single(num_qubits, -1.0 / std::sqrt(2.0), {{c, PauliLetter::Plus}}), c};
  }
  if (name == "T20" || name == "T22") {
    if (num_qubits < 2) throw std::domain_error("two-site operator needs N >= 2");
    if (name == "T22") {
      return {"T22", HalfInt(2), HalfInt(2),
              PauliStringOperator::single(num_qubits, 0.5, {{c, PauliLetter::Plus}, {c + 1, PauliLetter::Plus}}), c};
    }
    const double r = 1.0 / std::sqrt(24.0);
    PauliStringOperator op(num_qubits);
    op.add_term(r, {{c, PauliLetter::Z}, {c + 1, PauliLetter::Z}});
    op.add_term(-r, {{c, PauliLetter::Plus}, {c + 1, PauliLetter::Minus}});
    op.add_term(-r, {{c, PauliLetter::Minus}, {c + 1, PauliLetter::Plus}});
    return {"T20", HalfInt(2), HalfInt(0), op, c};
  }
  throw std::invalid_argument("unknown builtin tensor operator '" + name + "' (expected T10, T11, T20, T22)");
}

SphericalTensor builtin_tensor_family(const std::string& name, int num_qubits) {
  const int c = anchor_site(num_qubits);
  if (name == "T1" || name == "T10" || name == "T11") {
    auto t = site_vector(num_qubits, c);
    t.name = "T1";
    return t;
  }
  if (name == "T2" || name == "T20" || name == "T22") {
    if (num_qubits < 2) throw std::domain_error("two-site operator needs N >= 2");
    auto t = compose_family(site_vector(num_qubits, c), site_vector(num_qubits, c + 1), HalfInt(2));
    t.name = "T2";
    return t;
  }
  throw std::invalid_argument("unknown builtin tensor family '" + name + "'");
}

TensorOpSpec compose_tensor(const SphericalTensor& a, const SphericalTensor& b, HalfInt k, HalfInt q) {
  if (!triangle(a.rank, b.rank, k)) {
    throw std::invalid_argument("compose_tensor: k = " + k.str() + " violates the triangle rule with (" +
                                a.rank.str() + ", " + b.rank.str() + ")");
  }
  if (!valid_projection(k, q)) throw std::invalid_argument("compose_tensor: |q| exceeds k");
  const int n = a.components.front().num_qubits();
  PauliStringOperator op(n);
  for (HalfInt q1 = -a.rank; q1 <= a.rank; q1 += 1) {
    const HalfInt q2 = q - q1;
    if (!valid_projection(b.rank, q2)) continue;
    const double c = cg_exact(a.rank, q1, b.rank, q2, k, q);
    if (c == 0.0) continue;
    op += c * (a.component(q1).op * b.component(q2).op);
  }
  return TensorOpSpec{"[" + a.name + "x" + b.name + "]" + k.str() + "_" + q.str(), k, q, op.simplified(1e-15),
                      a.anchor_site};
}

SphericalTensor compose_family(const SphericalTensor& a, const SphericalTensor& b, HalfInt k) {
  SphericalTensor t{"[" + a.name + "x" + b.name + "]" + k.str(), k, {}, a.anchor_site};
  for (HalfInt q = -k; q <= k; q += 1) t.components.push_back(compose_tensor(a, b, k, q).op);
  return t;
}

}  // namespace ethlab
