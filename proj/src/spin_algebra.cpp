#include "ethlab/spin_algebra.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <atomic>
#include <cmath>
#include <deque>
#include <functional>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

namespace ethlab {

namespace mp = boost::multiprecision;

namespace {

struct CgKeyHash {
  std::size_t operator()(const CgKey& k) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (int v : {k.j1.twice(), k.m1.twice(), k.j2.twice(), k.m2.twice(), k.J.twice(), k.M.twice()}) {
      h ^= static_cast<std::size_t>(static_cast<unsigned>(v));
      h *= 1099511628211ull;
    }
    return h;
  }
};

class FactorialTable {
public:
  mp::cpp_int operator()(int n) {
    if (n < 0) throw std::logic_error("factorial of negative argument");
    std::lock_guard lock(mutex_);
    while (static_cast<int>(table_.size()) <= n) {
      const auto next = static_cast<unsigned>(table_.size());
      table_.push_back(table_.back() * next);
    }
    return table_[static_cast<std::size_t>(n)];
  }

private:
  std::mutex mutex_;
  std::deque<mp::cpp_int> table_{mp::cpp_int(1)};
};

FactorialTable& factorial() {
  static FactorialTable table;
  return table;
}

struct CgCache {
  std::shared_mutex mutex;
  std::unordered_map<CgKey, double, CgKeyHash> values;
};

CgCache& cg_cache() {
  static CgCache cache;
  return cache;
}

std::atomic<int> g_sign_fault{0};

// Racah's closed form, evaluated as sign(sum) * sqrt(prefactor * sum^2).
double racah(const CgKey& key) {
  const int j1 = key.j1.twice(), m1 = key.m1.twice();
  const int j2 = key.j2.twice(), m2 = key.m2.twice();
  const int J = key.J.twice(), M = key.M.twice();

  // All of these are (twice-value combinations)/2 and integral once the
  // triangle and projection checks have passed.
  const int t1 = (j1 + j2 - J) / 2;
  const int t2 = (j1 - j2 + J) / 2;
  const int t3 = (-j1 + j2 + J) / 2;
  const int t4 = (j1 + j2 + J) / 2 + 1;
  const int a1 = (j1 + m1) / 2, b1 = (j1 - m1) / 2;
  const int a2 = (j2 + m2) / 2, b2 = (j2 - m2) / 2;
  const int aJ = (J + M) / 2, bJ = (J - M) / 2;

  auto& f = factorial();
  mp::cpp_int pre_num = mp::cpp_int(J + 1) * f(t1) * f(t2) * f(t3) * f(a1) * f(b1) * f(a2) * f(b2) *
                        f(aJ) * f(bJ);
  mp::cpp_int pre_den = f(t4);

  const int c1 = (J - j2 + m1) / 2;  // (J - j2 + m1)
  const int c2 = (J - j1 - m2) / 2;  // (J - j1 - m2)
  const int kmin = std::max({0, -c1, -c2});
  const int kmax = std::min({t1, b1, a2});

  mp::cpp_rational sum = 0;
  for (int k = kmin; k <= kmax; ++k) {
    mp::cpp_int den = f(k) * f(t1 - k) * f(b1 - k) * f(a2 - k) * f(c1 + k) * f(c2 + k);
    mp::cpp_rational term(mp::cpp_int(1), den);
    if (k % 2) sum -= term;
    else sum += term;
  }
  if (sum == 0) return 0.0;

  const mp::cpp_rational squared = mp::cpp_rational(pre_num, pre_den) * sum * sum;
  mp::cpp_bin_float_50 value(mp::numerator(squared));
  value /= mp::cpp_bin_float_50(mp::denominator(squared));
  value = mp::sqrt(value);
  const double magnitude = value.convert_to<double>();
  return sum < 0 ? -magnitude : magnitude;
}

}  // namespace

double cg_exact(const CgKey& key) {
  if (!valid_projection(key.j1, key.m1) || !valid_projection(key.j2, key.m2) ||
      !valid_projection(key.J, key.M)) {
    throw std::domain_error("cg_exact: invalid (j, m) pairing in <" + key.J.str() + "," +
                            key.M.str() + "|" + key.j1.str() + "," + key.m1.str() + ";" +
                            key.j2.str() + "," + key.m2.str() + ">");
  }
  double value = 0.0;
  if (key.m1 + key.m2 == key.M && triangle(key.j1, key.j2, key.J)) {
    auto& cache = cg_cache();
    bool found = false;
    {
      std::shared_lock lock(cache.mutex);
      if (auto it = cache.values.find(key); it != cache.values.end()) {
        value = it->second;
        found = true;
      }
    }
    if (!found) {
      value = racah(key);
      std::unique_lock lock(cache.mutex);
      cache.values[key] = value;
    }
  }
  if (g_sign_fault.load(std::memory_order_relaxed) > 0 && key.m2.twice() < 0) value = -value;
  return value;
}

double cg_asymptotic(HalfInt s, HalfInt m, HalfInt k, HalfInt q, HalfInt nu) {
  if ((s - m).twice() < 0) throw std::domain_error("cg_asymptotic: s - m < 0");
  const HalfInt J = s + nu, M = m + q;
  if (!valid_projection(s, m) || !valid_projection(k, q) || !valid_projection(J, M) ||
      !triangle(s, k, J)) {
    return 0.0;
  }
  auto fact = [](HalfInt n) { return std::tgamma(n.as_int() + 1.0); };
  const double two_s = 2.0 * s.value();
  const HalfInt smm = s - m;
  if (nu == q) return 1.0;
  if (nu > q) {
    const double ratio = fact(k + nu) * fact(smm + nu - q) * fact(k - q) /
                         (fact(k - nu) * fact(smm) * fact(k + q));
    return std::sqrt(ratio) * std::pow(two_s, 0.5 * (q - nu).value()) / fact(nu - q);
  }
  const double ratio = fact(k - nu) * fact(k + q) * fact(smm) /
                       (fact(k + nu) * fact(k - q) * fact(smm + nu - q));
  const double sign = ((q - nu).as_int() % 2) ? -1.0 : 1.0;
  return sign * std::sqrt(ratio) * std::pow(two_s, -0.5 * (q - nu).value()) / fact(q - nu);
}

double upsilon(HalfInt s_a, HalfInt s_ap, HalfInt s_app, HalfInt k, HalfInt k1, HalfInt k2,
               HalfInt m, HalfInt q) {
  if (!valid_projection(s_a, m) || !valid_projection(k, q) || !valid_projection(s_ap, m - q)) {
    throw std::domain_error("upsilon: undefined at (m=" + m.str() + ", q=" + q.str() +
                            "): invalid projection");
  }
  const double denominator = cg_exact(s_ap, m - q, k, q, s_a, m);
  if (denominator == 0.0) {
    throw std::domain_error("upsilon: undefined at (m=" + m.str() + ", q=" + q.str() +
                            "): vanishing Clebsch-Gordan denominator");
  }
  double total = 0.0;
  for (HalfInt qp = -k1; qp <= k1; qp += 1) {
    const HalfInt q2 = q - qp;
    if (!valid_projection(k2, q2)) continue;
    const HalfInt m_mid = m - qp;
    if (!valid_projection(s_app, m_mid)) continue;
    const double c1 = cg_exact(k1, qp, k2, q2, k, q);
    if (c1 == 0.0) continue;
    const double c2 = cg_exact(s_app, m_mid, k1, qp, s_a, m);
    if (c2 == 0.0) continue;
    const double c3 = cg_exact(s_ap, m - q, k2, q2, s_app, m_mid);
    total += c1 * c2 * c3;
  }
  return total / denominator;
}

std::optional<std::pair<HalfInt, HalfInt>> upsilon_evaluation_point(HalfInt s_a, HalfInt s_ap,
                                                                   HalfInt k) {
  auto admissible = [&](HalfInt m, HalfInt q) {
    return valid_projection(s_a, m) && valid_projection(k, q) && valid_projection(s_ap, m - q) &&
           cg_exact(s_ap, m - q, k, q, s_a, m) != 0.0;
  };
  if (admissible(s_a, s_a - s_ap)) return std::pair{s_a, s_a - s_ap};
  for (HalfInt m = s_a; m >= -s_a; m -= 1) {
    for (HalfInt q = -k; q <= k; q += 1) {
      if (admissible(m, q)) return std::pair{m, q};
    }
  }
  return std::nullopt;
}

double upsilon(HalfInt s_a, HalfInt s_ap, HalfInt s_app, HalfInt k, HalfInt k1, HalfInt k2) {
  const auto point = upsilon_evaluation_point(s_a, s_ap, k);
  if (!point) {
    throw std::domain_error("upsilon: no admissible (m, q) for s_a=" + s_a.str() +
                            ", s_ap=" + s_ap.str() + ", k=" + k.str());
  }
  return upsilon(s_a, s_ap, s_app, k, k1, k2, point->first, point->second);
}

double upsilon_asymptotic(HalfInt s_a, HalfInt s_ap, HalfInt s_app, HalfInt k, HalfInt k1,
                          HalfInt k2) {
  const HalfInt q = s_a - s_ap, q1 = s_a - s_app, q2 = s_app - s_ap;
  if (!triangle(k1, k2, k) || !valid_projection(k, q) || !valid_projection(k1, q1) ||
      !valid_projection(k2, q2)) {
    return 0.0;
  }
  return cg_exact(k1, q1, k2, q2, k, q);
}

namespace testing {
ScopedCgSignFault::ScopedCgSignFault() { g_sign_fault.fetch_add(1); }
ScopedCgSignFault::~ScopedCgSignFault() { g_sign_fault.fetch_sub(1); }
bool cg_sign_fault_active() { return g_sign_fault.load() > 0; }
}  // namespace testing

}  // namespace ethlab
