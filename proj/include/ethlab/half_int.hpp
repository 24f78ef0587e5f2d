#pragma once

#include <compare>
#include <cstdlib>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ethlab {

/// Integer or half-integer quantum number, stored as twice its value so that
/// spin and magnetic labels stay exact.
class HalfInt {
public:
  constexpr HalfInt() = default;
  constexpr HalfInt(int integer) : twice_(2 * integer) {}

  static constexpr HalfInt from_twice(int twice) {
    HalfInt h;
    h.twice_ = twice;
    return h;
  }
  /// n/2
  static constexpr HalfInt half(int n) { return from_twice(n); }

  /// Parses "3", "-1", "3/2" or "-1/2".
  static HalfInt parse(const std::string& text);

  constexpr int twice() const { return twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }
  constexpr double value() const { return 0.5 * twice_; }

  /// Exact integer value; throws when the number is half-odd.
  int as_int() const {
    if (!is_integer()) throw std::domain_error("HalfInt: value " + str() + " is not an integer");
    return twice_ / 2;
  }

  std::string str() const {
    if (is_integer()) return std::to_string(twice_ / 2);
    return std::to_string(twice_) + "/2";
  }

  constexpr HalfInt operator-() const { return from_twice(-twice_); }
  constexpr HalfInt& operator+=(HalfInt o) { twice_ += o.twice_; return *this; }
  constexpr HalfInt& operator-=(HalfInt o) { twice_ -= o.twice_; return *this; }
  friend constexpr HalfInt operator+(HalfInt a, HalfInt b) { return a += b; }
  friend constexpr HalfInt operator-(HalfInt a, HalfInt b) { return a -= b; }
  friend constexpr auto operator<=>(HalfInt, HalfInt) = default;
  friend constexpr bool operator==(HalfInt, HalfInt) = default;

  friend std::ostream& operator<<(std::ostream& os, HalfInt h) { return os << h.str(); }

private:
  int twice_ = 0;
};

constexpr HalfInt abs(HalfInt h) { return h.twice() < 0 ? -h : h; }

/// j >= 0, |m| <= j and j - m integral.
constexpr bool valid_projection(HalfInt j, HalfInt m) {
  return j.twice() >= 0 && abs(m) <= j && (j.twice() - m.twice()) % 2 == 0;
}

/// |j1 - j2| <= J <= j1 + j2 with j1 + j2 + J integral.
constexpr bool triangle(HalfInt j1, HalfInt j2, HalfInt J) {
  return abs(j1 - j2) <= J && J <= j1 + j2 && (j1.twice() + j2.twice() + J.twice()) % 2 == 0;
}

inline HalfInt HalfInt::parse(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return HalfInt(std::stoi(text));
    if (text.substr(slash + 1) != "2") throw std::invalid_argument(text);
    return from_twice(std::stoi(text.substr(0, slash)));
  } catch (const std::logic_error&) {
    throw std::invalid_argument("HalfInt: cannot parse '" + text + "'");
  }
}

}  // namespace ethlab
