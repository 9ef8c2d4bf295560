#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace scopesim {

/// Small fixed-size vector with value semantics. The integrator is generic
/// over the scalar type, so simulations can run in double while convergence
/// studies run in long double.
template <typename Real, std::size_t N>
struct Vec {
  std::array<Real, N> v{};

  constexpr Real& operator[](std::size_t i) { return v[i]; }
  constexpr const Real& operator[](std::size_t i) const { return v[i]; }
  static constexpr std::size_t size() { return N; }

  constexpr Vec& operator+=(const Vec& o) {
    for (std::size_t i = 0; i < N; ++i) v[i] += o.v[i];
    return *this;
  }
  constexpr Vec& operator-=(const Vec& o) {
    for (std::size_t i = 0; i < N; ++i) v[i] -= o.v[i];
    return *this;
  }
  constexpr Vec& operator*=(Real s) {
    for (std::size_t i = 0; i < N; ++i) v[i] *= s;
    return *this;
  }

  friend constexpr Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend constexpr Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend constexpr Vec operator*(Real s, Vec a) { return a *= s; }
  friend constexpr Vec operator*(Vec a, Real s) { return a *= s; }
  friend constexpr Vec operator-(Vec a) {
    for (std::size_t i = 0; i < N; ++i) a.v[i] = -a.v[i];
    return a;
  }
  friend constexpr bool operator==(const Vec& a, const Vec& b) {
    return a.v == b.v;
  }
};

template <typename Real, std::size_t N>
constexpr Real dot(const Vec<Real, N>& a, const Vec<Real, N>& b) {
  Real s{};
  for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
  return s;
}

template <typename Real, std::size_t N>
bool all_finite(const Vec<Real, N>& a) {
  for (std::size_t i = 0; i < N; ++i)
    if (!std::isfinite(static_cast<double>(a[i]))) return false;
  return true;
}

using Vec2 = Vec<double, 2>;

/// 2x2 matrix, row-major.
struct Mat2 {
  double a{}, b{}, c{}, d{};  // [[a, b], [c, d]]

  constexpr double det() const { return a * d - b * c; }

  constexpr Vec2 operator*(const Vec2& x) const {
    return Vec2{{a * x[0] + b * x[1], c * x[0] + d * x[1]}};
  }

  /// Solves M y = x by the adjugate formula. Caller checks det().
  constexpr Vec2 solve(const Vec2& x) const {
    const double inv = 1.0 / det();
    return Vec2{{inv * (d * x[0] - b * x[1]), inv * (a * x[1] - c * x[0])}};
  }
};

}  // namespace scopesim
