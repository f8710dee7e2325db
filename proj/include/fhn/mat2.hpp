#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace fhn {

using Vec2 = std::array<double, 2>;

[[nodiscard]] inline double dot(const Vec2& a, const Vec2& b) noexcept {
  return a[0] * b[0] + a[1] * b[1];
}

[[nodiscard]] inline double norm(const Vec2& a) noexcept { return std::hypot(a[0], a[1]); }

[[nodiscard]] inline double norm_sq(const Vec2& a) noexcept { return dot(a, a); }

[[nodiscard]] inline Vec2 operator+(const Vec2& a, const Vec2& b) noexcept {
  return {a[0] + b[0], a[1] + b[1]};
}

[[nodiscard]] inline Vec2 operator-(const Vec2& a, const Vec2& b) noexcept {
  return {a[0] - b[0], a[1] - b[1]};
}

[[nodiscard]] inline Vec2 operator*(double c, const Vec2& a) noexcept {
  return {c * a[0], c * a[1]};
}

/// Dense 2x2 matrix, row-major. Small enough that hand-rolled closed forms
/// beat a linear-algebra dependency.
struct Mat2 {
  double a11 = 0.0, a12 = 0.0;
  double a21 = 0.0, a22 = 0.0;

  [[nodiscard]] double trace() const noexcept { return a11 + a22; }
  [[nodiscard]] double det() const noexcept { return a11 * a22 - a12 * a21; }

  [[nodiscard]] Vec2 operator*(const Vec2& x) const noexcept {
    return {a11 * x[0] + a12 * x[1], a21 * x[0] + a22 * x[1]};
  }

  [[nodiscard]] Mat2 operator*(const Mat2& o) const noexcept {
    return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
            a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
  }

  [[nodiscard]] Mat2 operator-(const Mat2& o) const noexcept {
    return {a11 - o.a11, a12 - o.a12, a21 - o.a21, a22 - o.a22};
  }

  [[nodiscard]] Mat2 transpose() const noexcept { return {a11, a21, a12, a22}; }

  [[nodiscard]] Mat2 inverse() const {
    const double d = det();
    if (d == 0.0) throw std::domain_error("Mat2::inverse: singular matrix");
    return {a22 / d, -a12 / d, -a21 / d, a11 / d};
  }

  [[nodiscard]] double max_abs() const noexcept {
    return std::max(std::max(std::abs(a11), std::abs(a12)),
                    std::max(std::abs(a21), std::abs(a22)));
  }

  [[nodiscard]] static Mat2 identity() noexcept { return {1.0, 0.0, 0.0, 1.0}; }
  [[nodiscard]] static Mat2 diag(double d1, double d2) noexcept { return {d1, 0.0, 0.0, d2}; }
};

/// Largest singular value (operator 2-norm), via the closed-form largest
/// eigenvalue of MᵀM.
[[nodiscard]] inline double spectral_norm(const Mat2& m) noexcept {
  const Mat2 g = m.transpose() * m;  // symmetric PSD
  const double half_tr = 0.5 * (g.a11 + g.a22);
  const double half_diff = 0.5 * (g.a11 - g.a22);
  const double disc = std::sqrt(half_diff * half_diff + g.a12 * g.a21);
  const double lambda_max = std::max(0.0, half_tr + disc);
  return std::sqrt(lambda_max);
}

}  // namespace fhn
