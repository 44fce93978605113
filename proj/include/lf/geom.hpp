#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace lf {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

  constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  constexpr Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  constexpr double norm2() const { return dot(*this); }
  double dist(const Vec3& o) const { return (*this - o).norm(); }

  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

inline constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline Vec3 normalized(const Vec3& v) {
  double n = v.norm();
  return n > 0.0 ? v / n : Vec3{0, 0, 0};
}

// Column-major free 3x3 matrix; only what the rotation machinery needs.
struct Mat3 {
  // m[r][c]
  double m[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

  static constexpr Mat3 identity() { return Mat3{}; }

  Vec3 operator*(const Vec3& v) const {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
  }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        r.m[i][j] = 0.0;
        for (int k = 0; k < 3; ++k) r.m[i][j] += m[i][k] * o.m[k][j];
      }
    return r;
  }

  Mat3 transposed() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
    return r;
  }

  double det() const {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  }
};

// Closest distance from point p to segment [a,b].
inline double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  Vec3 ab = b - a;
  double denom = ab.norm2();
  if (denom <= 0.0) return p.dist(a);
  double t = std::clamp((p - a).dot(ab) / denom, 0.0, 1.0);
  return p.dist(a + ab * t);
}

// Closest distance between segments [a0,a1] and [b0,b1].
inline double segment_segment_distance(const Vec3& a0, const Vec3& a1,
                                       const Vec3& b0, const Vec3& b1) {
  // Standard clamped closest-point computation (Ericson, Real-Time Collision Detection).
  Vec3 d1 = a1 - a0, d2 = b1 - b0, r = a0 - b0;
  double A = d1.norm2(), E = d2.norm2(), F = d2.dot(r);
  double s = 0.0, t = 0.0;
  constexpr double kEps = 1e-30;
  if (A <= kEps && E <= kEps) return a0.dist(b0);
  if (A <= kEps) {
    t = std::clamp(F / E, 0.0, 1.0);
  } else {
    double C = d1.dot(r);
    if (E <= kEps) {
      s = std::clamp(-C / A, 0.0, 1.0);
    } else {
      double B = d1.dot(d2);
      double denom = A * E - B * B;
      if (denom > kEps)
        s = std::clamp((B * F - C * E) / denom, 0.0, 1.0);
      t = (B * s + F) / E;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-C / A, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((B - C) / A, 0.0, 1.0);
      }
    }
  }
  return (a0 + d1 * s).dist(b0 + d2 * t);
}

}  // namespace lf
