#pragma once

#include <cmath>
#include <complex>
#include <vector>

namespace wtl {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }
  std::complex<double> complex() const { return {x, y}; }
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Closed planar polygon, vertices in counter-clockwise order. Edge i runs
/// from vertex i to vertex i+1 (cyclically).
struct PlanarPolygon {
  std::vector<Vec2> vertices;

  int size() const { return static_cast<int>(vertices.size()); }
  Vec2 vertex(int i) const {
    const int n = size();
    return vertices[static_cast<size_t>(((i % n) + n) % n)];
  }
  Vec2 edge(int i) const { return vertex(i + 1) - vertex(i); }

  double signed_area() const;
  /// Interior angle at vertex i, in (0, 2*pi).
  double interior_angle(int i) const;
  bool is_simple() const;
  bool contains(Vec2 p) const;
};

}  // namespace wtl
