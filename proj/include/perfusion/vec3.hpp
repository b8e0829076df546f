#pragma once

#include <cmath>

namespace perfusion {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double c, const Vec3& v) { return {c * v.x, c * v.y, c * v.z}; }
inline Vec3 operator*(const Vec3& v, double c) { return c * v; }
inline Vec3 operator/(const Vec3& v, double c) { return {v.x / c, v.y / c, v.z / c}; }
inline Vec3& operator+=(Vec3& a, const Vec3& b) { a = a + b; return a; }
inline Vec3& operator-=(Vec3& a, const Vec3& b) { a = a - b; return a; }
inline Vec3 operator-(const Vec3& v) { return {-v.x, -v.y, -v.z}; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm2(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(norm2(v)); }
inline Vec3 normalized(const Vec3& v) { return v / norm(v); }
inline double dist(const Vec3& a, const Vec3& b) { return norm(a - b); }

/// Mirror image across the tissue boundary z = 0.
inline Vec3 reflect_z(const Vec3& v) { return {v.x, v.y, -v.z}; }

} // namespace perfusion
