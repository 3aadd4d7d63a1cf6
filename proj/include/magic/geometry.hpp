#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace magic {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
inline Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
inline Vec3 operator*(const Vec3& v, double s) { return s * v; }
inline Vec3 operator/(const Vec3& v, double s) { return {v.x / s, v.y / s, v.z / s}; }
inline Vec3& operator+=(Vec3& a, const Vec3& b) { a = a + b; return a; }
inline Vec3& operator-=(Vec3& a, const Vec3& b) { a = a - b; return a; }
inline bool operator==(const Vec3& a, const Vec3& b) { return a.x == b.x && a.y == b.y && a.z == b.z; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm2(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(norm2(v)); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }
inline bool is_finite(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

/// Unit vector along v. Throws if |v| is zero (no meaningful direction).
inline Vec3 normalized(const Vec3& v) {
    const double n = norm(v);
    if (n == 0.0) throw std::invalid_argument("normalized: zero-length vector");
    return v / n;
}

/// Plane through `point` with unit `normal`.
struct PlaneSpec {
    Vec3 point;
    Vec3 normal;
};

inline double signed_distance(const PlaneSpec& plane, const Vec3& p) {
    return dot(p - plane.point, plane.normal);
}

/// Triangulated surface. Carrier for hulls and intersection solids.
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;

    bool empty() const { return triangles.empty(); }
};

/// Topological closedness: every index in range, no degenerate index triples,
/// and every undirected edge shared by exactly two triangles with opposite
/// orientation. Exact index comparison, no geometric epsilon.
bool is_closed(const TriMesh& mesh);

/// Mirror image of p across the plane. Involution; points on the plane are fixed.
Vec3 reflect_point(const Vec3& p, const PlaneSpec& plane);

/// Signed volume of the tetrahedron (origin, a, b, c): (a . (b x c)) / 6.
double signed_origin_tetra_volume(const Vec3& a, const Vec3& b, const Vec3& c);

/// Enclosed volume of a closed mesh, as the absolute sum of signed
/// origin-tetra volumes over all triangles. Throws on a non-closed mesh.
double mesh_volume(const TriMesh& mesh);

}  // namespace magic
