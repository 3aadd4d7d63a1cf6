#include "magic/geometry.hpp"

#include <cstdint>
#include <unordered_map>

namespace magic {

namespace {

constexpr double kUnitNormalTol = 1e-9;

}  // namespace

bool is_closed(const TriMesh& mesh) {
    const int n = static_cast<int>(mesh.vertices.size());
    if (mesh.triangles.empty()) return false;

    // key: undirected edge, value: (count a<b, count a>b)
    std::unordered_map<std::uint64_t, std::pair<int, int>> edges;
    edges.reserve(mesh.triangles.size() * 3);

    for (const auto& tri : mesh.triangles) {
        for (int i = 0; i < 3; ++i) {
            const int a = tri[i];
            const int b = tri[(i + 1) % 3];
            if (a < 0 || a >= n || b < 0 || b >= n) return false;
            if (a == b) return false;
            const std::uint64_t key =
                (static_cast<std::uint64_t>(std::min(a, b)) << 32) | static_cast<std::uint64_t>(std::max(a, b));
            auto& counts = edges[key];
            (a < b ? counts.first : counts.second) += 1;
        }
    }
    for (const auto& [key, counts] : edges) {
        (void)key;
        if (counts.first != 1 || counts.second != 1) return false;
    }
    return true;
}

Vec3 reflect_point(const Vec3& p, const PlaneSpec& plane) {
    if (std::abs(norm(plane.normal) - 1.0) > kUnitNormalTol) {
        throw std::invalid_argument("reflect_point: plane normal must be unit length");
    }
    const double d = signed_distance(plane, p);
    return p - 2.0 * d * plane.normal;
}

double signed_origin_tetra_volume(const Vec3& a, const Vec3& b, const Vec3& c) {
    return dot(a, cross(b, c)) / 6.0;
}

double mesh_volume(const TriMesh& mesh) {
    if (!is_closed(mesh)) {
        throw std::invalid_argument("mesh_volume: mesh is not closed");
    }
    double total = 0.0;
    for (const auto& tri : mesh.triangles) {
        total += signed_origin_tetra_volume(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
    }
    return std::abs(total);
}

}  // namespace magic
