#include "magic/hull.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

namespace magic {

namespace {

constexpr double kDegenerateTol = 1e-9;  // collinear/coplanar rejection, meters
constexpr double kClipEps = 1e-9;        // plane-side classification, meters
constexpr double kSliverVolume = 1e-12;  // m^3, below this an intersection counts as empty

struct HullFace {
    int a, b, c;
    Vec3 normal;    // unit, outward
    double offset;  // plane: dot(normal, x) = offset
    bool alive = true;
    std::vector<int> outside;
};

double face_distance(const HullFace& f, const Vec3& p) { return dot(f.normal, p) - f.offset; }

HullFace make_face(std::span<const Vec3> pts, int a, int b, int c, const Vec3& opposite) {
    Vec3 n = cross(pts[b] - pts[a], pts[c] - pts[a]);
    if (dot(n, opposite - pts[a]) > 0.0) {
        std::swap(b, c);
        n = -n;
    }
    HullFace f;
    f.a = a;
    f.b = b;
    f.c = c;
    f.normal = normalized(n);
    f.offset = dot(f.normal, pts[a]);
    return f;
}

bool lex_less(const Vec3& a, const Vec3& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    return a.z < b.z;
}

std::uint64_t edge_key(int a, int b) {
    return (static_cast<std::uint64_t>(std::min(a, b)) << 32) | static_cast<std::uint64_t>(std::max(a, b));
}

// -------- convex-convex clipping --------

struct Poly {
    std::vector<Vec3> pts;
};

enum class Side { In, On, Out };

Side classify(double d, double eps) {
    if (d > eps) return Side::Out;
    if (d < -eps) return Side::In;
    return Side::On;
}

// Plane/edge intersection computed on lexicographically ordered endpoints so
// every face sharing the edge produces the bit-identical point.
Vec3 edge_plane_point(const Vec3& p, const Vec3& q, const PlaneSpec& plane) {
    const Vec3& a = lex_less(p, q) ? p : q;
    const Vec3& b = lex_less(p, q) ? q : p;
    const double da = signed_distance(plane, a);
    const double db = signed_distance(plane, b);
    const double t = da / (da - db);
    return a + t * (b - a);
}

struct VertexKey {
    std::uint64_t x, y, z;
    bool operator<(const VertexKey& o) const {
        if (x != o.x) return x < o.x;
        if (y != o.y) return y < o.y;
        return z < o.z;
    }
    bool operator==(const VertexKey& o) const { return x == o.x && y == o.y && z == o.z; }
};

VertexKey key_of(const Vec3& v) {
    return {std::bit_cast<std::uint64_t>(v.x), std::bit_cast<std::uint64_t>(v.y),
            std::bit_cast<std::uint64_t>(v.z)};
}

TriMesh polys_to_mesh(const std::vector<Poly>& polys) {
    TriMesh mesh;
    std::map<VertexKey, int> index;
    auto vid = [&](const Vec3& v) {
        auto [it, inserted] = index.try_emplace(key_of(v), static_cast<int>(mesh.vertices.size()));
        if (inserted) mesh.vertices.push_back(v);
        return it->second;
    };
    for (const auto& poly : polys) {
        if (poly.pts.size() < 3) continue;
        const int v0 = vid(poly.pts[0]);
        for (std::size_t i = 1; i + 1 < poly.pts.size(); ++i) {
            const int v1 = vid(poly.pts[i]);
            const int v2 = vid(poly.pts[i + 1]);
            if (v0 == v1 || v1 == v2 || v2 == v0) continue;
            mesh.triangles.push_back({v0, v1, v2});
        }
    }
    return mesh;
}

}  // namespace

std::vector<PlaneSpec> face_planes(const TriMesh& convex_mesh) {
    std::vector<PlaneSpec> planes;
    planes.reserve(convex_mesh.triangles.size());
    for (const auto& tri : convex_mesh.triangles) {
        const Vec3& a = convex_mesh.vertices[tri[0]];
        const Vec3& b = convex_mesh.vertices[tri[1]];
        const Vec3& c = convex_mesh.vertices[tri[2]];
        planes.push_back({a, normalized(cross(b - a, c - a))});
    }
    return planes;
}

ConvexHull convex_hull(std::span<const Vec3> points) {
    const int n = static_cast<int>(points.size());
    if (n < 4) throw DegenerateOutline("convex_hull: fewer than 4 points");
    for (const Vec3& p : points) {
        if (!is_finite(p)) throw std::invalid_argument("convex_hull: non-finite point");
    }

    double scale = 1.0;
    for (const Vec3& p : points) {
        scale = std::max({scale, std::abs(p.x), std::abs(p.y), std::abs(p.z)});
    }
    const double eps = 1e-10 * scale;

    // Initial simplex from axis-extreme points, ties to the lowest index.
    std::vector<int> extremes;
    for (int axis = 0; axis < 3; ++axis) {
        auto coord = [&](int i) { return axis == 0 ? points[i].x : (axis == 1 ? points[i].y : points[i].z); };
        int lo = 0, hi = 0;
        for (int i = 1; i < n; ++i) {
            if (coord(i) < coord(lo)) lo = i;
            if (coord(i) > coord(hi)) hi = i;
        }
        extremes.push_back(lo);
        extremes.push_back(hi);
    }
    std::sort(extremes.begin(), extremes.end());
    extremes.erase(std::unique(extremes.begin(), extremes.end()), extremes.end());

    int i0 = -1, i1 = -1;
    double best = -1.0;
    for (std::size_t a = 0; a < extremes.size(); ++a) {
        for (std::size_t b = a + 1; b < extremes.size(); ++b) {
            const double d = norm2(points[extremes[a]] - points[extremes[b]]);
            if (d > best) {
                best = d;
                i0 = extremes[a];
                i1 = extremes[b];
            }
        }
    }
    if (best < kDegenerateTol * kDegenerateTol) {
        throw DegenerateOutline("convex_hull: points are coincident");
    }

    const Vec3 axis_dir = points[i1] - points[i0];
    int i2 = -1;
    best = -1.0;
    for (int i = 0; i < n; ++i) {
        const double d = norm2(cross(axis_dir, points[i] - points[i0]));
        if (d > best) {
            best = d;
            i2 = i;
        }
    }
    if (best / norm2(axis_dir) < kDegenerateTol * kDegenerateTol) {
        throw DegenerateOutline("convex_hull: points are collinear");
    }

    const Vec3 base_normal = normalized(cross(axis_dir, points[i2] - points[i0]));
    int i3 = -1;
    best = -1.0;
    for (int i = 0; i < n; ++i) {
        const double d = std::abs(dot(base_normal, points[i] - points[i0]));
        if (d > best) {
            best = d;
            i3 = i;
        }
    }
    if (best < kDegenerateTol) {
        throw DegenerateOutline("convex_hull: points are coplanar");
    }

    std::vector<HullFace> faces;
    faces.push_back(make_face(points, i0, i1, i2, points[i3]));
    faces.push_back(make_face(points, i0, i1, i3, points[i2]));
    faces.push_back(make_face(points, i0, i2, i3, points[i1]));
    faces.push_back(make_face(points, i1, i2, i3, points[i0]));

    auto assign_point = [&](int pi, std::span<int> face_ids) -> int {
        int best_face = -1;
        double best_dist = eps;
        for (int fi : face_ids) {
            if (!faces[fi].alive) continue;
            const double d = face_distance(faces[fi], points[pi]);
            if (d > best_dist) {
                best_dist = d;
                best_face = fi;
            }
        }
        return best_face;
    };

    std::set<int> pending;
    {
        std::array<int, 4> ids = {0, 1, 2, 3};
        for (int i = 0; i < n; ++i) {
            if (i == i0 || i == i1 || i == i2 || i == i3) continue;
            const int f = assign_point(i, ids);
            if (f >= 0) faces[f].outside.push_back(i);
        }
        for (int f = 0; f < 4; ++f) {
            if (!faces[f].outside.empty()) pending.insert(f);
        }
    }

    while (!pending.empty()) {
        const int seed = *pending.begin();
        pending.erase(pending.begin());
        if (!faces[seed].alive || faces[seed].outside.empty()) continue;

        int apex = -1;
        double apex_dist = -1.0;
        for (int pi : faces[seed].outside) {
            const double d = face_distance(faces[seed], points[pi]);
            if (d > apex_dist || (d == apex_dist && pi < apex)) {
                apex_dist = d;
                apex = pi;
            }
        }

        // Adjacency over currently alive faces; the hull is edge-manifold at
        // every step, so each undirected edge joins exactly two faces.
        std::unordered_map<std::uint64_t, std::pair<int, int>> adjacency;
        adjacency.reserve(faces.size() * 3);
        for (int fi = 0; fi < static_cast<int>(faces.size()); ++fi) {
            if (!faces[fi].alive) continue;
            const HullFace& f = faces[fi];
            for (auto [u, v] : {std::pair{f.a, f.b}, std::pair{f.b, f.c}, std::pair{f.c, f.a}}) {
                auto [it, inserted] = adjacency.try_emplace(edge_key(u, v), std::pair{fi, -1});
                if (!inserted) it->second.second = fi;
            }
        }
        auto neighbor_of = [&](int fi, int u, int v) {
            const auto& pr = adjacency.at(edge_key(u, v));
            return pr.first == fi ? pr.second : pr.first;
        };

        // Visible region: flood fill from the seed face.
        std::vector<int> visible;
        std::vector<int> stack = {seed};
        std::set<int> seen = {seed};
        while (!stack.empty()) {
            const int fi = stack.back();
            stack.pop_back();
            visible.push_back(fi);
            const HullFace& f = faces[fi];
            for (auto [u, v] : {std::pair{f.a, f.b}, std::pair{f.b, f.c}, std::pair{f.c, f.a}}) {
                const int ni = neighbor_of(fi, u, v);
                if (ni < 0 || seen.count(ni)) continue;
                if (face_distance(faces[ni], points[apex]) > eps) {
                    seen.insert(ni);
                    stack.push_back(ni);
                }
            }
        }
        std::sort(visible.begin(), visible.end());

        // Horizon edges, directed as traversed by the visible face.
        std::vector<std::pair<int, int>> horizon;
        for (int fi : visible) {
            const HullFace& f = faces[fi];
            for (auto [u, v] : {std::pair{f.a, f.b}, std::pair{f.b, f.c}, std::pair{f.c, f.a}}) {
                const int ni = neighbor_of(fi, u, v);
                if (ni < 0 || !seen.count(ni)) horizon.push_back({u, v});
            }
        }

        std::vector<int> orphans;
        for (int fi : visible) {
            for (int pi : faces[fi].outside) {
                if (pi != apex) orphans.push_back(pi);
            }
            faces[fi].alive = false;
            faces[fi].outside.clear();
            pending.erase(fi);
        }

        std::vector<int> fresh;
        for (auto [u, v] : horizon) {
            HullFace f;
            f.a = u;
            f.b = v;
            f.c = apex;
            f.normal = normalized(cross(points[v] - points[u], points[apex] - points[u]));
            f.offset = dot(f.normal, points[u]);
            fresh.push_back(static_cast<int>(faces.size()));
            faces.push_back(std::move(f));
        }
        for (int pi : orphans) {
            const int f = assign_point(pi, fresh);
            if (f >= 0) faces[f].outside.push_back(pi);
        }
        for (int fi : fresh) {
            if (!faces[fi].outside.empty()) pending.insert(fi);
        }
    }

    // Compact alive faces into a mesh whose vertices are the used input points.
    ConvexHull hull;
    hull.source_point_count = n;
    std::vector<int> remap(n, -1);
    double signed_total = 0.0;
    for (const HullFace& f : faces) {
        if (!f.alive) continue;
        for (int idx : {f.a, f.b, f.c}) {
            if (remap[idx] < 0) {
                remap[idx] = static_cast<int>(hull.mesh.vertices.size());
                hull.mesh.vertices.push_back(points[idx]);
            }
        }
        hull.mesh.triangles.push_back({remap[f.a], remap[f.b], remap[f.c]});
        signed_total += signed_origin_tetra_volume(points[f.a], points[f.b], points[f.c]);
    }
    if (signed_total < 0.0) {
        for (auto& tri : hull.mesh.triangles) std::swap(tri[1], tri[2]);
    }
    return hull;
}

TriMesh intersect_convex(const ConvexHull& a, const ConvexHull& b) {
    std::vector<Poly> polys;
    polys.reserve(a.mesh.triangles.size());
    for (const auto& tri : a.mesh.triangles) {
        polys.push_back({{a.mesh.vertices[tri[0]], a.mesh.vertices[tri[1]], a.mesh.vertices[tri[2]]}});
    }

    for (const PlaneSpec& plane : face_planes(b.mesh)) {
        bool any_in = false, any_out = false;
        for (const Poly& poly : polys) {
            for (const Vec3& p : poly.pts) {
                switch (classify(signed_distance(plane, p), kClipEps)) {
                    case Side::In: any_in = true; break;
                    case Side::Out: any_out = true; break;
                    case Side::On: break;
                }
            }
        }
        if (!any_in) return {};      // nothing strictly inside: at most a sliver
        if (!any_out) continue;      // plane does not cut

        std::vector<Poly> kept;
        kept.reserve(polys.size() + 1);
        for (const Poly& poly : polys) {
            Poly out;
            const std::size_t m = poly.pts.size();
            for (std::size_t i = 0; i < m; ++i) {
                const Vec3& cur = poly.pts[i];
                const Vec3& nxt = poly.pts[(i + 1) % m];
                const Side sc = classify(signed_distance(plane, cur), kClipEps);
                const Side sn = classify(signed_distance(plane, nxt), kClipEps);
                if (sc != Side::Out) out.pts.push_back(cur);
                if ((sc == Side::In && sn == Side::Out) || (sc == Side::Out && sn == Side::In)) {
                    out.pts.push_back(edge_plane_point(cur, nxt, plane));
                }
            }
            // Collapse bit-identical consecutive points, cyclically.
            std::vector<Vec3> clean;
            for (const Vec3& p : out.pts) {
                if (clean.empty() || !(key_of(p) == key_of(clean.back()))) clean.push_back(p);
            }
            while (clean.size() > 1 && key_of(clean.front()) == key_of(clean.back())) clean.pop_back();
            out.pts = std::move(clean);
            if (out.pts.size() >= 3) kept.push_back(std::move(out));
        }

        // Cap: stitch the open boundary of the kept surface into loops and
        // add them reversed. Deriving the cap from unmatched directed edges
        // keeps the mesh closed even when the plane grazes faces of a, where
        // on-plane vertices may lie in the middle of the section.
        std::map<std::pair<VertexKey, VertexKey>, int> edge_count;
        std::map<VertexKey, Vec3> point_at_key;
        for (const Poly& poly : kept) {
            const std::size_t m = poly.pts.size();
            for (std::size_t i = 0; i < m; ++i) {
                const Vec3& p = poly.pts[i];
                const Vec3& q = poly.pts[(i + 1) % m];
                const VertexKey kp = key_of(p), kq = key_of(q);
                if (kp == kq) continue;
                ++edge_count[{kp, kq}];
                point_at_key.emplace(kp, p);
                point_at_key.emplace(kq, q);
            }
        }
        std::map<VertexKey, VertexKey> next_on_boundary;
        for (const auto& [edge, count] : edge_count) {
            (void)count;
            if (!edge_count.count({edge.second, edge.first})) {
                next_on_boundary.emplace(edge.first, edge.second);
            }
        }
        while (!next_on_boundary.empty()) {
            const VertexKey start = next_on_boundary.begin()->first;
            std::vector<Vec3> loop;
            VertexKey cur = start;
            bool closed_loop = false;
            while (true) {
                const auto it = next_on_boundary.find(cur);
                if (it == next_on_boundary.end()) break;
                loop.push_back(point_at_key.at(cur));
                cur = it->second;
                next_on_boundary.erase(it);
                if (cur == start) {
                    closed_loop = true;
                    break;
                }
            }
            if (closed_loop && loop.size() >= 3) {
                // Side polys traverse the boundary with their own winding; the
                // cap must use each shared edge in the opposite direction.
                std::reverse(loop.begin(), loop.end());
                kept.push_back({std::move(loop)});
            }
        }
        polys = std::move(kept);
        if (polys.empty()) return {};
    }

    TriMesh mesh = polys_to_mesh(polys);
    if (mesh.triangles.empty()) return {};
    if (!is_closed(mesh)) {
        throw std::runtime_error("intersect_convex: clipped mesh is not closed");
    }
    if (mesh_volume(mesh) < kSliverVolume) return {};
    return mesh;
}

bool hull_contains(const ConvexHull& hull, const Vec3& p, double tol) {
    for (const PlaneSpec& plane : face_planes(hull.mesh)) {
        if (signed_distance(plane, p) > tol) return false;
    }
    return true;
}

}  // namespace magic
