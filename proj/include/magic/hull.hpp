#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "magic/geometry.hpp"

namespace magic {

/// Raised when a point set has no 3D extent: fewer than 4 points, or all
/// points collinear/coplanar within tolerance. Callers decide policy.
struct DegenerateOutline : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Convex hull of a point set. The mesh is closed with outward winding and
/// its vertices are a subset of the source points.
struct ConvexHull {
    TriMesh mesh;
    int source_point_count = 0;
};

/// Outward-oriented plane of each triangle of a convex mesh.
std::vector<PlaneSpec> face_planes(const TriMesh& convex_mesh);

/// QuickHull. Deterministic: the initial simplex comes from coordinate-axis
/// extreme points, all ties broken by lowest input index.
/// Throws DegenerateOutline for < 4 points or coplanar input (tol 1e-9 m).
ConvexHull convex_hull(std::span<const Vec3> points);

/// Intersection solid of two convex hulls, built by clipping hull `a` against
/// every face plane of hull `b`. Returns an empty mesh when disjoint or when
/// the residual volume is below 1e-12 m^3.
TriMesh intersect_convex(const ConvexHull& a, const ConvexHull& b);

/// True iff p lies on the non-positive side of every face plane within tol.
bool hull_contains(const ConvexHull& hull, const Vec3& p, double tol);

}  // namespace magic
