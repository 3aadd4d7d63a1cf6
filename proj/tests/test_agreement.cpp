#include <doctest.h>

#include <magic/agreement.hpp>
#include <magic/rng.hpp>

#include <cmath>
#include <vector>

#include "support/shapes.hpp"
#include "support/voxel_oracle.hpp"

using namespace magic;

namespace {

OutlineTrace trace_of(const std::vector<Vec3>& pts, double dt = 0.05) {
    OutlineTrace tr;
    for (size_t i = 0; i < pts.size(); ++i)
        tr.samples.push_back({static_cast<double>(i) * dt, pts[i]});
    return tr;
}

// Evenly wound spherical spiral, independent of any library sampling.
std::vector<Vec3> sphere_spiral(const Vec3& c, double radius, int n) {
    std::vector<Vec3> pts;
    const double golden = 3.14159265358979323846 * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        const double y = 1.0 - 2.0 * (i + 0.5) / n;
        const double rxy = std::sqrt(std::max(0.0, 1.0 - y * y));
        const double phi = golden * i;
        pts.push_back(c + radius * Vec3{rxy * std::cos(phi), y, rxy * std::sin(phi)});
    }
    return pts;
}

OutlineTrace jittered_blob(RngStream& rng, const Vec3& c, double radius, int n) {
    std::vector<Vec3> pts;
    for (int i = 0; i < n; ++i) pts.push_back(c + rng.unit_vector() * rng.uniform(0.2 * radius, radius));
    return trace_of(pts);
}

}  // namespace

TEST_SUITE("agreement") {

TEST_CASE("trace validation rejects empty and unsorted input") {
    CHECK_THROWS_AS(OutlineTrace{}.validate(), std::invalid_argument);
    OutlineTrace equal;
    equal.samples = {{0.0, {0, 0, 0}}, {0.0, {1, 0, 0}}};
    CHECK_THROWS_AS(equal.validate(), std::invalid_argument);
    OutlineTrace backwards;
    backwards.samples = {{0.2, {0, 0, 0}}, {0.1, {1, 0, 0}}};
    CHECK_THROWS_AS(backwards.validate(), std::invalid_argument);
    OutlineTrace fine;
    fine.samples = {{0.0, {0, 0, 0}}, {0.1, {1, 0, 0}}};
    CHECK_NOTHROW(fine.validate());
}

TEST_CASE("outlined cube of 10 cm encloses a liter fraction") {
    const OutlineTrace tr = trace_of(shapes::cube_corners({0.3, 1.0, 0.1}, 0.1));
    const ConvexHull hull = outline_hull(tr);
    CHECK(mesh_volume(hull.mesh) == doctest::Approx(1e-3).epsilon(1e-9));
}

TEST_CASE("too few or flat samples are degenerate") {
    CHECK_THROWS_AS(outline_hull(trace_of({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}})), DegenerateOutline);
    std::vector<Vec3> flat;
    for (int i = 0; i < 12; ++i) flat.push_back({0.1 * i, 0.05 * (i % 4), 0.2});
    CHECK_THROWS_AS(outline_hull(trace_of(flat)), DegenerateOutline);
}

TEST_CASE("spiral outlines stay inside their sphere and densify toward it") {
    const Vec3 c{0.1, 0.9, -0.2};
    const double r = 0.12;
    const double sphere_vol = 4.0 / 3.0 * 3.14159265358979323846 * r * r * r;
    double prev = 0.0;
    for (int n : {50, 200, 2000}) {
        const ConvexHull hull = outline_hull(trace_of(sphere_spiral(c, r, n)));
        const double v = mesh_volume(hull.mesh);
        CHECK(v <= sphere_vol + 1e-12);
        CHECK(v > prev);
        prev = v;
    }
    CHECK(prev >= 0.97 * sphere_vol);
}

TEST_CASE("identical traces agree perfectly") {
    const OutlineTrace tr = trace_of(sphere_spiral({0, 1, 0}, 0.1, 60));
    const AgreementResult res = pointing_agreement(tr, tr);
    CHECK(res.j == 1.0);
    CHECK(res.v_overlap == res.v_dem);
    CHECK(res.v_int == res.v_dem);
    CHECK_FALSE(res.degenerate_dem);
    CHECK_FALSE(res.degenerate_int);
}

TEST_CASE("distant outlines agree not at all") {
    const OutlineTrace a = trace_of(shapes::cube_corners({0, 0, 0}, 1.0));
    const OutlineTrace b = trace_of(shapes::cube_corners({5, 0, 0}, 1.0));
    const AgreementResult res = pointing_agreement(a, b);
    CHECK(res.j == 0.0);
    CHECK(res.v_overlap == 0.0);
    CHECK(res.v_dem == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.v_int == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a half-shifted copy agrees by one third") {
    const OutlineTrace a = trace_of(shapes::cube_corners({0, 0, 0}, 1.0));
    const OutlineTrace b = trace_of(shapes::cube_corners({0.5, 0, 0}, 1.0));
    const AgreementResult res = pointing_agreement(a, b);
    CHECK(std::abs(res.j - 1.0 / 3.0) <= 0.02);
    CHECK(std::abs(res.j - 1.0 / 3.0) <= 1e-9);  // hulls here are exact boxes

    // cross-check every volume against the voxel reference
    const TriMesh ma = shapes::cube_mesh({0, 0, 0}, 1.0);
    const TriMesh mb = shapes::cube_mesh({0.5, 0, 0}, 1.0);
    const double ref_overlap = oracle::intersection_volume(ma, mb);
    const double ref_j =
        ref_overlap / (oracle::mesh_volume(ma) + oracle::mesh_volume(mb) - ref_overlap);
    CHECK(std::abs(res.j - ref_j) <= 0.02);
}

TEST_CASE("a nested outline agrees by the volume ratio") {
    const OutlineTrace big = trace_of(shapes::cube_corners({0, 0, 0}, 1.0));
    const OutlineTrace small = trace_of(shapes::cube_corners({0.1, 0.05, -0.2}, 0.2));
    const AgreementResult res = pointing_agreement(big, small);
    CHECK(std::abs(res.j - 0.008) <= 1e-9);
    CHECK(std::abs(res.v_overlap - res.v_int) <= 1e-12);
}

TEST_CASE("agreement is symmetric, bounded, and self-consistent") {
    RngStream rng(6006);
    for (int trial = 0; trial < 25; ++trial) {
        const Vec3 ca{rng.uniform(-0.2, 0.2), rng.uniform(0.8, 1.2), rng.uniform(-0.2, 0.2)};
        const Vec3 cb = ca + rng.unit_vector() * rng.uniform(0.0, 0.2);
        const OutlineTrace a = jittered_blob(rng, ca, rng.uniform(0.05, 0.15), 40);
        const OutlineTrace b = jittered_blob(rng, cb, rng.uniform(0.05, 0.15), 40);

        const AgreementResult ab = pointing_agreement(a, b);
        const AgreementResult ba = pointing_agreement(b, a);
        CHECK(std::abs(ab.j - ba.j) <= 1e-9);
        CHECK(ab.j >= 0.0);
        CHECK(ab.j <= 1.0);
        CHECK(ab.v_overlap <= std::min(ab.v_dem, ab.v_int) + 1e-9);
        if (ab.j > 0.0) {
            const double recomputed = ab.v_overlap / (ab.v_dem + ab.v_int - ab.v_overlap);
            CHECK(std::abs(ab.j - recomputed) <= 1e-9);
        }
        CHECK(pointing_agreement(a, a).j == 1.0);
    }
}

TEST_CASE("agreement is rigid-motion invariant") {
    RngStream rng(4242);
    const OutlineTrace a = jittered_blob(rng, {0, 1, 0}, 0.12, 50);
    const OutlineTrace b = jittered_blob(rng, {0.05, 1.02, -0.04}, 0.10, 50);
    const double j0 = pointing_agreement(a, b).j;
    REQUIRE(j0 > 0.0);

    for (int trial = 0; trial < 10; ++trial) {
        const Vec3 axis = rng.unit_vector();
        const double angle = rng.uniform(0, 6.28);
        const Vec3 shift{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
        auto moved = [&](const OutlineTrace& tr) {
            OutlineTrace out = tr;
            for (auto& s : out.samples) s.fingertip = shapes::rotate(s.fingertip, axis, angle) + shift;
            return out;
        };
        CHECK(std::abs(pointing_agreement(moved(a), moved(b)).j - j0) <= 1e-6);
    }
}

TEST_CASE("degenerate outlines score zero with the matching flag") {
    const OutlineTrace good = trace_of(shapes::cube_corners({0, 0, 0}, 0.5));
    const OutlineTrace flat = trace_of({{0, 0, 0}, {0.1, 0, 0}, {0, 0.1, 0}, {0.1, 0.1, 0}});

    const AgreementResult dem_bad = pointing_agreement(flat, good);
    CHECK(dem_bad.j == 0.0);
    CHECK(dem_bad.degenerate_dem);
    CHECK_FALSE(dem_bad.degenerate_int);

    const AgreementResult int_bad = pointing_agreement(good, flat);
    CHECK(int_bad.j == 0.0);
    CHECK(int_bad.degenerate_int);
    CHECK_FALSE(int_bad.degenerate_dem);

    const AgreementResult both = pointing_agreement(flat, flat);
    CHECK(both.j == 0.0);
    CHECK(both.degenerate_dem);
    CHECK(both.degenerate_int);
}

}  // TEST_SUITE
