#include <doctest.h>

#include <magic/kinematics.hpp>
#include <magic/rng.hpp>

#include <cmath>
#include <cstdint>

using namespace magic;

namespace {

ArmChain demo_arm() {
    return ArmChain::from_joints({0, 0, 0}, {0.30, 0, 0}, {0.30, -0.27, 0}, {0.30, -0.27, 0.10});
}

double max_bone_drift(const ArmChain& solved, const ArmChain& original) {
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double len = distance(solved.joints[i], solved.joints[i + 1]);
        worst = std::max(worst, std::abs(len - original.bone_lengths[i]));
    }
    return worst;
}

}  // namespace

TEST_SUITE("kinematics") {

TEST_CASE("reach is the bone-length sum") {
    const ArmChain arm = demo_arm();
    CHECK(arm.bone_lengths[0] == doctest::Approx(0.30).epsilon(1e-12));
    CHECK(arm.bone_lengths[1] == doctest::Approx(0.27).epsilon(1e-12));
    CHECK(arm.bone_lengths[2] == doctest::Approx(0.10).epsilon(1e-12));
    CHECK(reach(arm) == doctest::Approx(0.67).epsilon(1e-12));
}

TEST_CASE("a straight arm puts the fingertip at reach distance") {
    const ArmChain arm =
        ArmChain::from_joints({1, 2, 3}, {1.3, 2, 3}, {1.57, 2, 3}, {1.67, 2, 3});
    CHECK(distance(arm.fingertip(), arm.shoulder()) ==
          doctest::Approx(reach(arm)).epsilon(1e-12));
}

TEST_CASE("zero-length bones are rejected") {
    CHECK_THROWS_AS(ArmChain::from_joints({0, 0, 0}, {0, 0, 0}, {1, 0, 0}, {2, 0, 0}),
                    std::invalid_argument);
}

TEST_CASE("non-finite targets are rejected") {
    const ArmChain arm = demo_arm();
    CHECK_THROWS_AS(fabrik_solve(arm, {std::nan(""), 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(fabrik_solve(arm, {0, std::numeric_limits<double>::infinity(), 0}),
                    std::invalid_argument);
}

TEST_CASE("a target on the current fingertip leaves the chain untouched") {
    const ArmChain arm = demo_arm();
    const ArmChain solved = fabrik_solve(arm, arm.fingertip());
    for (int i = 0; i < 4; ++i) CHECK(solved.joints[i] == arm.joints[i]);
}

TEST_CASE("a target at exactly full reach straightens the chain") {
    const ArmChain arm = demo_arm();
    const Vec3 target = arm.shoulder() + Vec3{reach(arm), 0, 0};
    const ArmChain solved = fabrik_solve(arm, target);
    // collinear along +x, every joint at its cumulative bone distance
    double cum = 0.0;
    for (int i = 1; i < 4; ++i) {
        cum += arm.bone_lengths[i - 1];
        CHECK(distance(solved.joints[i], arm.shoulder() + Vec3{cum, 0, 0}) <= 1e-12);
    }
}

TEST_CASE("unreachable targets produce the exact straightened chain") {
    const ArmChain arm = demo_arm();
    const Vec3 dir = normalized(Vec3{1.0, 2.0, -0.5});
    const Vec3 target = arm.shoulder() + 5.0 * dir;
    const ArmChain solved = fabrik_solve(arm, target);
    double cum = 0.0;
    for (int i = 1; i < 4; ++i) {
        cum += arm.bone_lengths[i - 1];
        CHECK(distance(solved.joints[i], arm.shoulder() + cum * dir) <= 1e-9);
    }
    CHECK(distance(solved.fingertip(), arm.shoulder()) ==
          doctest::Approx(reach(arm)).epsilon(1e-12));
}

TEST_CASE("random reachable targets converge with preserved bones") {
    const ArmChain arm = demo_arm();
    const double r = reach(arm);
    RngStream rng(313);
    for (int i = 0; i < 1000; ++i) {
        // Stay away from the very edge and the shoulder itself.
        const Vec3 target = arm.shoulder() + rng.unit_vector() * rng.uniform(0.05 * r, 0.98 * r);
        const ArmChain solved = fabrik_solve(arm, target);
        CHECK(distance(solved.fingertip(), target) <= 1e-3);
        CHECK(max_bone_drift(solved, arm) <= 1e-6);
        CHECK(solved.shoulder() == arm.shoulder());
    }
}

TEST_CASE("solving is bit-deterministic") {
    const ArmChain arm = demo_arm();
    RngStream rng(99);
    for (int i = 0; i < 50; ++i) {
        const Vec3 target = arm.shoulder() + rng.unit_vector() * rng.uniform(0.1, 0.6);
        const ArmChain a = fabrik_solve(arm, target);
        const ArmChain b = fabrik_solve(arm, target);
        for (int j = 0; j < 4; ++j) CHECK(a.joints[j] == b.joints[j]);
    }
}

TEST_CASE("a straight chain can fold back to a closer target on its own axis") {
    const ArmChain straight =
        ArmChain::from_joints({0, 0, 0}, {0.3, 0, 0}, {0.6, 0, 0}, {0.7, 0, 0});
    const Vec3 target{0.35, 0, 0};  // on the +x axis, well inside reach
    SUBCASE("default perpendicular seed") {
        const ArmChain solved = fabrik_solve(straight, target);
        CHECK(distance(solved.fingertip(), target) <= 1e-3);
        CHECK(max_bone_drift(solved, straight) <= 1e-6);
    }
    SUBCASE("explicit bend hint") {
        FabrikOptions opts;
        opts.bend_hint = {0, 0, 1};
        const ArmChain solved = fabrik_solve(straight, target, opts);
        CHECK(distance(solved.fingertip(), target) <= 1e-3);
        // the seeded bend must follow the hint: elbow displaced toward +z
        CHECK(solved.elbow().z > 0.0);
    }
}

TEST_CASE("tighter tolerance still converges within the iteration budget") {
    const ArmChain arm = demo_arm();
    RngStream rng(2718);
    FabrikOptions opts;
    opts.tol = 1e-6;
    opts.max_iter = 150;
    for (int i = 0; i < 200; ++i) {
        const Vec3 target = arm.shoulder() + rng.unit_vector() * rng.uniform(0.05, 0.62);
        const ArmChain solved = fabrik_solve(arm, target, opts);
        CHECK(distance(solved.fingertip(), target) <= 1e-6);
        CHECK(max_bone_drift(solved, arm) <= 1e-6);
    }
}

TEST_CASE("the shoulder never moves") {
    const ArmChain arm = demo_arm();
    RngStream rng(414);
    for (int i = 0; i < 200; ++i) {
        const Vec3 target{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const ArmChain solved = fabrik_solve(arm, target);
        CHECK(solved.shoulder() == arm.shoulder());
    }
}

}  // TEST_SUITE
