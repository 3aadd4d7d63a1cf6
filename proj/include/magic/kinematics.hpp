#pragma once

#include <array>

#include "magic/geometry.hpp"

namespace magic {

/// Pointing arm as a positional chain: shoulder, elbow, wrist, fingertip.
/// Bone lengths are fixed at construction; every solve preserves them.
struct ArmChain {
    std::array<Vec3, 4> joints{};
    std::array<double, 3> bone_lengths{};

    static ArmChain from_joints(const Vec3& shoulder, const Vec3& elbow, const Vec3& wrist,
                                const Vec3& fingertip);

    const Vec3& shoulder() const { return joints[0]; }
    const Vec3& elbow() const { return joints[1]; }
    const Vec3& wrist() const { return joints[2]; }
    const Vec3& fingertip() const { return joints[3]; }
};

/// Total arm length (sum of bone lengths).
double reach(const ArmChain& chain);

struct FabrikOptions {
    double tol = 1e-3;  // meters of fingertip error
    int max_iter = 100;
    // Bend seed for chains that start collinear with the target direction;
    // FABRIK cannot break that symmetry unaided. Zero picks a fixed
    // axis-derived perpendicular.
    Vec3 bend_hint{};
};

/// Iterative backward/forward positional solve with the shoulder pinned.
/// Reachable targets end with the fingertip within tol; unreachable targets
/// produce the fully straightened chain toward the target.
ArmChain fabrik_solve(const ArmChain& chain, const Vec3& target, const FabrikOptions& opts = {});

/// Stance, head and both arms of one tracked person or avatar.
struct BodyPose {
    Vec3 root;    // stance position on the floor
    Vec3 head;
    ArmChain left_arm;
    ArmChain right_arm;
    Vec3 facing;  // unit, horizontal
};

}  // namespace magic
