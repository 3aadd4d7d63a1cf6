#include "magic/retarget.hpp"

#include <algorithm>

namespace magic {

namespace {

constexpr double kAxisTol = 1e-9;

ArmChain reflect_chain(const ArmChain& chain, const PlaneSpec& plane) {
    ArmChain out = chain;
    for (Vec3& j : out.joints) j = reflect_point(j, plane);
    return out;
}

Vec3 reflect_direction(const Vec3& v, const PlaneSpec& plane) {
    return v - 2.0 * dot(v, plane.normal) * plane.normal;
}

BodyPose translate(const BodyPose& pose, const Vec3& delta) {
    BodyPose out = pose;
    out.root += delta;
    out.head += delta;
    for (Vec3& j : out.left_arm.joints) j += delta;
    for (Vec3& j : out.right_arm.joints) j += delta;
    return out;
}

}  // namespace

Vec3 WorkspaceFrame::to_local(const Vec3& p) const {
    const Vec3 rel = p - table_center;
    return {dot(rel, lateral()), dot(rel, up), dot(rel, forward)};
}

Vec3 WorkspaceFrame::from_local(const Vec3& local) const {
    return table_center + local.x * lateral() + local.y * up + local.z * forward;
}

bool WorkspaceFrame::in_workspace(const Vec3& p) const {
    const Vec3 l = to_local(p);
    return l.x >= workspace_min.x && l.x <= workspace_max.x && l.y >= workspace_min.y &&
           l.y <= workspace_max.y && l.z >= workspace_min.z && l.z <= workspace_max.z;
}

void WorkspaceFrame::validate() const {
    if (std::abs(norm(forward) - 1.0) > kAxisTol || std::abs(norm(up) - 1.0) > kAxisTol) {
        throw std::invalid_argument("WorkspaceFrame: forward and up must be unit vectors");
    }
    if (std::abs(dot(forward, up)) > kAxisTol) {
        throw std::invalid_argument("WorkspaceFrame: forward must be perpendicular to up");
    }
    if (!(table_size.x > 0.0 && table_size.y > 0.0 && table_size.z > 0.0)) {
        throw std::invalid_argument("WorkspaceFrame: table dimensions must be positive");
    }
}

BodyPose mirror_pose(const BodyPose& pose, const MirrorSpec& spec) {
    BodyPose out;
    out.root = reflect_point(pose.root, spec.plane);
    out.head = reflect_point(pose.head, spec.plane);
    // The reflected skeleton is a mirror image: the chain that was the right
    // arm now sits on the figure's anatomical left.
    out.left_arm = reflect_chain(pose.right_arm, spec.plane);
    out.right_arm = reflect_chain(pose.left_arm, spec.plane);
    out.facing = reflect_direction(pose.facing, spec.plane);
    return out;
}

CorrectionVector compute_correction(const Vec3& local_fingertip, const Vec3& mirrored_fingertip) {
    return {local_fingertip - mirrored_fingertip};
}

AvatarPlacement solve_placement(const WorkspaceFrame& frame, const Vec3& default_stance,
                                const Vec3& shoulder_offset, double arm_reach) {
    frame.validate();
    if (!(arm_reach > 0.0)) throw std::invalid_argument("solve_placement: arm reach must be positive");

    AvatarPlacement placement;
    placement.default_stance = default_stance;
    placement.reach_budget = 0.9 * arm_reach;

    const double half_depth = frame.table_size.y / 2.0;
    const double s_avatar = half_depth;    // avatar-side edge, forward coordinate
    const double s_opposite = -half_depth;

    const double r_default = dot(default_stance - frame.table_center, frame.forward);
    const Vec3 shoulder_default = default_stance + shoulder_offset;
    const Vec3 edge = frame.table_center + s_opposite * frame.forward;

    const Vec3 w = edge - shoulder_default;
    const double proj = dot(w, frame.forward);
    const double off_axis_sq = norm2(w) - proj * proj;
    const double budget_sq = placement.reach_budget * placement.reach_budget;
    if (budget_sq <= off_axis_sq) {
        throw std::invalid_argument(
            "solve_placement: reach budget cannot span the shoulder offset to the far edge");
    }
    // Root shift putting the shoulder at exactly reach_budget from the
    // opposite edge, on the avatar's side of it.
    const double shift = proj + std::sqrt(budget_sq - off_axis_sq);
    const double r_far = r_default + shift;

    placement.m = (r_far - r_default) / (s_opposite - s_avatar);
    placement.b = r_default - placement.m * s_avatar;
    return placement;
}

Vec3 place_avatar(const Vec3& p_f, const WorkspaceFrame& frame, const AvatarPlacement& placement) {
    const double half_depth = frame.table_size.y / 2.0;
    const double s = std::clamp(dot(p_f - frame.table_center, frame.forward), -half_depth, half_depth);
    const double r = placement.m * s + placement.b;
    const double r_default = dot(placement.default_stance - frame.table_center, frame.forward);
    return placement.default_stance + (r - r_default) * frame.forward;
}

BodyPose retarget_pose(const BodyPose& remote_pose_local, const WorkspaceFrame& frame,
                       const AvatarPlacement& placement, const RetargetOptions& opts) {
    frame.validate();
    const MirrorSpec mirror = MirrorSpec::for_frame(frame);
    const BodyPose mirrored = mirror_pose(remote_pose_local, mirror);

    // After mirroring, the remote left arm is the avatar's right arm.
    const Vec3 tip_left_local = remote_pose_local.left_arm.fingertip();
    const Vec3 tip_right_local = remote_pose_local.right_arm.fingertip();
    const bool left_points = frame.in_workspace(tip_left_local);
    const bool right_points = frame.in_workspace(tip_right_local);
    if (!left_points && !right_points) {
        return mirrored;  // no workspace-referential gesture: mirror only
    }

    // The corrected fingertip of each pointing arm is the collaborator's own
    // local fingertip (mirrored tip plus correction vector, exactly).
    auto corrected = [](const Vec3& local_tip, const Vec3& mirrored_tip) {
        return mirrored_tip + compute_correction(local_tip, mirrored_tip).t;
    };
    const Vec3 target_right = corrected(tip_left_local, mirrored.right_arm.fingertip());
    const Vec3 target_left = corrected(tip_right_local, mirrored.left_arm.fingertip());

    // Stance follows the most demanding pointing fingertip (smallest forward
    // coordinate, i.e. deepest into the opposite side).
    Vec3 drive = left_points ? target_right : target_left;
    if (left_points && right_points &&
        dot(target_left - frame.table_center, frame.forward) < dot(drive - frame.table_center, frame.forward)) {
        drive = target_left;
    }
    const Vec3 new_root = place_avatar(drive, frame, placement);
    const double r_new = dot(new_root - frame.table_center, frame.forward);
    const double r_mirrored = dot(mirrored.root - frame.table_center, frame.forward);
    BodyPose out = translate(mirrored, (r_new - r_mirrored) * frame.forward);

    FabrikOptions fabrik;
    fabrik.tol = opts.ik_tol;
    fabrik.max_iter = opts.max_iter;
    fabrik.bend_hint = cross(out.facing, frame.up);

    auto solve_arm = [&](ArmChain& arm, const Vec3& target) {
        const double required = distance(target, arm.shoulder());
        const double limit = reach(arm);
        if (required > limit) throw UnreachableTarget(required - limit);
        arm = fabrik_solve(arm, target, fabrik);
    };
    if (left_points) solve_arm(out.right_arm, target_right);
    if (right_points) solve_arm(out.left_arm, target_left);
    return out;
}

}  // namespace magic
