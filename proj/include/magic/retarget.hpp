#pragma once

#include <stdexcept>

#include "magic/kinematics.hpp"

namespace magic {

/// Shared table frame. `forward` runs from the local user toward the far
/// side; `lateral` completes a right-handed (lateral, up, forward) basis.
/// The workspace volume is an axis box in that basis, relative to the center
/// of the tabletop, inside which hands count as pointing.
struct WorkspaceFrame {
    Vec3 table_center;   // center of the tabletop surface
    Vec3 table_size;     // width (lateral), depth (forward), height
    Vec3 forward;
    Vec3 up;
    Vec3 workspace_min;  // local (lateral, vertical, forward) bounds
    Vec3 workspace_max;

    Vec3 lateral() const { return cross(up, forward); }
    Vec3 to_local(const Vec3& p) const;
    Vec3 from_local(const Vec3& local) const;
    bool in_workspace(const Vec3& p) const;
    void validate() const;
};

/// Vertical transverse mirror plane through the table center.
struct MirrorSpec {
    PlaneSpec plane;

    static MirrorSpec for_frame(const WorkspaceFrame& frame) {
        return {{frame.table_center, frame.forward}};
    }
};

/// Forward-axis stance map: root forward-coordinate = m * s + b, where s is
/// the fingertip forward-coordinate clamped to the table extent.
struct AvatarPlacement {
    double m = 0.0;
    double b = 0.0;
    Vec3 default_stance;
    double reach_budget = 0.0;  // 0.9 x arm reach
};

/// Fingertip correction: difference between the collaborator's local
/// fingertip and the avatar's fingertip after mirroring.
struct CorrectionVector {
    Vec3 t;
};

/// A fingertip inside the workspace that stays beyond arm reach even after
/// stance placement. Carries the residual distance past full reach.
struct UnreachableTarget : std::runtime_error {
    double residual;
    explicit UnreachableTarget(double r)
        : std::runtime_error("retarget: workspace target beyond reach"), residual(r) {}
};

/// Reflect a full pose across the mirror plane. Arm labels swap so each chain
/// stays anatomically named on the mirror-imaged skeleton; the observer's
/// left-right reading of the gesture is unchanged.
BodyPose mirror_pose(const BodyPose& pose, const MirrorSpec& spec);

CorrectionVector compute_correction(const Vec3& local_fingertip, const Vec3& mirrored_fingertip);

/// Solve the placement coefficients from the two table-edge boundary
/// conditions: avatar-side edge maps to the default stance, opposite edge to
/// the stance putting the mid-shoulder at exactly reach_budget from that
/// edge. Throws if the budget cannot span the shoulder's off-axis offset.
AvatarPlacement solve_placement(const WorkspaceFrame& frame, const Vec3& default_stance,
                                const Vec3& shoulder_offset, double arm_reach);

/// New root position for a fingertip at p_f. Affine along the forward axis;
/// lateral and vertical stance come from the default stance unchanged.
Vec3 place_avatar(const Vec3& p_f, const WorkspaceFrame& frame, const AvatarPlacement& placement);

struct RetargetOptions {
    double ik_tol = 1e-3;
    int max_iter = 100;
};

/// Full manipulation: mirror the remote pose, and for every arm whose
/// fingertip lies inside the workspace volume, move the stance per the
/// placement map and re-solve that arm so the avatar fingertip lands on the
/// remote collaborator's local fingertip. Arms resting outside the workspace
/// are only mirrored.
BodyPose retarget_pose(const BodyPose& remote_pose_local, const WorkspaceFrame& frame,
                       const AvatarPlacement& placement, const RetargetOptions& opts = {});

}  // namespace magic
