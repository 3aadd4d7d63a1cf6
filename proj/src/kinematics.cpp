#include "magic/kinematics.hpp"

namespace magic {

namespace {

Vec3 any_perpendicular(const Vec3& axis) {
    const Vec3 ref = std::abs(axis.x) < 0.9 * norm(axis) ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    return normalized(cross(axis, ref));
}

// Segment direction during a pass; coincident joints fall back to a fixed
// axis so folded chains cannot divide by zero.
Vec3 pass_dir(const Vec3& from, const Vec3& to) {
    const Vec3 d = to - from;
    const double n = norm(d);
    return n > 0.0 ? d / n : Vec3{1, 0, 0};
}

bool chain_collinear_with(const ArmChain& chain, const Vec3& dir) {
    for (int i = 1; i < 4; ++i) {
        const Vec3 rel = chain.joints[i] - chain.joints[0];
        if (norm(cross(dir, rel)) > 1e-9 * (norm(rel) + 1.0)) return false;
    }
    return true;
}

// Law-of-cosines pose in the plane spanned by the target direction and the
// bend perpendicular. Used when the iterative passes stall, which happens for
// distances near the fold limit |b1 + b2 - b0|; the construction keeps every
// bone length exact and lands the fingertip on the target up to rounding.
ArmChain planar_completion(const ArmChain& chain, const Vec3& target, const Vec3& axis,
                           const Vec3& perp) {
    const auto& b = chain.bone_lengths;
    const Vec3 shoulder = chain.shoulder();
    const double d = distance(target, shoulder);

    // Virtual length of the folded distal pair; any value in this interval
    // admits both triangles, the midpoint keeps both away from degeneracy.
    const double lo = std::max(std::abs(b[1] - b[2]), std::abs(b[0] - d));
    const double hi = std::min(b[1] + b[2], b[0] + d);
    if (lo > hi) return chain;  // target not representable; keep the iterate
    const double c = 0.5 * (lo + hi);

    auto unit_range = [](double v) { return std::clamp(v, -1.0, 1.0); };
    const double cos_a = unit_range((b[0] * b[0] + d * d - c * c) / (2.0 * b[0] * d));
    const double sin_a = std::sqrt(std::max(0.0, 1.0 - cos_a * cos_a));

    ArmChain out = chain;
    out.joints[1] = shoulder + b[0] * (cos_a * axis + sin_a * perp);

    const Vec3 w = target - out.joints[1];
    const double wn = norm(w);
    if (wn == 0.0) return chain;
    const Vec3 wh = w / wn;
    const Vec3 q = cross(cross(axis, perp), wh);  // in-plane, perpendicular to wh
    const double cos_b = unit_range((b[1] * b[1] + wn * wn - b[2] * b[2]) / (2.0 * b[1] * wn));
    const double sin_b = std::sqrt(std::max(0.0, 1.0 - cos_b * cos_b));
    out.joints[2] = out.joints[1] + b[1] * (cos_b * wh + sin_b * q);

    const Vec3 v = target - out.joints[2];
    const double vn = norm(v);
    out.joints[3] = vn > 0.0 ? out.joints[2] + b[2] * (v / vn) : target;
    return out;
}

}  // namespace

ArmChain ArmChain::from_joints(const Vec3& shoulder, const Vec3& elbow, const Vec3& wrist,
                               const Vec3& fingertip) {
    ArmChain chain;
    chain.joints = {shoulder, elbow, wrist, fingertip};
    for (int i = 0; i < 3; ++i) {
        chain.bone_lengths[i] = distance(chain.joints[i], chain.joints[i + 1]);
        if (!(chain.bone_lengths[i] > 0.0)) {
            throw std::invalid_argument("ArmChain: bone lengths must be positive");
        }
    }
    return chain;
}

double reach(const ArmChain& chain) {
    return chain.bone_lengths[0] + chain.bone_lengths[1] + chain.bone_lengths[2];
}

ArmChain fabrik_solve(const ArmChain& chain, const Vec3& target, const FabrikOptions& opts) {
    if (!is_finite(target)) throw std::invalid_argument("fabrik_solve: non-finite target");

    const Vec3 shoulder = chain.shoulder();
    const double total = reach(chain);
    const double dist_to_target = distance(target, shoulder);

    // Unreachable (or exactly at full extension): straighten toward the target.
    if (dist_to_target >= total) {
        ArmChain out = chain;
        const Vec3 dir = (target - shoulder) / dist_to_target;
        double cum = 0.0;
        for (int i = 0; i < 3; ++i) {
            cum += chain.bone_lengths[i];
            out.joints[i + 1] = shoulder + cum * dir;
        }
        return out;
    }

    if (distance(chain.fingertip(), target) <= opts.tol) return chain;

    ArmChain out = chain;
    Vec3 axis{1, 0, 0};
    Vec3 perp{0, 0, 1};
    if (dist_to_target > 0.0) {
        axis = (target - shoulder) / dist_to_target;
        const Vec3 p = opts.bend_hint - dot(opts.bend_hint, axis) * axis;
        perp = norm(p) > 1e-9 ? normalized(p) : any_perpendicular(axis);
        if (chain_collinear_with(out, target - shoulder)) {
            // Straight chain pointing at a closer target: seed an elbow bend.
            out.joints[1] += 0.25 * chain.bone_lengths[0] * perp;
        }
    }

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        // Backward: fingertip to target, walk toward the shoulder.
        out.joints[3] = target;
        for (int i = 2; i >= 0; --i) {
            const Vec3 dir = pass_dir(out.joints[i + 1], out.joints[i]);
            out.joints[i] = out.joints[i + 1] + chain.bone_lengths[i] * dir;
        }
        // Forward: re-pin the shoulder, walk back out.
        out.joints[0] = shoulder;
        for (int i = 0; i < 3; ++i) {
            const Vec3 dir = pass_dir(out.joints[i], out.joints[i + 1]);
            out.joints[i + 1] = out.joints[i] + chain.bone_lengths[i] * dir;
        }
        if (distance(out.joints[3], target) <= opts.tol) break;
    }
    if (dist_to_target > 0.0 && distance(out.joints[3], target) > opts.tol) {
        out = planar_completion(chain, target, axis, perp);
    }
    return out;
}

}  // namespace magic
