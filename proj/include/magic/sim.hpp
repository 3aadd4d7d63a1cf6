#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "magic/agreement.hpp"
#include "magic/retarget.hpp"
#include "magic/rng.hpp"

namespace magic {

struct Sphere {
    Vec3 center;
    double radius = 0.0;
};

/// Highlighted surface patch the demonstrator must communicate.
struct TargetRegion {
    Vec3 center;
    double radius = 0.0;
};

/// Proportions used to build simulated collaborator skeletons.
struct BodyParams {
    double head_height = 1.65;
    double shoulder_height = 1.35;
    double shoulder_half_width = 0.19;
    std::array<double, 3> bones = {0.33, 0.29, 0.13};
    double stance_back = 0.10;  // stance distance behind the near table edge
};

/// Shared workspace: table frame, the abstract sphere-blob model above it,
/// and the counterbalanced target sets on the blob surface.
struct Scene {
    WorkspaceFrame frame;
    std::vector<Sphere> model;
    std::vector<std::vector<TargetRegion>> target_sets;
    BodyParams body;
};

struct SceneParams {
    Vec3 table_center{0.0, 0.75, 0.0};
    Vec3 table_size{1.0, 0.8, 0.75};  // width, depth, height
    int sphere_count = 12;
    double sphere_radius_min = 0.04;
    double sphere_radius_max = 0.08;
    Vec3 blob_center_local{0.0, 0.33, -0.08};  // relative to the tabletop center
    Vec3 blob_half_extent{0.24, 0.17, 0.17};
    double target_radius = 0.025;
    int target_sets = 4;
    int targets_per_set = 16;
    BodyParams body{};
};

enum class Condition { Magic, Veridical };

std::string to_string(Condition c);

/// Behavioral stand-in for a human participant pair: outlining jitter plus a
/// perception channel per condition. The veridical channel adds a systematic
/// depth misjudgment along the interpreter's line of sight and drops samples
/// whose line of sight is blocked by the model blob.
struct AgentModel {
    double motor_sigma = 0.0;
    double perception_sigma_magic = 0.0;
    double perception_sigma_veridical = 0.0;
    double depth_bias_veridical = 0.0;
    double occlusion_dropout = 0.0;
    int samples_per_outline = 120;
};

/// Channel parameters reproducing the reference condition means (0.24 MAGIC,
/// 0.18 Veridical); frozen output of calibrate().
AgentModel default_agents();

struct TrialRecord {
    Condition condition = Condition::Magic;
    int set_id = 0;
    int target_id = 0;
    double j = 0.0;
    double duration_proxy = 0.0;
    std::uint64_t seed = 0;
};

struct ConditionStats {
    double mean = 0.0;
    double sd = 0.0;
    double median = 0.0;
    int n = 0;
};

struct RunSummary {
    ConditionStats magic;
    ConditionStats veridical;
    double relative_improvement = 0.0;  // (mean_magic - mean_veridical) / mean_veridical
};

struct ExperimentResult {
    std::vector<TrialRecord> records;
    RunSummary summary;
};

struct SimConfig {
    double ik_tol = 1e-6;  // per-frame solves run to convergence
    int ik_max_iter = 150;
    double dwell = 0.05;   // seconds per outline sample
    double spiral_turns = 2.5;
};

struct CalibrationFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CalibrationTargets {
    double j_magic = 0.24;
    double j_veridical = 0.18;
};

/// Table frame built from scene parameters; used wherever no explicit scene
/// is supplied.
WorkspaceFrame default_workspace(const SceneParams& params = {});

/// Near-side standing skeleton: root on the floor behind the near table
/// edge, arms hanging, facing across the table.
BodyPose rest_pose(const WorkspaceFrame& frame, const BodyParams& body);

/// Stance map for the mirrored avatar of a collaborator with this body,
/// derived from the mirrored rest pose.
AvatarPlacement demonstrator_placement(const WorkspaceFrame& frame, const BodyParams& body);

/// True when a point sits on the right-hand side of someone facing forward.
bool right_of_midline(const WorkspaceFrame& frame, const Vec3& p);

/// Rest pose with the chosen arm solved onto the target fingertip position.
BodyPose pose_pointing_at(const BodyPose& rest, const Vec3& fingertip, const WorkspaceFrame& frame,
                          bool use_right_arm, double ik_tol = 1e-6, int max_iter = 150);

/// Deterministic scene for a seed: connected sphere blob above the table and
/// matched target sets sampled on its surface with equal greedy spread.
/// Throws std::invalid_argument when the parameters cannot fit the workspace
/// or not enough reachable surface targets exist.
Scene generate_scene(std::uint64_t seed, const SceneParams& params = {});

/// One outlining trial. The demonstrator outlines the target patch; the
/// interpreter observes the fingertip trace through the condition channel
/// (retargeted for Magic, veridical with depth bias and occlusion dropout
/// otherwise) and re-outlines what it perceived.
TrialRecord simulate_trial(const Scene& scene, int set_id, int target_id, Condition condition,
                           const AgentModel& agents, std::uint64_t seed, const SimConfig& config = {});

/// trials_per_condition paired trials cycling through the target sets, both
/// conditions sharing per-trial seeds derived from the master seed.
ExperimentResult run_experiment(const Scene& scene, const AgentModel& agents, int trials_per_condition,
                                std::uint64_t seed, const SimConfig& config = {});

RunSummary summarize(const std::vector<TrialRecord>& records);

/// Fit perception sigmas and the veridical impairments to the target means
/// by coordinate bisection (>= 500 trials per evaluation, common random
/// numbers). Throws CalibrationFailed when no parameters within the family's
/// bounds reach both targets, which includes any request where the veridical
/// mean must exceed the Magic one.
AgentModel calibrate(const Scene& scene, const CalibrationTargets& targets, double tolerance,
                     std::uint64_t seed, const SimConfig& config = {});

// Small statistics helpers for analysing experiment output.
double permutation_p_value(const std::vector<double>& a, const std::vector<double>& b, int n_perm,
                           std::uint64_t seed);
double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace magic
