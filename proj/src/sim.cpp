#include "magic/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace magic {

namespace {

constexpr double kTau = 6.28318530717958647692;

Vec3 any_perpendicular(const Vec3& axis) {
    const Vec3 ref = std::abs(axis.x) < 0.9 * norm(axis) ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    return normalized(cross(axis, ref));
}

void validate_agents(const AgentModel& agents) {
    if (agents.motor_sigma < 0.0 || agents.perception_sigma_magic < 0.0 ||
        agents.perception_sigma_veridical < 0.0) {
        throw std::invalid_argument("AgentModel: sigmas must be >= 0");
    }
    if (agents.occlusion_dropout < 0.0 || agents.occlusion_dropout > 1.0) {
        throw std::invalid_argument("AgentModel: occlusion_dropout must be in [0,1]");
    }
    if (agents.samples_per_outline < 4) {
        throw std::invalid_argument("AgentModel: samples_per_outline must be at least 4");
    }
}

// Sphere whose surface is closest to p; targets are sampled on sphere
// surfaces, so for a target center this recovers its generating sphere.
const Sphere& surface_sphere(const std::vector<Sphere>& model, const Vec3& p) {
    const Sphere* best = &model.front();
    double best_gap = std::numeric_limits<double>::infinity();
    for (const Sphere& s : model) {
        const double gap = std::abs(distance(p, s.center) - s.radius);
        if (gap < best_gap) {
            best_gap = gap;
            best = &s;
        }
    }
    return *best;
}

// Ideal outlining path: an inward-to-outward spiral over the target patch,
// projected onto the generating sphere so the trace has depth.
std::vector<Vec3> outline_path(const TargetRegion& target, const Sphere& sphere, int n, double turns) {
    const Vec3 t1 = any_perpendicular(target.center - sphere.center);
    const Vec3 t2 = normalized(cross(target.center - sphere.center, t1));
    std::vector<Vec3> path;
    path.reserve(n);
    for (int k = 0; k < n; ++k) {
        const double f = static_cast<double>(k) / (n - 1);
        const double rho = target.radius * f;
        const double phi = kTau * turns * f;
        const Vec3 p = target.center + rho * (std::cos(phi) * t1 + std::sin(phi) * t2);
        path.push_back(sphere.center + sphere.radius * normalized(p - sphere.center));
    }
    return path;
}

bool line_of_sight_blocked(const std::vector<Sphere>& model, const Vec3& eye, const Vec3& p) {
    const Vec3 d = p - eye;
    const double len2 = norm2(d);
    for (const Sphere& s : model) {
        const Vec3 m = eye - s.center;
        const double b = dot(m, d);
        const double c = norm2(m) - s.radius * s.radius;
        const double disc = b * b - len2 * c;
        if (disc <= 0.0) continue;
        // Entry parameter along the segment; the fingertip itself sits on a
        // sphere surface, so require entry distinctly before the endpoint.
        const double t_enter = (-b - std::sqrt(disc)) / len2;
        if (t_enter > 1e-9 && t_enter < 1.0 - 1e-3) return true;
    }
    return false;
}

struct TrialPlan {
    int set_id = 0;
    int target_id = 0;
    std::uint64_t seed = 0;
};

TrialPlan plan_trial(const Scene& scene, std::uint64_t master_seed, int i) {
    const int n_sets = static_cast<int>(scene.target_sets.size());
    const int per_set = static_cast<int>(scene.target_sets.front().size());
    return {i % n_sets, (i / n_sets) % per_set, mix_seed(master_seed, static_cast<std::uint64_t>(i))};
}

ConditionStats stats_of(std::vector<double> v) {
    ConditionStats s;
    s.n = static_cast<int>(v.size());
    if (s.n == 0) return s;
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / s.n;
    if (s.n > 1) {
        double acc = 0.0;
        for (double x : v) acc += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(acc / (s.n - 1));
    }
    std::sort(v.begin(), v.end());
    s.median = s.n % 2 == 1 ? v[s.n / 2] : 0.5 * (v[s.n / 2 - 1] + v[s.n / 2]);
    return s;
}

}  // namespace

std::string to_string(Condition c) {
    return c == Condition::Magic ? "MAGIC" : "Veridical";
}

WorkspaceFrame default_workspace(const SceneParams& p) {
    WorkspaceFrame f;
    f.table_center = p.table_center;
    f.table_size = p.table_size;
    f.forward = {0.0, 0.0, 1.0};
    f.up = {0.0, 1.0, 0.0};
    f.workspace_min = {-p.table_size.x / 2.0, 0.01, -p.table_size.y / 2.0};
    f.workspace_max = {p.table_size.x / 2.0, 0.70, p.table_size.y / 2.0};
    return f;
}

BodyPose rest_pose(const WorkspaceFrame& frame, const BodyParams& body) {
    const double half_depth = frame.table_size.y / 2.0;
    const Vec3 root =
        frame.table_center - (half_depth + body.stance_back) * frame.forward - frame.table_size.z * frame.up;
    const Vec3 lat = frame.lateral();
    const Vec3 down = -1.0 * frame.up;

    BodyPose pose;
    pose.root = root;
    pose.head = root + body.head_height * frame.up;
    pose.facing = frame.forward;
    auto hanging_arm = [&](double side) {
        const Vec3 sh = root + body.shoulder_height * frame.up + side * body.shoulder_half_width * lat;
        const Vec3 el = sh + body.bones[0] * down;
        const Vec3 wr = el + body.bones[1] * down;
        return ArmChain::from_joints(sh, el, wr, wr + body.bones[2] * down);
    };
    // Facing +forward with up x forward as lateral, the right hand side is +lateral.
    pose.left_arm = hanging_arm(-1.0);
    pose.right_arm = hanging_arm(+1.0);
    return pose;
}

AvatarPlacement demonstrator_placement(const WorkspaceFrame& frame, const BodyParams& body) {
    const BodyPose rest = rest_pose(frame, body);
    const BodyPose mirrored = mirror_pose(rest, MirrorSpec::for_frame(frame));
    const Vec3 mid_shoulder =
        0.5 * (mirrored.left_arm.shoulder() + mirrored.right_arm.shoulder()) - mirrored.root;
    return solve_placement(frame, mirrored.root, mid_shoulder, reach(rest.right_arm));
}

bool right_of_midline(const WorkspaceFrame& frame, const Vec3& p) {
    return dot(p - frame.table_center, frame.lateral()) >= 0.0;
}

BodyPose pose_pointing_at(const BodyPose& rest, const Vec3& fingertip, const WorkspaceFrame& frame,
                          bool use_right_arm, double ik_tol, int max_iter) {
    BodyPose pose = rest;
    FabrikOptions opts;
    opts.tol = ik_tol;
    opts.max_iter = max_iter;
    opts.bend_hint = cross(pose.facing, frame.up);
    ArmChain& arm = use_right_arm ? pose.right_arm : pose.left_arm;
    arm = fabrik_solve(arm, fingertip, opts);
    return pose;
}

Scene generate_scene(std::uint64_t seed, const SceneParams& params) {
    if (params.sphere_count < 1 || params.target_sets < 1 || params.targets_per_set < 1) {
        throw std::invalid_argument("generate_scene: counts must be positive");
    }
    if (!(params.sphere_radius_min > 0.0) || params.sphere_radius_max < params.sphere_radius_min) {
        throw std::invalid_argument("generate_scene: bad sphere radius range");
    }
    if (!(params.target_radius > 0.0)) {
        throw std::invalid_argument("generate_scene: target radius must be positive");
    }

    Scene scene;
    scene.frame = default_workspace(params);
    scene.frame.validate();
    scene.body = params.body;

    const Vec3 blob_lo = params.blob_center_local - params.blob_half_extent;
    const Vec3 blob_hi = params.blob_center_local + params.blob_half_extent;
    auto in_blob_box = [&](const Vec3& c) {
        return c.x >= blob_lo.x && c.x <= blob_hi.x && c.y >= blob_lo.y && c.y <= blob_hi.y &&
               c.z >= blob_lo.z && c.z <= blob_hi.z;
    };

    RngStream rng(seed);
    RngStream sphere_rng = rng.derive(1);
    RngStream target_rng = rng.derive(2);

    // Sphere blob, grown one sphere at a time. Each new sphere overlaps its
    // parent without being swallowed by it, so the union stays connected.
    std::vector<Vec3> centers_local{params.blob_center_local};
    std::vector<double> radii{sphere_rng.uniform(params.sphere_radius_min, params.sphere_radius_max)};
    for (int k = 1; k < params.sphere_count; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
            const int parent = sphere_rng.uniform_int(k);
            const Vec3 dir = sphere_rng.unit_vector();
            const double r = sphere_rng.uniform(params.sphere_radius_min, params.sphere_radius_max);
            const double d = sphere_rng.uniform(0.55, 0.9) * (radii[parent] + r);
            const Vec3 c = centers_local[parent] + d * dir;
            if (!in_blob_box(c)) continue;
            centers_local.push_back(c);
            radii.push_back(r);
            placed = true;
        }
        if (!placed) {
            throw std::invalid_argument("generate_scene: sphere blob does not fit its bounds");
        }
    }
    for (int k = 0; k < params.sphere_count; ++k) {
        scene.model.push_back({scene.frame.from_local(centers_local[k]), radii[k]});
    }
    for (const Sphere& s : scene.model) {
        const Vec3 l = scene.frame.to_local(s.center);
        for (int axis = 0; axis < 3; ++axis) {
            const double c = axis == 0 ? l.x : axis == 1 ? l.y : l.z;
            const double lo = axis == 0   ? scene.frame.workspace_min.x
                              : axis == 1 ? scene.frame.workspace_min.y
                                          : scene.frame.workspace_min.z;
            const double hi = axis == 0   ? scene.frame.workspace_max.x
                              : axis == 1 ? scene.frame.workspace_max.y
                                          : scene.frame.workspace_max.z;
            if (c - s.radius < lo || c + s.radius > hi) {
                throw std::invalid_argument("generate_scene: model does not fit the workspace");
            }
        }
    }

    // Candidate targets: points on the blob surface that both collaborators
    // can comfortably reach (demonstrator directly, avatar after placement).
    const BodyPose rest = rest_pose(scene.frame, scene.body);
    const AvatarPlacement placement = demonstrator_placement(scene.frame, scene.body);
    const double arm_reach = reach(rest.right_arm);
    const double dem_limit = 0.92 * arm_reach - params.target_radius;
    const double avatar_limit = placement.reach_budget - params.target_radius - 0.01;
    const Vec3 lat = scene.frame.lateral();

    const int need = params.target_sets * params.targets_per_set;
    std::vector<Vec3> pool;
    const int pool_goal = std::max(4 * need, 256);
    for (int attempt = 0; attempt < 50000 && static_cast<int>(pool.size()) < pool_goal; ++attempt) {
        const int si = target_rng.uniform_int(params.sphere_count);
        const Vec3 c = scene.model[si].center + scene.model[si].radius * target_rng.unit_vector();
        if (!scene.frame.in_workspace(c)) continue;
        bool buried = false;
        for (int sj = 0; sj < params.sphere_count && !buried; ++sj) {
            buried = sj != si && distance(c, scene.model[sj].center) < scene.model[sj].radius - 1e-9;
        }
        if (buried) continue;

        const double side = dot(c - scene.frame.table_center, lat);
        const Vec3 dem_shoulder = side >= 0.0 ? rest.right_arm.shoulder() : rest.left_arm.shoulder();
        if (distance(c, dem_shoulder) > dem_limit) continue;

        const Vec3 stance = place_avatar(c, scene.frame, placement);
        const Vec3 avatar_shoulder = stance + scene.body.shoulder_height * scene.frame.up +
                                     (side >= 0.0 ? 1.0 : -1.0) * scene.body.shoulder_half_width * lat;
        if (distance(c, avatar_shoulder) > avatar_limit) continue;
        pool.push_back(c);
    }
    if (static_cast<int>(pool.size()) < need) {
        throw std::invalid_argument("generate_scene: not enough reachable surface targets");
    }

    // Each set takes its targets by farthest-point traversal of the shared
    // pool, so all sets cover the blob with similar spread.
    std::vector<int> remaining(pool.size());
    std::iota(remaining.begin(), remaining.end(), 0);
    for (int set = 0; set < params.target_sets; ++set) {
        std::vector<TargetRegion> targets;
        std::vector<int> chosen;
        chosen.push_back(remaining[target_rng.uniform_int(static_cast<int>(remaining.size()))]);
        while (static_cast<int>(chosen.size()) < params.targets_per_set) {
            int best = -1;
            double best_d = -1.0;
            for (int idx : remaining) {
                if (std::find(chosen.begin(), chosen.end(), idx) != chosen.end()) continue;
                double d = std::numeric_limits<double>::infinity();
                for (int c : chosen) d = std::min(d, distance(pool[idx], pool[c]));
                if (d > best_d) {
                    best_d = d;
                    best = idx;
                }
            }
            chosen.push_back(best);
        }
        for (int idx : chosen) {
            targets.push_back({pool[idx], params.target_radius});
            remaining.erase(std::find(remaining.begin(), remaining.end(), idx));
        }
        scene.target_sets.push_back(std::move(targets));
    }
    return scene;
}

TrialRecord simulate_trial(const Scene& scene, int set_id, int target_id, Condition condition,
                           const AgentModel& agents, std::uint64_t seed, const SimConfig& config) {
    validate_agents(agents);
    if (set_id < 0 || set_id >= static_cast<int>(scene.target_sets.size())) {
        throw std::invalid_argument("simulate_trial: set_id out of range");
    }
    if (target_id < 0 || target_id >= static_cast<int>(scene.target_sets[set_id].size())) {
        throw std::invalid_argument("simulate_trial: target_id out of range");
    }
    if (scene.model.empty()) throw std::invalid_argument("simulate_trial: scene has no model");

    const TargetRegion& target = scene.target_sets[set_id][target_id];
    const Sphere& sphere = surface_sphere(scene.model, target.center);
    const int n = agents.samples_per_outline;

    RngStream trial_rng(seed);
    RngStream motor_rng = trial_rng.derive(1);
    RngStream channel_rng = trial_rng.derive(condition == Condition::Magic ? 2 : 3);

    // Demonstrator fingertip trace: ideal patch outline plus motor jitter.
    // The motor stream does not depend on the condition, so paired trials
    // share the demonstrated shape.
    const std::vector<Vec3> path = outline_path(target, sphere, n, config.spiral_turns);
    OutlineTrace dem;
    dem.samples.reserve(n);
    for (int k = 0; k < n; ++k) {
        dem.samples.push_back({k * config.dwell, path[k] + motor_rng.normal3(agents.motor_sigma)});
    }

    const BodyPose rest = rest_pose(scene.frame, scene.body);
    std::vector<Vec3> perceived;
    perceived.reserve(n);

    if (condition == Condition::Magic) {
        // The interpreter sees the retargeted avatar: per sample the
        // demonstrator pose is solved onto the traced fingertip, mirrored
        // and fingertip-corrected, then read back with perception noise.
        const AvatarPlacement placement = demonstrator_placement(scene.frame, scene.body);
        RetargetOptions ropts;
        ropts.ik_tol = config.ik_tol;
        ropts.max_iter = config.ik_max_iter;
        // One arm for the whole outline, picked by the patch center.
        const bool dem_right = right_of_midline(scene.frame, target.center);
        for (const OutlineSample& s : dem.samples) {
            BodyPose dem_pose = pose_pointing_at(rest, s.fingertip, scene.frame, dem_right,
                                                 config.ik_tol, config.ik_max_iter);
            const BodyPose avatar = retarget_pose(dem_pose, scene.frame, placement, ropts);
            // The demonstrator's right arm drives the avatar's left and vice versa.
            const Vec3 tip = dem_right ? avatar.left_arm.fingertip() : avatar.right_arm.fingertip();
            perceived.push_back(tip + channel_rng.normal3(agents.perception_sigma_magic));
        }
    } else {
        // Veridical: the interpreter watches the demonstrator's own hand from
        // the opposite side. Depth misjudgment pushes each perceived point
        // along the line of sight; occluded samples may drop out.
        const Vec3 eye = rest.head;
        for (const OutlineSample& s : dem.samples) {
            const bool blocked = line_of_sight_blocked(scene.model, eye, s.fingertip);
            const double drop_u = channel_rng.uniform();
            const Vec3 noise = channel_rng.normal3(agents.perception_sigma_veridical);
            if (blocked && drop_u < agents.occlusion_dropout) continue;
            const Vec3 view = normalized(s.fingertip - eye);
            perceived.push_back(s.fingertip + noise + agents.depth_bias_veridical * view);
        }
    }

    // Interpreter re-outline of the perceived shape, with its own jitter.
    OutlineTrace interp;
    interp.samples.reserve(perceived.size());
    for (std::size_t k = 0; k < perceived.size(); ++k) {
        interp.samples.push_back(
            {k * config.dwell, perceived[k] + channel_rng.normal3(agents.motor_sigma)});
    }

    double j = 0.0;
    if (!interp.samples.empty()) {
        j = pointing_agreement(dem, interp).j;
    }
    return {condition, set_id, target_id, j, n * config.dwell, seed};
}

RunSummary summarize(const std::vector<TrialRecord>& records) {
    std::vector<double> m, v;
    for (const TrialRecord& r : records) {
        (r.condition == Condition::Magic ? m : v).push_back(r.j);
    }
    RunSummary s;
    s.magic = stats_of(std::move(m));
    s.veridical = stats_of(std::move(v));
    s.relative_improvement =
        s.veridical.mean > 0.0 ? (s.magic.mean - s.veridical.mean) / s.veridical.mean : 0.0;
    return s;
}

ExperimentResult run_experiment(const Scene& scene, const AgentModel& agents, int trials_per_condition,
                                std::uint64_t seed, const SimConfig& config) {
    if (trials_per_condition < 1) {
        throw std::invalid_argument("run_experiment: trials_per_condition must be >= 1");
    }
    if (scene.target_sets.empty() || scene.target_sets.front().empty()) {
        throw std::invalid_argument("run_experiment: scene has no targets");
    }
    ExperimentResult out;
    out.records.reserve(2 * static_cast<std::size_t>(trials_per_condition));
    for (int i = 0; i < trials_per_condition; ++i) {
        const TrialPlan plan = plan_trial(scene, seed, i);
        TrialRecord a =
            simulate_trial(scene, plan.set_id, plan.target_id, Condition::Magic, agents, plan.seed, config);
        TrialRecord b = simulate_trial(scene, plan.set_id, plan.target_id, Condition::Veridical, agents,
                                       plan.seed, config);
        // Counterbalanced condition order, decided by the trial seed.
        if (plan.seed & 1ull) std::swap(a, b);
        out.records.push_back(a);
        out.records.push_back(b);
    }
    out.summary = summarize(out.records);
    return out;
}

namespace {

// Single family searched by calibrate: one perception sigma for the Magic
// channel, one impairment level scaling every extra veridical degradation.
// Motor jitter stays zero so target means of 1.0 stay reachable.
constexpr double kSigmaMax = 0.030;
constexpr double kExtraSigmaMax = 0.012;
constexpr double kBiasMax = 0.025;
constexpr double kDropoutMax = 0.60;

AgentModel family_model(double sigma, double lambda) {
    AgentModel m;
    m.motor_sigma = 0.0;
    m.perception_sigma_magic = sigma;
    m.perception_sigma_veridical = sigma + lambda * kExtraSigmaMax;
    m.depth_bias_veridical = lambda * kBiasMax;
    m.occlusion_dropout = lambda * kDropoutMax;
    return m;
}

double condition_mean(const Scene& scene, const AgentModel& agents, Condition cond, int trials,
                      std::uint64_t master_seed, const SimConfig& config) {
    double sum = 0.0;
    for (int i = 0; i < trials; ++i) {
        const TrialPlan plan = plan_trial(scene, master_seed, i);
        sum += simulate_trial(scene, plan.set_id, plan.target_id, cond, agents, plan.seed, config).j;
    }
    return sum / trials;
}

struct BisectResult {
    double x = 0.0;
    double value = 0.0;
};

// Bisection for a decreasing response evaluated with common random numbers.
template <typename F>
BisectResult bisect_decreasing(F&& f, double lo, double hi, double target, double tol,
                               const char* what) {
    const double f_lo = f(lo);
    if (target > f_lo + tol) {
        throw CalibrationFailed(std::string(what) + ": target above the achievable ceiling");
    }
    BisectResult best{lo, f_lo};
    auto consider = [&](double x, double v) {
        if (std::abs(v - target) < std::abs(best.value - target)) best = {x, v};
    };
    if (std::abs(f_lo - target) <= 0.5 * tol) return best;
    const double f_hi = f(hi);
    consider(hi, f_hi);
    if (std::abs(best.value - target) <= 0.5 * tol) return best;
    if (target < f_hi - tol) {
        throw CalibrationFailed(std::string(what) + ": target below the search bound");
    }
    double a = lo, b = hi;
    for (int iter = 0; iter < 30 && std::abs(best.value - target) > 0.5 * tol; ++iter) {
        const double mid = 0.5 * (a + b);
        const double v = f(mid);
        consider(mid, v);
        if (v > target) {
            a = mid;
        } else {
            b = mid;
        }
    }
    if (std::abs(best.value - target) > tol) {
        throw CalibrationFailed(std::string(what) + ": bisection did not reach tolerance");
    }
    return best;
}

}  // namespace

AgentModel default_agents() {
    // Output of `magic calibrate --generate 7 --targets 0.24 0.18 --tol 0.01
    // --seed 42`, frozen so the defaults stay reproducible.
    AgentModel m;
    m.motor_sigma = 0.0;
    m.perception_sigma_magic = 0.0017578124999999998;
    m.perception_sigma_veridical = 0.0023203125;
    m.depth_bias_veridical = 0.0011718750000000002;
    m.occlusion_dropout = 0.028124999999999997;
    return m;
}

AgentModel calibrate(const Scene& scene, const CalibrationTargets& targets, double tolerance,
                     std::uint64_t seed, const SimConfig& config) {
    if (!(tolerance > 0.0)) throw std::invalid_argument("calibrate: tolerance must be positive");
    for (double t : {targets.j_magic, targets.j_veridical}) {
        if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("calibrate: targets must be in (0,1]");
    }
    if (targets.j_veridical > targets.j_magic + 1e-12) {
        throw CalibrationFailed(
            "calibrate: veridical target exceeds the Magic one; the impairment family only "
            "degrades the veridical channel");
    }

    const int trials = 500;
    const std::uint64_t eval_seed = mix_seed(seed, 0x5eed);

    const BisectResult sigma = bisect_decreasing(
        [&](double s) {
            return condition_mean(scene, family_model(s, 0.0), Condition::Magic, trials, eval_seed,
                                  config);
        },
        0.0, kSigmaMax, targets.j_magic, tolerance, "calibrate sigma");

    const BisectResult lambda = bisect_decreasing(
        [&](double l) {
            return condition_mean(scene, family_model(sigma.x, l), Condition::Veridical, trials,
                                  eval_seed, config);
        },
        0.0, 1.0, targets.j_veridical, tolerance, "calibrate impairment");

    return family_model(sigma.x, lambda.x);
}

double permutation_p_value(const std::vector<double>& a, const std::vector<double>& b, int n_perm,
                           std::uint64_t seed) {
    if (a.empty() || b.empty()) throw std::invalid_argument("permutation_p_value: empty sample");
    const auto mean_of = [](const std::vector<double>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    };
    const double observed = std::abs(mean_of(a) - mean_of(b));

    std::vector<double> all(a);
    all.insert(all.end(), b.begin(), b.end());
    const std::size_t na = a.size();
    RngStream rng(seed);
    int at_least = 0;
    for (int p = 0; p < n_perm; ++p) {
        // Fisher-Yates with the explicit modulo draw; bias is irrelevant here.
        for (std::size_t i = all.size() - 1; i > 0; --i) {
            std::swap(all[i], all[rng.uniform_int(static_cast<int>(i + 1))]);
        }
        const double m_a = std::accumulate(all.begin(), all.begin() + na, 0.0) / na;
        const double m_b =
            std::accumulate(all.begin() + na, all.end(), 0.0) / (all.size() - na);
        if (std::abs(m_a - m_b) >= observed - 1e-15) ++at_least;
    }
    return (at_least + 1.0) / (n_perm + 1.0);
}

double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("spearman_correlation: need two equal-length samples");
    }
    const auto ranks = [](const std::vector<double>& v) {
        std::vector<int> order(v.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int i, int j) { return v[i] < v[j]; });
        std::vector<double> r(v.size());
        for (std::size_t k = 0; k < order.size();) {
            std::size_t e = k;
            while (e + 1 < order.size() && v[order[e + 1]] == v[order[k]]) ++e;
            const double mean_rank = 0.5 * (k + e);  // ties share their mean rank
            for (std::size_t i = k; i <= e; ++i) r[order[i]] = mean_rank;
            k = e + 1;
        }
        return r;
    };
    const std::vector<double> rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    const double mean = (n - 1.0) / 2.0;
    double num = 0.0, dx = 0.0, dy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (rx[i] - mean) * (ry[i] - mean);
        dx += (rx[i] - mean) * (rx[i] - mean);
        dy += (ry[i] - mean) * (ry[i] - mean);
    }
    if (dx == 0.0 || dy == 0.0) return 0.0;
    return num / std::sqrt(dx * dy);
}

}  // namespace magic
