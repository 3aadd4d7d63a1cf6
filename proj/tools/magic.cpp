#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "magic/io.hpp"

namespace {

using namespace magic;

// format_double never emits a bare integer for display; "1" reads as a count.
std::string display_number(double x) {
    std::string s = format_double(x);
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
        s += ".0";
    }
    return s;
}

struct SceneSource {
    std::string path;
    std::uint64_t generate_seed = 7;
    bool generate_given = false;

    Scene load() const {
        if (!path.empty()) return read_scene(path);
        return generate_scene(generate_seed);
    }
};

void add_scene_options(CLI::App* cmd, SceneSource& src) {
    auto* scene_opt = cmd->add_option("--scene", src.path, "Scene JSON file")->check(CLI::ExistingFile);
    cmd->add_option("--generate", src.generate_seed, "Generate the scene from this seed instead")
        ->excludes(scene_opt);
}

int run_retarget(const std::string& in_path, const std::string& out_path,
                 const std::string& scene_path, bool report, bool strict) {
    const TraceFile in = read_trace(in_path);

    WorkspaceFrame frame;
    if (!scene_path.empty()) {
        frame = read_scene(scene_path).frame;
    } else if (in.frame) {
        frame = *in.frame;
    } else {
        frame = default_workspace();
    }

    TraceFile out;
    out.role = in.role;
    out.frame = frame;

    if (in.records.empty()) {
        write_trace(out_path, out);
        if (report) std::cout << "max fingertip error: 0.0 m (no samples)\n";
        return 0;
    }

    for (const TraceRecord& rec : in.records) {
        if (!rec.pose || !rec.arm) {
            throw ParseError("record needs 'pose' and 'arm' for retargeting", rec.line);
        }
    }

    // Stance map from the first captured pose of this collaborator.
    const MirrorSpec mirror = MirrorSpec::for_frame(frame);
    const BodyPose first_mirrored = mirror_pose(*in.records.front().pose, mirror);
    const Vec3 mid_shoulder =
        0.5 * (first_mirrored.left_arm.shoulder() + first_mirrored.right_arm.shoulder()) -
        first_mirrored.root;
    const double arm_reach = std::min(reach(first_mirrored.left_arm), reach(first_mirrored.right_arm));
    const AvatarPlacement placement =
        solve_placement(frame, first_mirrored.root, mid_shoulder, arm_reach);

    double max_err = 0.0;
    int flagged = 0;
    for (const TraceRecord& rec : in.records) {
        TraceRecord out_rec;
        out_rec.t = rec.t;
        out_rec.arm = *rec.arm == "left" ? "right" : "left";  // labels swap in the mirror
        try {
            out_rec.pose = retarget_pose(*rec.pose, frame, placement);
        } catch (const UnreachableTarget& e) {
            if (strict) throw;
            out_rec.pose = mirror_pose(*rec.pose, mirror);
            out_rec.unreachable = true;
            out_rec.residual = e.residual;
            ++flagged;
        }
        out_rec.p = *out_rec.arm == "left" ? out_rec.pose->left_arm.fingertip()
                                           : out_rec.pose->right_arm.fingertip();
        if (!out_rec.unreachable) max_err = std::max(max_err, distance(out_rec.p, rec.p));
        out.records.push_back(std::move(out_rec));
    }
    write_trace(out_path, out);

    if (report) {
        std::cout << "max fingertip error: " << display_number(max_err) << " m\n";
        if (flagged > 0) std::cout << "unreachable samples flagged: " << flagged << "\n";
    }
    return 0;
}

int run_agree(const std::string& dem_path, const std::string& int_path) {
    const TraceFile dem = read_trace(dem_path);
    const TraceFile interp = read_trace(int_path);

    AgreementResult res;
    if (dem.records.empty() || interp.records.empty()) {
        res.degenerate_dem = dem.records.empty();
        res.degenerate_int = interp.records.empty();
    } else {
        res = pointing_agreement(to_outline(dem), to_outline(interp));
    }

    if (res.degenerate_dem) std::cerr << "warning: demonstrator outline is degenerate\n";
    if (res.degenerate_int) std::cerr << "warning: interpreter outline is degenerate\n";
    std::cout << "j: " << display_number(res.j) << "\n"
              << "v_dem: " << display_number(res.v_dem) << "\n"
              << "v_int: " << display_number(res.v_int) << "\n"
              << "v_overlap: " << display_number(res.v_overlap) << "\n";
    return 0;
}

AgentModel load_agents(const std::string& agents_path) {
    if (!agents_path.empty()) return read_agents(agents_path);
    if (const char* env = std::getenv("MAGIC_CONFIG")) return read_agents(env);
    return default_agents();
}

void scale_noise(AgentModel& agents, double scale) {
    agents.motor_sigma *= scale;
    agents.perception_sigma_magic *= scale;
    agents.perception_sigma_veridical *= scale;
    agents.depth_bias_veridical *= scale;
    agents.occlusion_dropout = std::min(1.0, agents.occlusion_dropout * scale);
}

void print_agents(const AgentModel& m) {
    std::cout << "motor_sigma: " << display_number(m.motor_sigma) << "\n"
              << "perception_sigma_magic: " << display_number(m.perception_sigma_magic) << "\n"
              << "perception_sigma_veridical: " << display_number(m.perception_sigma_veridical) << "\n"
              << "depth_bias_veridical: " << display_number(m.depth_bias_veridical) << "\n"
              << "occlusion_dropout: " << display_number(m.occlusion_dropout) << "\n"
              << "samples_per_outline: " << m.samples_per_outline << "\n";
}

int run_simulate(const SceneSource& src, const std::string& agents_path, int trials,
                 std::uint64_t seed, const std::string& out_path,
                 const std::optional<double>& noise, const std::vector<double>& calibrate_targets,
                 double tol) {
    const Scene scene = src.load();

    AgentModel agents;
    if (!calibrate_targets.empty()) {
        agents = calibrate(scene, {calibrate_targets[0], calibrate_targets[1]}, tol, seed);
    } else {
        agents = load_agents(agents_path);
    }
    if (noise) scale_noise(agents, *noise);

    const ExperimentResult result = run_experiment(scene, agents, trials, seed);
    std::cout << format_summary(result.summary);
    if (!out_path.empty()) write_results(out_path, result);
    return 0;
}

int run_calibrate(const SceneSource& src, const std::vector<double>& targets, double tol,
                  std::uint64_t seed, const std::string& out_path) {
    const Scene scene = src.load();
    const AgentModel model = calibrate(scene, {targets[0], targets[1]}, tol, seed);
    print_agents(model);
    if (!out_path.empty()) write_agents(out_path, model);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MAGIC pointing pipeline: retargeting, agreement scoring, experiment simulation"};
    app.require_subcommand(1);

    // retarget
    auto* retarget_cmd = app.add_subcommand("retarget", "Mirror and fingertip-correct a pose trace");
    std::string rt_in, rt_out, rt_scene;
    bool rt_report = false, rt_strict = false;
    retarget_cmd->add_option("--in", rt_in, "Input pose trace")->required()->check(CLI::ExistingFile);
    retarget_cmd->add_option("--out", rt_out, "Output trace")->required();
    retarget_cmd->add_option("--scene", rt_scene, "Scene JSON providing the workspace frame")
        ->check(CLI::ExistingFile);
    retarget_cmd->add_flag("--report", rt_report, "Print the max fingertip error");
    retarget_cmd->add_flag("--strict", rt_strict, "Fail (exit 4) on unreachable targets");

    // agree
    auto* agree_cmd = app.add_subcommand("agree", "Score two outline traces");
    std::string ag_dem, ag_int;
    agree_cmd->add_option("--dem", ag_dem, "Demonstrator trace")->required()->check(CLI::ExistingFile);
    agree_cmd->add_option("--int", ag_int, "Interpreter trace")->required()->check(CLI::ExistingFile);

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Run the two-condition outlining experiment");
    SceneSource sim_src;
    add_scene_options(sim_cmd, sim_src);
    std::string sim_agents, sim_out;
    int sim_trials = 200;
    std::uint64_t sim_seed = 42;
    std::optional<double> sim_noise;
    std::vector<double> sim_calibrate;
    double sim_tol = 0.02;
    sim_cmd->add_option("--agents", sim_agents, "Agent model JSON")->check(CLI::ExistingFile);
    sim_cmd->add_option("--trials", sim_trials, "Trials per condition")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--seed", sim_seed, "Master seed");
    sim_cmd->add_option("--out", sim_out, "Results CSV path");
    sim_cmd->add_option("--noise", sim_noise, "Scale every noise parameter by this factor");
    sim_cmd->add_option("--calibrate", sim_calibrate, "Calibrate agents to these two condition means")
        ->expected(2);
    sim_cmd->add_option("--tol", sim_tol, "Calibration tolerance");

    // calibrate
    auto* cal_cmd = app.add_subcommand("calibrate", "Fit agent noise to target condition means");
    SceneSource cal_src;
    add_scene_options(cal_cmd, cal_src);
    std::vector<double> cal_targets{0.24, 0.18};
    double cal_tol = 0.02;
    std::uint64_t cal_seed = 42;
    std::string cal_out;
    cal_cmd->add_option("--targets", cal_targets, "Target means: MAGIC Veridical")->expected(2);
    cal_cmd->add_option("--tol", cal_tol, "Tolerance on each mean");
    cal_cmd->add_option("--seed", cal_seed, "Search seed");
    cal_cmd->add_option("--out", cal_out, "Write the fitted agent model JSON here");

    // scene generate
    auto* scene_cmd = app.add_subcommand("scene", "Scene utilities");
    scene_cmd->require_subcommand(1);
    auto* gen_cmd = scene_cmd->add_subcommand("generate", "Generate a deterministic scene");
    std::uint64_t gen_seed = 7;
    std::string gen_out;
    gen_cmd->add_option("--seed", gen_seed, "Scene seed");
    gen_cmd->add_option("--out", gen_out, "Scene JSON path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*retarget_cmd) return run_retarget(rt_in, rt_out, rt_scene, rt_report, rt_strict);
        if (*agree_cmd) return run_agree(ag_dem, ag_int);
        if (*sim_cmd) {
            return run_simulate(sim_src, sim_agents, sim_trials, sim_seed, sim_out, sim_noise,
                                sim_calibrate, sim_tol);
        }
        if (*cal_cmd) return run_calibrate(cal_src, cal_targets, cal_tol, cal_seed, cal_out);
        if (*gen_cmd) {
            write_scene(gen_out, generate_scene(gen_seed));
            std::cout << "scene written: " << gen_out << "\n";
            return 0;
        }
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const CalibrationFailed& e) {
        std::cerr << "calibration failed: " << e.what() << "\n";
        return 3;
    } catch (const UnreachableTarget& e) {
        std::cerr << "unreachable target: residual " << format_double(e.residual) << " m\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
