#include "magic/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace magic {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

double parse_double(std::string_view s, int line_no) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ParseError("bad number '" + std::string(s) + "'", line_no);
    }
    return v;
}

std::uint64_t parse_u64(std::string_view s, int line_no) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ParseError("bad integer '" + std::string(s) + "'", line_no);
    }
    return v;
}

json vec3_to(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from(const json& j) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
        !j[2].is_number()) {
        throw std::invalid_argument("expected a coordinate triple [x,y,z]");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json chain_to(const ArmChain& chain) {
    json joints = json::array();
    for (const Vec3& p : chain.joints) joints.push_back(vec3_to(p));
    return joints;
}

ArmChain chain_from(const json& j) {
    if (!j.is_array() || j.size() != 4) {
        throw std::invalid_argument("expected an arm as four joints");
    }
    return ArmChain::from_joints(vec3_from(j[0]), vec3_from(j[1]), vec3_from(j[2]), vec3_from(j[3]));
}

json pose_to(const BodyPose& pose) {
    return {{"root", vec3_to(pose.root)},
            {"head", vec3_to(pose.head)},
            {"facing", vec3_to(pose.facing)},
            {"left", chain_to(pose.left_arm)},
            {"right", chain_to(pose.right_arm)}};
}

BodyPose pose_from(const json& j) {
    BodyPose pose;
    pose.root = vec3_from(j.at("root"));
    pose.head = vec3_from(j.at("head"));
    pose.facing = vec3_from(j.at("facing"));
    pose.left_arm = chain_from(j.at("left"));
    pose.right_arm = chain_from(j.at("right"));
    return pose;
}

json frame_to(const WorkspaceFrame& frame) {
    return {{"table_center", vec3_to(frame.table_center)},
            {"table_size", vec3_to(frame.table_size)},
            {"forward", vec3_to(frame.forward)},
            {"up", vec3_to(frame.up)},
            {"workspace_min", vec3_to(frame.workspace_min)},
            {"workspace_max", vec3_to(frame.workspace_max)}};
}

WorkspaceFrame frame_from(const json& j) {
    WorkspaceFrame frame;
    frame.table_center = vec3_from(j.at("table_center"));
    frame.table_size = vec3_from(j.at("table_size"));
    frame.forward = vec3_from(j.at("forward"));
    frame.up = vec3_from(j.at("up"));
    frame.workspace_min = vec3_from(j.at("workspace_min"));
    frame.workspace_max = vec3_from(j.at("workspace_max"));
    frame.validate();
    return frame;
}

// Line of the error byte reported by the JSON parser, for whole-file formats.
int line_of_byte(const std::string& text, std::size_t byte) {
    int line = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') ++line;
    }
    return line;
}

json parse_document(const std::string& text, const char* expected_type) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what(), line_of_byte(text, e.byte));
    }
    if (!j.is_object() || j.value("type", "") != expected_type) {
        throw ParseError(std::string("expected a ") + expected_type + " document");
    }
    return j;
}

}  // namespace

std::string format_double(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

TraceFile read_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());

    TraceFile out;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json j = json::parse(line);
            if (!have_header) {
                if (!j.is_object() || j.value("type", "") != "magic-trace") {
                    throw std::invalid_argument("expected a magic-trace header");
                }
                out.role = j.value("role", "demonstrator");
                if (j.contains("frame")) out.frame = frame_from(j.at("frame"));
                have_header = true;
                continue;
            }
            TraceRecord rec;
            rec.t = j.at("t").get<double>();
            rec.p = vec3_from(j.at("p"));
            if (j.contains("arm")) {
                rec.arm = j.at("arm").get<std::string>();
                if (*rec.arm != "left" && *rec.arm != "right") {
                    throw std::invalid_argument("arm must be 'left' or 'right'");
                }
            }
            if (j.contains("pose")) rec.pose = pose_from(j.at("pose"));
            rec.unreachable = j.value("unreachable", false);
            rec.residual = j.value("residual", 0.0);
            rec.line = line_no;
            if (!out.records.empty() && !(rec.t > out.records.back().t)) {
                throw std::invalid_argument("timestamps must be strictly increasing");
            }
            out.records.push_back(std::move(rec));
        } catch (const json::exception& e) {
            throw ParseError(e.what(), line_no);
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    if (!have_header) throw ParseError("missing trace header", 1);
    return out;
}

void write_trace(const std::filesystem::path& path, const TraceFile& trace) {
    std::string out;
    json header = {{"type", "magic-trace"}, {"role", trace.role}, {"units", "m,s"}};
    if (trace.frame) header["frame"] = frame_to(*trace.frame);
    out += header.dump();
    out += '\n';
    for (const TraceRecord& rec : trace.records) {
        json j = {{"t", rec.t}, {"p", vec3_to(rec.p)}};
        if (rec.arm) j["arm"] = *rec.arm;
        if (rec.pose) j["pose"] = pose_to(*rec.pose);
        if (rec.unreachable) {
            j["unreachable"] = true;
            j["residual"] = rec.residual;
        }
        out += j.dump();
        out += '\n';
    }
    atomic_write(path, out);
}

OutlineTrace to_outline(const TraceFile& trace) {
    OutlineTrace outline;
    outline.samples.reserve(trace.records.size());
    for (const TraceRecord& rec : trace.records) outline.samples.push_back({rec.t, rec.p});
    return outline;
}

Scene read_scene(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    const json j = parse_document(text, "magic-scene");
    try {
        Scene scene;
        scene.frame = frame_from(j.at("frame"));
        const json& body = j.at("body");
        scene.body.head_height = body.at("head_height").get<double>();
        scene.body.shoulder_height = body.at("shoulder_height").get<double>();
        scene.body.shoulder_half_width = body.at("shoulder_half_width").get<double>();
        const json& bones = body.at("bones");
        if (!bones.is_array() || bones.size() != 3) {
            throw std::invalid_argument("body.bones must have three lengths");
        }
        for (int i = 0; i < 3; ++i) scene.body.bones[i] = bones[i].get<double>();
        scene.body.stance_back = body.at("stance_back").get<double>();
        for (const json& s : j.at("model")) {
            scene.model.push_back({vec3_from(s.at("center")), s.at("radius").get<double>()});
        }
        for (const json& set : j.at("target_sets")) {
            std::vector<TargetRegion> targets;
            for (const json& t : set) {
                targets.push_back({vec3_from(t.at("center")), t.at("radius").get<double>()});
            }
            scene.target_sets.push_back(std::move(targets));
        }
        return scene;
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
}

void write_scene(const std::filesystem::path& path, const Scene& scene) {
    json model = json::array();
    for (const Sphere& s : scene.model) {
        model.push_back({{"center", vec3_to(s.center)}, {"radius", s.radius}});
    }
    json sets = json::array();
    for (const auto& set : scene.target_sets) {
        json targets = json::array();
        for (const TargetRegion& t : set) {
            targets.push_back({{"center", vec3_to(t.center)}, {"radius", t.radius}});
        }
        sets.push_back(std::move(targets));
    }
    const json j = {{"type", "magic-scene"},
                    {"frame", frame_to(scene.frame)},
                    {"body",
                     {{"head_height", scene.body.head_height},
                      {"shoulder_height", scene.body.shoulder_height},
                      {"shoulder_half_width", scene.body.shoulder_half_width},
                      {"bones", {scene.body.bones[0], scene.body.bones[1], scene.body.bones[2]}},
                      {"stance_back", scene.body.stance_back}}},
                    {"model", std::move(model)},
                    {"target_sets", std::move(sets)}};
    atomic_write(path, j.dump(2) + "\n");
}

AgentModel read_agents(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    const json j = parse_document(text, "magic-agents");
    try {
        AgentModel defaults;
        AgentModel m;
        m.motor_sigma = j.value("motor_sigma", defaults.motor_sigma);
        m.perception_sigma_magic = j.value("perception_sigma_magic", defaults.perception_sigma_magic);
        m.perception_sigma_veridical =
            j.value("perception_sigma_veridical", defaults.perception_sigma_veridical);
        m.depth_bias_veridical = j.value("depth_bias_veridical", defaults.depth_bias_veridical);
        m.occlusion_dropout = j.value("occlusion_dropout", defaults.occlusion_dropout);
        m.samples_per_outline = j.value("samples_per_outline", defaults.samples_per_outline);
        return m;
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
}

void write_agents(const std::filesystem::path& path, const AgentModel& agents) {
    const json j = {{"type", "magic-agents"},
                    {"motor_sigma", agents.motor_sigma},
                    {"perception_sigma_magic", agents.perception_sigma_magic},
                    {"perception_sigma_veridical", agents.perception_sigma_veridical},
                    {"depth_bias_veridical", agents.depth_bias_veridical},
                    {"occlusion_dropout", agents.occlusion_dropout},
                    {"samples_per_outline", agents.samples_per_outline}};
    atomic_write(path, j.dump(2) + "\n");
}

namespace {

constexpr const char* kResultsHeader = "condition,set_id,target_id,j,duration_proxy,seed";

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string stats_line(const char* name, const ConditionStats& s) {
    std::string out = "# stats,";
    out += name;
    out += ',' + format_double(s.mean) + ',' + format_double(s.sd) + ',' + format_double(s.median) +
           ',' + std::to_string(s.n);
    return out;
}

void parse_stats(const std::vector<std::string_view>& fields, ConditionStats& s, int line_no) {
    if (fields.size() != 6) throw ParseError("stats line needs 6 fields", line_no);
    s.mean = parse_double(fields[2], line_no);
    s.sd = parse_double(fields[3], line_no);
    s.median = parse_double(fields[4], line_no);
    s.n = static_cast<int>(parse_u64(fields[5], line_no));
}

}  // namespace

void write_results(const std::filesystem::path& path, const ResultsTable& results) {
    std::string out = kResultsHeader;
    out += '\n';
    for (const TrialRecord& r : results.records) {
        out += to_string(r.condition);
        out += ',' + std::to_string(r.set_id) + ',' + std::to_string(r.target_id) + ',' +
               format_double(r.j) + ',' + format_double(r.duration_proxy) + ',' +
               std::to_string(r.seed) + '\n';
    }
    out += stats_line("MAGIC", results.summary.magic) + '\n';
    out += stats_line("Veridical", results.summary.veridical) + '\n';
    out += "# relative_improvement," + format_double(results.summary.relative_improvement) + '\n';
    atomic_write(path, out);
}

ResultsTable read_results(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());

    ResultsTable out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != kResultsHeader) throw ParseError("unexpected results header", 1);
            continue;
        }
        const auto fields = split_csv(line);
        if (line[0] == '#') {
            if (fields[0] == "# stats" && fields.size() == 6) {
                if (fields[1] == "MAGIC") {
                    parse_stats(fields, out.summary.magic, line_no);
                } else if (fields[1] == "Veridical") {
                    parse_stats(fields, out.summary.veridical, line_no);
                } else {
                    throw ParseError("unknown stats condition", line_no);
                }
            } else if (fields[0] == "# relative_improvement" && fields.size() == 2) {
                out.summary.relative_improvement = parse_double(fields[1], line_no);
            } else {
                throw ParseError("unknown summary line", line_no);
            }
            continue;
        }
        if (fields.size() != 6) throw ParseError("trial row needs 6 fields", line_no);
        TrialRecord r;
        if (fields[0] == "MAGIC") {
            r.condition = Condition::Magic;
        } else if (fields[0] == "Veridical") {
            r.condition = Condition::Veridical;
        } else {
            throw ParseError("unknown condition '" + std::string(fields[0]) + "'", line_no);
        }
        r.set_id = static_cast<int>(parse_u64(fields[1], line_no));
        r.target_id = static_cast<int>(parse_u64(fields[2], line_no));
        r.j = parse_double(fields[3], line_no);
        r.duration_proxy = parse_double(fields[4], line_no);
        r.seed = parse_u64(fields[5], line_no);
        out.records.push_back(r);
    }
    return out;
}

std::string format_summary(const RunSummary& summary) {
    char buf[128];
    std::string out = "condition      mean      sd  median     n\n";
    auto row = [&](const char* name, const ConditionStats& s) {
        std::snprintf(buf, sizeof(buf), "%-12s %6.4f  %6.4f  %6.4f  %4d\n", name, s.mean, s.sd,
                      s.median, s.n);
        out += buf;
    };
    row("MAGIC", summary.magic);
    row("Veridical", summary.veridical);
    std::snprintf(buf, sizeof(buf), "relative improvement: %.1f%%\n",
                  100.0 * summary.relative_improvement);
    out += buf;
    return out;
}

}  // namespace magic
