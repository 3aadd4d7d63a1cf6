#include <doctest.h>

#include <magic/io.hpp>
#include <magic/rng.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

using namespace magic;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "magic-io-tests";
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
}

bool same_bits(double a, double b) {
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

TraceFile sample_trace() {
    const WorkspaceFrame frame = default_workspace();
    const BodyPose rest = rest_pose(frame, BodyParams{});
    TraceFile tf;
    tf.role = "interpreter";
    tf.frame = frame;
    for (int i = 0; i < 6; ++i) {
        TraceRecord rec;
        rec.t = 0.05 * i + 0.001;
        rec.p = {0.1 * i, 1.0 - 0.02 * i, -0.2 + 0.03 * i};
        if (i % 2 == 0) rec.arm = i % 4 == 0 ? "right" : "left";
        if (i == 2) rec.pose = rest;
        if (i == 4) {
            rec.unreachable = true;
            rec.residual = 0.0625;
        }
        tf.records.push_back(rec);
    }
    return tf;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("format_double round-trips every bit pattern") {
    CHECK(format_double(0.0) == "0");
    CHECK(same_bits(std::strtod(format_double(-0.0).c_str(), nullptr), -0.0));
    for (double v : {1.0, 0.1, 1.0 / 3.0, 1e-300, 1e300, 0.24, 5e-324}) {
        CHECK(same_bits(std::strtod(format_double(v).c_str(), nullptr), v));
        CHECK(same_bits(std::strtod(format_double(-v).c_str(), nullptr), -v));
    }
    RngStream rng(12);
    int checked = 0;
    while (checked < 1000) {
        const double v = std::bit_cast<double>(rng.next_u64());
        if (!std::isfinite(v)) continue;
        ++checked;
        CHECK(same_bits(std::strtod(format_double(v).c_str(), nullptr), v));
    }
}

TEST_CASE("trace files round-trip exactly") {
    const fs::path path = scratch_dir() / "roundtrip.jsonl";
    const TraceFile tf = sample_trace();
    write_trace(path, tf);
    CHECK_FALSE(fs::exists(path.string() + ".tmp"));

    const TraceFile back = read_trace(path);
    CHECK(back.role == tf.role);
    REQUIRE(back.frame.has_value());
    CHECK(back.frame->table_center == tf.frame->table_center);
    CHECK(back.frame->workspace_max == tf.frame->workspace_max);
    REQUIRE(back.records.size() == tf.records.size());
    for (size_t i = 0; i < tf.records.size(); ++i) {
        const TraceRecord& a = tf.records[i];
        const TraceRecord& b = back.records[i];
        CHECK(same_bits(a.t, b.t));
        CHECK(a.p == b.p);
        CHECK(a.arm == b.arm);
        CHECK(a.unreachable == b.unreachable);
        CHECK(same_bits(a.residual, b.residual));
        CHECK(a.pose.has_value() == b.pose.has_value());
        if (a.pose) {
            for (int k = 0; k < 4; ++k) {
                CHECK(a.pose->left_arm.joints[k] == b.pose->left_arm.joints[k]);
                CHECK(a.pose->right_arm.joints[k] == b.pose->right_arm.joints[k]);
            }
            CHECK(a.pose->root == b.pose->root);
            CHECK(a.pose->facing == b.pose->facing);
        }
        CHECK(b.line > 1);  // reader tracks source lines
    }

    // serialize(parse(serialize(x))) is byte-identical
    const fs::path path2 = scratch_dir() / "roundtrip2.jsonl";
    write_trace(path2, back);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    const std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    const std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
}

TEST_CASE("a header-only trace has no records") {
    const fs::path path = scratch_dir() / "empty.jsonl";
    write_text(path, "{\"type\":\"magic-trace\",\"role\":\"demonstrator\",\"units\":\"m,s\"}\n");
    const TraceFile tf = read_trace(path);
    CHECK(tf.records.empty());
    CHECK(tf.role == "demonstrator");
    CHECK_FALSE(tf.frame.has_value());
}

TEST_CASE("a malformed record reports its line number") {
    const fs::path path = scratch_dir() / "malformed.jsonl";
    std::string text = "{\"type\":\"magic-trace\",\"role\":\"demonstrator\",\"units\":\"m,s\"}\n";
    for (int i = 0; i < 15; ++i) {
        text += "{\"t\":" + format_double(0.05 * (i + 1)) + ",\"p\":[0.1,1.0,0.2]}\n";
    }
    text += "{this is not json\n";  // line 17
    write_text(path, text);
    try {
        read_trace(path);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 17);
        CHECK(std::string(e.what()).find("line 17") != std::string::npos);
    }
}

TEST_CASE("trace parsing rejects bad structure with line numbers") {
    const fs::path path = scratch_dir() / "bad.jsonl";
    const std::string header = "{\"type\":\"magic-trace\",\"role\":\"demonstrator\",\"units\":\"m,s\"}\n";

    SUBCASE("missing header") {
        write_text(path, "{\"t\":0.0,\"p\":[0,0,0]}\n");
        try {
            read_trace(path);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line == 1);
        }
    }
    SUBCASE("empty file") {
        write_text(path, "");
        CHECK_THROWS_AS(read_trace(path), ParseError);
    }
    SUBCASE("non-increasing timestamps") {
        write_text(path, header + "{\"t\":0.1,\"p\":[0,0,0]}\n{\"t\":0.1,\"p\":[1,0,0]}\n");
        try {
            read_trace(path);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line == 3);
        }
    }
    SUBCASE("bad arm label") {
        write_text(path, header + "{\"t\":0.1,\"p\":[0,0,0],\"arm\":\"both\"}\n");
        try {
            read_trace(path);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line == 2);
        }
    }
    SUBCASE("bad coordinate triple") {
        write_text(path, header + "{\"t\":0.1,\"p\":[0,0]}\n");
        CHECK_THROWS_AS(read_trace(path), ParseError);
    }
}

TEST_CASE("to_outline keeps timestamps and fingertips") {
    const TraceFile tf = sample_trace();
    const OutlineTrace outline = to_outline(tf);
    REQUIRE(outline.samples.size() == tf.records.size());
    for (size_t i = 0; i < tf.records.size(); ++i) {
        CHECK(same_bits(outline.samples[i].time, tf.records[i].t));
        CHECK(outline.samples[i].fingertip == tf.records[i].p);
    }
}

TEST_CASE("scene files round-trip exactly") {
    const fs::path path = scratch_dir() / "scene.json";
    const Scene scene = generate_scene(5);
    write_scene(path, scene);
    const Scene back = read_scene(path);

    CHECK(back.frame.table_center == scene.frame.table_center);
    CHECK(back.frame.table_size == scene.frame.table_size);
    CHECK(back.frame.forward == scene.frame.forward);
    CHECK(back.frame.up == scene.frame.up);
    CHECK(back.frame.workspace_min == scene.frame.workspace_min);
    CHECK(back.frame.workspace_max == scene.frame.workspace_max);
    CHECK(same_bits(back.body.head_height, scene.body.head_height));
    CHECK(same_bits(back.body.shoulder_half_width, scene.body.shoulder_half_width));
    CHECK(back.body.bones == scene.body.bones);
    REQUIRE(back.model.size() == scene.model.size());
    for (size_t i = 0; i < scene.model.size(); ++i) {
        CHECK(back.model[i].center == scene.model[i].center);
        CHECK(same_bits(back.model[i].radius, scene.model[i].radius));
    }
    REQUIRE(back.target_sets.size() == scene.target_sets.size());
    for (size_t s = 0; s < scene.target_sets.size(); ++s) {
        REQUIRE(back.target_sets[s].size() == scene.target_sets[s].size());
        for (size_t t = 0; t < scene.target_sets[s].size(); ++t) {
            CHECK(back.target_sets[s][t].center == scene.target_sets[s][t].center);
            CHECK(same_bits(back.target_sets[s][t].radius, scene.target_sets[s][t].radius));
        }
    }
}

TEST_CASE("agent files round-trip and tolerate missing fields") {
    const fs::path path = scratch_dir() / "agents.json";
    const AgentModel model = default_agents();
    write_agents(path, model);
    const AgentModel back = read_agents(path);
    CHECK(same_bits(back.motor_sigma, model.motor_sigma));
    CHECK(same_bits(back.perception_sigma_magic, model.perception_sigma_magic));
    CHECK(same_bits(back.perception_sigma_veridical, model.perception_sigma_veridical));
    CHECK(same_bits(back.depth_bias_veridical, model.depth_bias_veridical));
    CHECK(same_bits(back.occlusion_dropout, model.occlusion_dropout));
    CHECK(back.samples_per_outline == model.samples_per_outline);

    write_text(path, "{\"type\":\"magic-agents\",\"motor_sigma\":0.001}\n");
    const AgentModel partial = read_agents(path);
    CHECK(partial.motor_sigma == 0.001);
    CHECK(partial.perception_sigma_magic == AgentModel{}.perception_sigma_magic);
    CHECK(partial.samples_per_outline == AgentModel{}.samples_per_outline);

    write_text(path, "{\"type\":\"magic-scene\"}\n");
    CHECK_THROWS_AS(read_agents(path), ParseError);
    write_text(path, "{broken\n");
    CHECK_THROWS_AS(read_agents(path), ParseError);
}

TEST_CASE("results tables round-trip with a consistent summary") {
    const fs::path path = scratch_dir() / "results.csv";
    const Scene scene = generate_scene(7);
    const ExperimentResult res = run_experiment(scene, default_agents(), 6, 5);
    write_results(path, res);
    const ResultsTable back = read_results(path);

    REQUIRE(back.records.size() == res.records.size());
    for (size_t i = 0; i < res.records.size(); ++i) {
        CHECK(back.records[i].condition == res.records[i].condition);
        CHECK(back.records[i].set_id == res.records[i].set_id);
        CHECK(back.records[i].target_id == res.records[i].target_id);
        CHECK(same_bits(back.records[i].j, res.records[i].j));
        CHECK(same_bits(back.records[i].duration_proxy, res.records[i].duration_proxy));
        CHECK(back.records[i].seed == res.records[i].seed);
    }
    CHECK(same_bits(back.summary.magic.mean, res.summary.magic.mean));
    CHECK(same_bits(back.summary.veridical.sd, res.summary.veridical.sd));
    CHECK(back.summary.magic.n == res.summary.magic.n);

    // the stored summary agrees with one recomputed from the stored rows
    const RunSummary redo = summarize(back.records);
    CHECK(std::abs(redo.magic.mean - back.summary.magic.mean) <= 1e-9);
    CHECK(std::abs(redo.veridical.mean - back.summary.veridical.mean) <= 1e-9);
    CHECK(std::abs(redo.magic.sd - back.summary.magic.sd) <= 1e-9);
    CHECK(std::abs(redo.relative_improvement - back.summary.relative_improvement) <= 1e-9);
}

TEST_CASE("results parsing rejects corrupted tables") {
    const fs::path path = scratch_dir() / "bad.csv";
    write_text(path, "wrong,header\n");
    CHECK_THROWS_AS(read_results(path), ParseError);
    write_text(path,
               "condition,set_id,target_id,j,duration_proxy,seed\n"
               "Sideways,0,0,0.5,6,1\n");
    CHECK_THROWS_AS(read_results(path), ParseError);
    write_text(path,
               "condition,set_id,target_id,j,duration_proxy,seed\n"
               "MAGIC,0,0,not-a-number,6,1\n");
    CHECK_THROWS_AS(read_results(path), ParseError);
}

TEST_CASE("format_summary prints both conditions and the improvement") {
    RunSummary s;
    s.magic = {0.24, 0.03, 0.24, 200};
    s.veridical = {0.18, 0.02, 0.18, 200};
    s.relative_improvement = (0.24 - 0.18) / 0.18;
    const std::string text = format_summary(s);
    CHECK(text.find("MAGIC") != std::string::npos);
    CHECK(text.find("Veridical") != std::string::npos);
    CHECK(text.find("relative improvement: 33.3%") != std::string::npos);
    CHECK(text.find("0.2400") != std::string::npos);
}

}  // TEST_SUITE
