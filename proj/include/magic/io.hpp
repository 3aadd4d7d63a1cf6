#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "magic/agreement.hpp"
#include "magic/sim.hpp"

namespace magic {

/// File could not be read or does not follow its format. `line` is 1-based
/// in the offending file, 0 when the failure is not tied to a line.
struct ParseError : std::runtime_error {
    int line;
    explicit ParseError(const std::string& msg, int line_no = 0)
        : std::runtime_error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + msg : msg),
          line(line_no) {}
};

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double x);

/// One line of a trace file. `p` is the tracked fingertip; `pose` and `arm`
/// carry the full skeleton when the trace feeds pose manipulation.
/// `unreachable`/`residual` flag samples whose corrected fingertip stayed
/// beyond reach on retargeted output.
struct TraceRecord {
    double t = 0.0;
    Vec3 p;
    std::optional<std::string> arm;  // "left" | "right"
    std::optional<BodyPose> pose;
    bool unreachable = false;
    double residual = 0.0;
    int line = 0;  // source line, set by read_trace; not serialized
};

/// Streaming outline capture: one JSON header line, then one record per line.
/// Units are meters and seconds throughout. The header may embed the
/// workspace frame the samples were captured in.
struct TraceFile {
    std::string role = "demonstrator";  // or "interpreter"
    std::optional<WorkspaceFrame> frame;
    std::vector<TraceRecord> records;
};

TraceFile read_trace(const std::filesystem::path& path);
void write_trace(const std::filesystem::path& path, const TraceFile& trace);

/// Timestamps and fingertips only, for agreement scoring.
OutlineTrace to_outline(const TraceFile& trace);

Scene read_scene(const std::filesystem::path& path);
void write_scene(const std::filesystem::path& path, const Scene& scene);

AgentModel read_agents(const std::filesystem::path& path);
void write_agents(const std::filesystem::path& path, const AgentModel& agents);

/// Trial rows plus the summary block, as stored in a results CSV.
using ResultsTable = ExperimentResult;

void write_results(const std::filesystem::path& path, const ResultsTable& results);
ResultsTable read_results(const std::filesystem::path& path);

/// Human-readable per-condition summary for terminal output.
std::string format_summary(const RunSummary& summary);

}  // namespace magic
