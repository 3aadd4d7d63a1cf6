#include "magic/agreement.hpp"

#include <optional>

namespace magic {

void OutlineTrace::validate() const {
    if (samples.empty()) throw std::invalid_argument("OutlineTrace: no samples");
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (!(samples[i].time > samples[i - 1].time)) {
            throw std::invalid_argument("OutlineTrace: timestamps must be strictly increasing");
        }
    }
}

ConvexHull outline_hull(const OutlineTrace& trace) {
    trace.validate();
    std::vector<Vec3> points;
    points.reserve(trace.samples.size());
    for (const OutlineSample& s : trace.samples) points.push_back(s.fingertip);
    return convex_hull(points);
}

AgreementResult pointing_agreement(const OutlineTrace& dem, const OutlineTrace& interp) {
    AgreementResult result;

    std::optional<ConvexHull> hull_dem, hull_int;
    try {
        hull_dem = outline_hull(dem);
        result.v_dem = mesh_volume(hull_dem->mesh);
    } catch (const DegenerateOutline&) {
        result.degenerate_dem = true;
    }
    try {
        hull_int = outline_hull(interp);
        result.v_int = mesh_volume(hull_int->mesh);
    } catch (const DegenerateOutline&) {
        result.degenerate_int = true;
    }
    if (result.degenerate_dem || result.degenerate_int) {
        return result;  // trivially short press: score zero, keep the flags
    }

    const TriMesh overlap = intersect_convex(*hull_dem, *hull_int);
    result.v_overlap = overlap.empty() ? 0.0 : mesh_volume(overlap);

    const double v_union = result.v_dem + result.v_int - result.v_overlap;
    result.j = v_union > 0.0 ? result.v_overlap / v_union : 0.0;
    return result;
}

}  // namespace magic
