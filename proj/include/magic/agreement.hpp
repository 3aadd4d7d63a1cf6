#pragma once

#include <vector>

#include "magic/hull.hpp"

namespace magic {

struct OutlineSample {
    double time = 0.0;  // seconds since outline start
    Vec3 fingertip;
};

/// Fingertip samples recorded while the outline control is held.
struct OutlineTrace {
    std::vector<OutlineSample> samples;

    // Strictly increasing timestamps, at least one sample.
    void validate() const;
};

struct AgreementResult {
    double j = 0.0;
    double v_dem = 0.0;
    double v_int = 0.0;
    double v_overlap = 0.0;
    bool degenerate_dem = false;
    bool degenerate_int = false;
};

/// Convex hull of every fingertip sample in the trace (no subsampling).
/// Throws DegenerateOutline for traces without 3D extent.
ConvexHull outline_hull(const OutlineTrace& trace);

/// Volumetric Jaccard similarity between the two outlined solids:
/// J = V_overlap / (V_dem + V_int - V_overlap). A degenerate outline on
/// either side yields J = 0 with the matching flag set instead of an error.
AgreementResult pointing_agreement(const OutlineTrace& dem, const OutlineTrace& interp);

}  // namespace magic
