#pragma once

#include "boomtrack/detections.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace boomtrack {

// Pixel-to-metric bridge at a fixed working depth.
struct CalibrationProfile {
    double pixel_pitch = 0.0;  // meters per pixel at depth
    double depth = 0.0;        // meters, camera to target plane
    int frame_width_px = 0;
    int frame_height_px = 0;
    double frame_width_m = 0.0; // pixel_pitch * frame_width_px
};

// Validates invariants (positive pitch/depth, consistent frame width).
CalibrationProfile make_calibration(double pixel_pitch, double depth, int frame_width_px,
                                    int frame_height_px);

enum class DisplacementSource { vision, inclinometer, sim_truth };

const char* to_string(DisplacementSource s);
DisplacementSource displacement_source_from_string(const std::string& s);

struct DisplacementSample {
    double t = 0.0;
    double dx = 0.0; // meters, positive along image +x (fore-aft)
    double dy = 0.0; // meters, positive physically upward
    DisplacementSource source = DisplacementSource::vision;
};

// The first accepted detection's center, the displacement origin (0,0).
struct ReferenceAnchor {
    double cx0 = 0.0;
    double cy0 = 0.0;
    double t0 = 0.0;
};

// Frame width in meters divided by frame width in pixels (the paper's
// calibration identity). Both arguments must be positive.
double derive_pixel_pitch(double frame_width_m, double frame_width_px);

// Anchor at the first (lowest-t) detection. Empty streams raise ValueError.
ReferenceAnchor anchor_reference(const DetectionStream& s);

// Per detection: dx = (cx - cx0) * pitch, dy = -(cy - cy0) * pitch (image y
// grows downward, physical up is positive). The anchoring detection maps to
// exactly (0, 0). Missed frames simply produce no sample.
std::vector<DisplacementSample> displacement(const DetectionStream& s, const ReferenceAnchor& a,
                                             const CalibrationProfile& c);

double displacement_magnitude(const DisplacementSample& d);

// Displacement CSV contract: header `t_s,dx_m,dy_m,source`, 6 decimals.
void write_displacement_csv(const std::vector<DisplacementSample>& samples,
                            const std::filesystem::path& path);
std::vector<DisplacementSample> read_displacement_csv(const std::filesystem::path& path);

} // namespace boomtrack
