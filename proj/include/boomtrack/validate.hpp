#pragma once

#include "boomtrack/displacement.hpp"

#include <filesystem>
#include <vector>

namespace boomtrack {

// One frame paired with the most recent sensor sample at or before it.
struct AlignedPair {
    double t_frame = 0.0;
    DisplacementSample vision;
    DisplacementSample sensor;
    double lag = 0.0; // t_frame - sensor t, always >= 0
};

struct AlignResult {
    std::vector<AlignedPair> pairs;
    int dropped = 0; // vision samples with no sensor sample within max_lag
};

// Zero-order-hold alignment: never pairs a frame with a future sensor
// sample. pairs.size() + dropped == vision.size().
AlignResult align(const std::vector<DisplacementSample>& vision,
                  const std::vector<DisplacementSample>& sensor, double max_lag);

struct ValidationReport {
    std::vector<AlignedPair> pairs;
    std::vector<double> errors; // per pair, meters
    double max_error = 0.0;
    double rmse = 0.0;
    double mean_error = 0.0;
    double tolerance = 0.0;
    bool pass = false; // max_error < tolerance
    int gap_count = 0; // frames without any detection
    int dropped = 0;   // frames dropped by alignment (no sensor partner)
    bool magnitude_mode = false;
};

// Per-pair error is |vision dy - sensor dy| (the inclinometer's measured
// axis), or the magnitude difference when `magnitude` is set. Raises
// ValueError on an empty pair list.
ValidationReport compare(const AlignResult& aligned, double tolerance = 0.026,
                         bool magnitude = false);

// Manual tape-measure check: |(end - start) - vision_estimate|, meters.
double manual_check(double marked_start, double marked_end, double vision_estimate);

// Report CSV: `t_s,vision_dy_m,sensor_dy_m,abs_error_m` rows followed by a
// key=value summary footer (max_error_m, rmse_m, mean_error_m, tolerance_m,
// pairs, gap_count, dropped_no_sensor, pass).
void write_report_csv(const ValidationReport& report, const std::filesystem::path& path);

} // namespace boomtrack
