#pragma once

#include "boomtrack/displacement.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace boomtrack {

struct InclinometerReading {
    double t = 0.0;         // seconds
    double angle = 0.0;     // degrees, primary axis
    std::optional<double> angle2; // degrees, second axis when the sensor reports one
};

// Stationary-trial noise bounds in degrees of deflection from the trial mean.
struct NoiseProfile {
    double min_deflection = 0.0;
    double max_deflection = 0.0;
    int trial_count = 0;
    double trial_duration = 0.0; // seconds, longest trial span
};

// CSV `t_s,angle_deg[,angle2_deg]` with header; rows validated (row number
// reported on failure) and sorted by time.
std::vector<InclinometerReading> load_readings(const std::filesystem::path& path);
void write_readings_csv(const std::vector<InclinometerReading>& readings,
                        const std::filesystem::path& path);

// Deflection is reading minus the boom's nominal (commanded) angle, which a
// stationary-at-rest trial leaves at 0 -- the raw fluctuation the sensor
// reports, bias included. The profile keeps the min/max over all trials.
NoiseProfile characterize_noise(const std::vector<std::vector<InclinometerReading>>& trials,
                                double nominal_angle = 0.0);

// Arc length of a boom of the given radius swinging through `angle_deg`,
// using full-precision pi: angle * pi/180 * radius.
double angle_to_arc(double angle_deg, double radius_m);

// The paper's published conversion chain, kept bit-for-bit for audit:
// (angle * 1.046) feet, then * 304.8 to millimeters. The 1.046 ft/deg
// constant bakes in the 18.2 m boom radius. Returns meters.
double angle_to_arc_paper_compat(double angle_deg);

// Anchors at the first reading's angle and converts each delta to an arc
// assigned to the vertical component (dy); dx stays 0. `use_second_axis`
// selects angle2 when the stream carries one.
std::vector<DisplacementSample> readings_to_displacement(
    const std::vector<InclinometerReading>& readings, double radius_m,
    bool use_second_axis = false, bool paper_compat = false);

} // namespace boomtrack
