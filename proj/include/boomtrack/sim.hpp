#pragma once

#include "boomtrack/detections.hpp"
#include "boomtrack/fiducial.hpp"
#include "boomtrack/frame.hpp"
#include "boomtrack/geometry.hpp"
#include "boomtrack/incline.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace boomtrack {

// Lab test boom: a pivoting arm of length R on a stand. Vertical motion is
// actuator pitch; horizontal articulation is modeled as pure tip translation.
struct BoomModel {
    double length = 3.0;           // meters (field half-boom: 18.2)
    double pivot_height = 1.7;     // meters
    double vertical_range = 1.2;   // meters, +/- from rest
    double horizontal_range = 3.0; // meters, +/- from rest
};

// Commanded setpoint, held from its time until the next command.
struct MotionCommand {
    double t = 0.0;
    double vertical_angle = 0.0;   // degrees of actuator pitch
    double horizontal_offset = 0.0; // meters fore-aft at the tip
};

// Calibrated-scale pinhole: pure pixel-pitch scaling at a fixed depth.
struct CameraModel {
    double pixel_pitch = 0.003196; // meters per pixel at depth
    double principal_x = 960.0;
    double principal_y = 600.0;
    int frame_width = 1920;
    int frame_height = 1200;
    double frame_rate = 5.0; // Hz
    double depth = 18.2;     // meters

    double pixels_per_meter() const { return 1.0 / pixel_pitch; }
};

// Augmentation-style corruptions, within the ranges used for training data.
struct CorruptionSpec {
    double blur_sigma = 0.0;   // px, [0, 2.5]
    double exposure = 0.0;     // fraction, [-0.25, +0.25]
    double rotation = 0.0;     // degrees in-plane, [-20, +20]
    std::uint64_t seed = 0;
};

// Procedural crop-field backdrop: smooth value noise blended across a
// green-to-tan palette band.
struct BackgroundSpec {
    std::uint8_t green[3] = {70, 110, 60};
    std::uint8_t tan[3] = {180, 160, 110};
    int lattice = 16; // px between noise nodes
    std::uint64_t seed = 0;
};

// Tip position (horizontal, vertical) in meters relative to the rest pose.
// vertical = R * sin(pitch); horizontal = the articulation offset.
Vec2 tip_position(const BoomModel& b, const MotionCommand& cmd);

struct Projection {
    Vec2 pixel{};        // (cx, cy)
    bool in_frame = false;
};

// cx = principal_x + horizontal/pitch; cy = principal_y - vertical/pitch
// (image y grows downward). `in_frame` is false when the point leaves the
// field of view -- frames are still generated, just without the marker.
Projection project(const CameraModel& cam, Vec2 position);

// Composites the marker (rotated in-plane about its center) over the
// procedural background at the projected pixel position, then applies
// Gaussian blur and multiplicative exposure with clamping.
Frame render_scene(const CameraModel& cam, const Frame& marker, Vec2 position,
                   const BackgroundSpec& background, const CorruptionSpec& corruption,
                   int channels = 3);

// Everything run_scenario needs, parsed from a `key = value` config file.
struct ScenarioConfig {
    BoomModel boom;
    CameraModel camera;
    std::vector<MotionCommand> commands; // sorted by t
    CorruptionSpec corruption;
    NoiseProfile sensor_noise;  // min/max deflection in degrees
    double duration = 10.0;     // seconds
    double sensor_rate = 10.0;  // Hz
    int channels = 3;           // 1 => PGM frames, 3 => PPM
    int marker_id = 3;
    int marker_side = 64;       // px, divisible by grid+2
    int marker_quiet = -1;      // px; -1 means one cell
    int dict_grid = 6;
    int dict_count = 50;
    int dict_min_hamming = 9;
    std::uint64_t seed = 0;
};

ScenarioConfig parse_scenario(const std::filesystem::path& path);

// Commanded setpoint active at time t (last command at or before t; rest
// pose before the first command).
MotionCommand command_at(const std::vector<MotionCommand>& commands, double t);

struct ScenarioOutputs {
    std::vector<std::filesystem::path> frame_paths;
    std::vector<DisplacementSample> truth;      // source = sim-truth
    DetectionStream detections_truth;
    std::vector<InclinometerReading> sensor;
    MarkerDictionary dictionary;
    int frames_without_marker = 0;
};

// Renders the frame sequence plus truth.csv, detections_truth.jsonl,
// sensor.csv and dictionary.txt under out_dir. Fully deterministic for a
// given (config, seed).
ScenarioOutputs run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

// truth.csv reader (`t_s,dx_m,dy_m`), used when cross-checking estimates.
std::vector<DisplacementSample> read_truth_csv(const std::filesystem::path& path);

} // namespace boomtrack
