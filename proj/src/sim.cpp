#include "boomtrack/sim.hpp"

#include "boomtrack/errors.hpp"
#include "boomtrack/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace boomtrack {

Vec2 tip_position(const BoomModel& b, const MotionCommand& cmd) {
    if (b.length <= 0.0) {
        throw ValueError("boom length must be positive");
    }
    const double vertical = b.length * std::sin(cmd.vertical_angle * std::numbers::pi / 180.0);
    if (std::abs(vertical) > b.vertical_range + 1e-9) {
        throw ValueError("commanded vertical position " + fmt_fixed(vertical, 3) +
                         " m exceeds range " + fmt_fixed(b.vertical_range, 3) + " m");
    }
    if (std::abs(cmd.horizontal_offset) > b.horizontal_range + 1e-9) {
        throw ValueError("commanded horizontal offset exceeds range");
    }
    return {cmd.horizontal_offset, vertical};
}

Projection project(const CameraModel& cam, Vec2 position) {
    Projection p;
    p.pixel.x = cam.principal_x + position.x / cam.pixel_pitch;
    p.pixel.y = cam.principal_y - position.y / cam.pixel_pitch;
    p.in_frame = p.pixel.x >= 0.0 && p.pixel.x <= cam.frame_width - 1 && p.pixel.y >= 0.0 &&
                 p.pixel.y <= cam.frame_height - 1;
    return p;
}

namespace {

double lattice_noise(int ix, int iy, std::uint64_t seed) {
    const std::uint64_t hashed = hash_mix(static_cast<std::uint64_t>(ix) * 0x100000001b3ULL ^
                                          static_cast<std::uint64_t>(iy) * 0x9e3779b97f4a7c15ULL ^
                                          seed);
    return static_cast<double>(hashed >> 11) * (1.0 / 9007199254740992.0);
}

void fill_background(Frame& f, const BackgroundSpec& bg) {
    const int step = std::max(2, bg.lattice);
    for (int y = 0; y < f.height; ++y) {
        const int jy = y / step;
        const double fy = static_cast<double>(y % step) / step;
        for (int x = 0; x < f.width; ++x) {
            const int jx = x / step;
            const double fx = static_cast<double>(x % step) / step;
            const double n00 = lattice_noise(jx, jy, bg.seed);
            const double n10 = lattice_noise(jx + 1, jy, bg.seed);
            const double n01 = lattice_noise(jx, jy + 1, bg.seed);
            const double n11 = lattice_noise(jx + 1, jy + 1, bg.seed);
            const double u = (n00 * (1 - fx) + n10 * fx) * (1 - fy) +
                             (n01 * (1 - fx) + n11 * fx) * fy;
            // small per-pixel grain on top of the smooth field
            const double grain =
                (lattice_noise(x, y, bg.seed ^ 0x5bd1e995ULL) - 0.5) * 16.0;
            if (f.channels == 1) {
                const double g = 0.299 * bg.green[0] + 0.587 * bg.green[1] + 0.114 * bg.green[2];
                const double t = 0.299 * bg.tan[0] + 0.587 * bg.tan[1] + 0.114 * bg.tan[2];
                const double v = g * (1 - u) + t * u + grain;
                f.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            } else {
                for (int c = 0; c < 3; ++c) {
                    const double v = bg.green[c] * (1 - u) + bg.tan[c] * u + grain;
                    f.at(x, y, c) =
                        static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
                }
            }
        }
    }
}

double bilinear_gray(const Frame& m, double x, double y) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    auto value = [&](int px, int py) {
        px = std::clamp(px, 0, m.width - 1);
        py = std::clamp(py, 0, m.height - 1);
        return static_cast<double>(m.at(px, py));
    };
    const double top = value(x0, y0) * (1 - fx) + value(x0 + 1, y0) * fx;
    const double bot = value(x0, y0 + 1) * (1 - fx) + value(x0 + 1, y0 + 1) * fx;
    return top * (1 - fy) + bot * fy;
}

void composite_marker(Frame& scene, const Frame& marker, Vec2 center, double rotation_deg) {
    const double theta = rotation_deg * std::numbers::pi / 180.0;
    const double cos_t = std::cos(theta);
    const double sin_t = std::sin(theta);
    const double half = (marker.width - 1) / 2.0;
    const double reach = marker.width * std::numbers::sqrt2 / 2.0 + 2.0;
    const int x_lo = std::max(0, static_cast<int>(std::floor(center.x - reach)));
    const int x_hi = std::min(scene.width - 1, static_cast<int>(std::ceil(center.x + reach)));
    const int y_lo = std::max(0, static_cast<int>(std::floor(center.y - reach)));
    const int y_hi = std::min(scene.height - 1, static_cast<int>(std::ceil(center.y + reach)));
    for (int y = y_lo; y <= y_hi; ++y) {
        for (int x = x_lo; x <= x_hi; ++x) {
            const double dx = x - center.x;
            const double dy = y - center.y;
            const double lx = cos_t * dx + sin_t * dy + half;
            const double ly = -sin_t * dx + cos_t * dy + half;
            if (lx < 0.0 || lx > marker.width - 1 || ly < 0.0 || ly > marker.height - 1) {
                continue;
            }
            const std::uint8_t v = static_cast<std::uint8_t>(
                std::clamp(std::lround(bilinear_gray(marker, lx, ly)), 0L, 255L));
            for (int c = 0; c < scene.channels; ++c) {
                scene.at(x, y, c) = v;
            }
        }
    }
}

void gaussian_blur(Frame& f, double sigma) {
    if (sigma <= 0.0) {
        return;
    }
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double w = std::exp(-(i * i) / (2.0 * sigma * sigma));
        kernel[static_cast<std::size_t>(i + radius)] = w;
        sum += w;
    }
    for (double& w : kernel) {
        w /= sum;
    }
    Frame tmp = f;
    for (int c = 0; c < f.channels; ++c) {
        // horizontal pass f -> tmp
        for (int y = 0; y < f.height; ++y) {
            for (int x = 0; x < f.width; ++x) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    const int sx = std::clamp(x + i, 0, f.width - 1);
                    acc += kernel[static_cast<std::size_t>(i + radius)] * f.at(sx, y, c);
                }
                tmp.at(x, y, c) =
                    static_cast<std::uint8_t>(std::clamp(std::lround(acc), 0L, 255L));
            }
        }
        // vertical pass tmp -> f
        for (int y = 0; y < f.height; ++y) {
            for (int x = 0; x < f.width; ++x) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    const int sy = std::clamp(y + i, 0, f.height - 1);
                    acc += kernel[static_cast<std::size_t>(i + radius)] * tmp.at(x, sy, c);
                }
                f.at(x, y, c) =
                    static_cast<std::uint8_t>(std::clamp(std::lround(acc), 0L, 255L));
            }
        }
    }
}

void apply_exposure(Frame& f, double exposure) {
    if (exposure == 0.0) {
        return;
    }
    const double gain = 1.0 + exposure;
    for (std::uint8_t& v : f.pixels) {
        v = static_cast<std::uint8_t>(std::clamp(std::lround(v * gain), 0L, 255L));
    }
}

void validate_corruption(const CorruptionSpec& c) {
    if (c.blur_sigma < 0.0 || c.blur_sigma > 2.5) {
        throw ValueError("blur sigma outside [0, 2.5]");
    }
    if (c.exposure < -0.25 || c.exposure > 0.25) {
        throw ValueError("exposure outside [-0.25, 0.25]");
    }
    if (c.rotation < -20.0 || c.rotation > 20.0) {
        throw ValueError("rotation outside [-20, 20] degrees");
    }
}

} // namespace

Frame render_scene(const CameraModel& cam, const Frame& marker, Vec2 position,
                   const BackgroundSpec& background, const CorruptionSpec& corruption,
                   int channels) {
    validate_corruption(corruption);
    if (marker.channels != 1) {
        throw ValueError("marker must be grayscale");
    }
    if (marker.width >= cam.frame_width || marker.height >= cam.frame_height) {
        throw ValueError("marker does not fit the frame");
    }
    Frame scene = make_frame(cam.frame_width, cam.frame_height, channels);
    fill_background(scene, background);
    const Projection proj = project(cam, position);
    composite_marker(scene, marker, proj.pixel, corruption.rotation);
    gaussian_blur(scene, corruption.blur_sigma);
    apply_exposure(scene, corruption.exposure);
    return scene;
}

MotionCommand command_at(const std::vector<MotionCommand>& commands, double t) {
    MotionCommand active; // rest pose before the first command
    active.t = t;
    for (const MotionCommand& cmd : commands) {
        if (cmd.t <= t) {
            active.vertical_angle = cmd.vertical_angle;
            active.horizontal_offset = cmd.horizontal_offset;
        } else {
            break;
        }
    }
    return active;
}

namespace {

double parse_double(const std::string& s, std::size_t line) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw FormatError("bad numeric value '" + s + "'", line);
    }
    return v;
}

long long parse_int(const std::string& s, std::size_t line) {
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw FormatError("bad integer value '" + s + "'", line);
    }
    return v;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

ScenarioConfig parse_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("no such scenario file: " + path.string());
    }
    ScenarioConfig cfg;
    bool principal_x_set = false;
    bool principal_y_set = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line.substr(0, line.find('#')));
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw FormatError("expected 'key = value'", lineno);
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key == "boom_length_m") cfg.boom.length = parse_double(value, lineno);
        else if (key == "pivot_height_m") cfg.boom.pivot_height = parse_double(value, lineno);
        else if (key == "vertical_range_m") cfg.boom.vertical_range = parse_double(value, lineno);
        else if (key == "horizontal_range_m") cfg.boom.horizontal_range = parse_double(value, lineno);
        else if (key == "pixel_pitch_m") cfg.camera.pixel_pitch = parse_double(value, lineno);
        else if (key == "depth_m") cfg.camera.depth = parse_double(value, lineno);
        else if (key == "frame_width") cfg.camera.frame_width = static_cast<int>(parse_int(value, lineno));
        else if (key == "frame_height") cfg.camera.frame_height = static_cast<int>(parse_int(value, lineno));
        else if (key == "frame_rate_hz") cfg.camera.frame_rate = parse_double(value, lineno);
        else if (key == "principal_x") { cfg.camera.principal_x = parse_double(value, lineno); principal_x_set = true; }
        else if (key == "principal_y") { cfg.camera.principal_y = parse_double(value, lineno); principal_y_set = true; }
        else if (key == "duration_s") cfg.duration = parse_double(value, lineno);
        else if (key == "sensor_rate_hz") cfg.sensor_rate = parse_double(value, lineno);
        else if (key == "channels") cfg.channels = static_cast<int>(parse_int(value, lineno));
        else if (key == "marker_id") cfg.marker_id = static_cast<int>(parse_int(value, lineno));
        else if (key == "marker_side_px") cfg.marker_side = static_cast<int>(parse_int(value, lineno));
        else if (key == "marker_quiet_px") cfg.marker_quiet = static_cast<int>(parse_int(value, lineno));
        else if (key == "dict_grid") cfg.dict_grid = static_cast<int>(parse_int(value, lineno));
        else if (key == "dict_count") cfg.dict_count = static_cast<int>(parse_int(value, lineno));
        else if (key == "dict_min_hamming") cfg.dict_min_hamming = static_cast<int>(parse_int(value, lineno));
        else if (key == "blur_sigma") cfg.corruption.blur_sigma = parse_double(value, lineno);
        else if (key == "exposure") cfg.corruption.exposure = parse_double(value, lineno);
        else if (key == "rotation_deg") cfg.corruption.rotation = parse_double(value, lineno);
        else if (key == "noise_min_deg") cfg.sensor_noise.min_deflection = parse_double(value, lineno);
        else if (key == "noise_max_deg") cfg.sensor_noise.max_deflection = parse_double(value, lineno);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(value, lineno));
        else if (key == "command") {
            std::stringstream ss(value);
            std::string t_s, a_s, o_s;
            if (!std::getline(ss, t_s, ',') || !std::getline(ss, a_s, ',') ||
                !std::getline(ss, o_s)) {
                throw FormatError("command needs 't, angle_deg, offset_m'", lineno);
            }
            MotionCommand cmd;
            cmd.t = parse_double(trim(t_s), lineno);
            cmd.vertical_angle = parse_double(trim(a_s), lineno);
            cmd.horizontal_offset = parse_double(trim(o_s), lineno);
            cfg.commands.push_back(cmd);
        } else {
            throw FormatError("unknown scenario key '" + key + "'", lineno);
        }
    }
    if (!principal_x_set) cfg.camera.principal_x = cfg.camera.frame_width / 2.0;
    if (!principal_y_set) cfg.camera.principal_y = cfg.camera.frame_height / 2.0;
    if (cfg.duration <= 0.0) throw FormatError("duration must be positive");
    if (cfg.camera.frame_rate <= 0.0 || cfg.sensor_rate <= 0.0) {
        throw FormatError("rates must be positive");
    }
    if (cfg.channels != 1 && cfg.channels != 3) {
        throw FormatError("channels must be 1 or 3");
    }
    if (cfg.sensor_noise.min_deflection > cfg.sensor_noise.max_deflection) {
        throw FormatError("noise_min_deg exceeds noise_max_deg");
    }
    std::stable_sort(cfg.commands.begin(), cfg.commands.end(),
                     [](const MotionCommand& a, const MotionCommand& b) { return a.t < b.t; });
    return cfg;
}

ScenarioOutputs run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
    validate_corruption(cfg.corruption);
    std::filesystem::create_directories(out_dir / "frames");

    ScenarioOutputs out;
    out.dictionary = generate_dictionary(cfg.dict_grid, cfg.dict_count, cfg.dict_min_hamming,
                                         cfg.seed);
    const int quiet = cfg.marker_quiet >= 0 ? cfg.marker_quiet
                                            : cfg.marker_side / (cfg.dict_grid + 2);
    const Frame marker = render_marker(out.dictionary, cfg.marker_id, cfg.marker_side, quiet);
    save_dictionary(out.dictionary, out_dir / "dictionary.txt");

    BackgroundSpec bg;
    bg.seed = cfg.seed;
    CorruptionSpec corruption = cfg.corruption;
    corruption.seed = cfg.seed;

    const long long n_frames = std::max(1LL, std::llround(cfg.duration * cfg.camera.frame_rate));
    const Vec2 tip0 = tip_position(cfg.boom, command_at(cfg.commands, 0.0));
    out.detections_truth.frame_geometry =
        FrameGeometry{cfg.camera.frame_width, cfg.camera.frame_height};

    for (long long k = 0; k < n_frames; ++k) {
        const double t = quantize(static_cast<double>(k) / cfg.camera.frame_rate, 6);
        const MotionCommand cmd = command_at(cfg.commands, t);
        const Vec2 tip = tip_position(cfg.boom, cmd);
        DisplacementSample truth;
        truth.t = t;
        truth.dx = quantize(tip.x - tip0.x, 6);
        truth.dy = quantize(tip.y - tip0.y, 6);
        truth.source = DisplacementSource::sim_truth;
        out.truth.push_back(truth);

        Frame frame = render_scene(cfg.camera, marker, tip, bg, corruption, cfg.channels);
        frame.timestamp = t;
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%06lld.%s", k,
                      cfg.channels == 1 ? "pgm" : "ppm");
        const std::filesystem::path frame_path = out_dir / "frames" / name;
        save_image(frame, frame_path);
        out.frame_paths.push_back(frame_path);

        const Projection proj = project(cfg.camera, tip);
        const double half_side = cfg.marker_side / 2.0;
        const bool box_in_frame = proj.pixel.x - half_side >= 0.0 &&
                                  proj.pixel.x + half_side <= cfg.camera.frame_width &&
                                  proj.pixel.y - half_side >= 0.0 &&
                                  proj.pixel.y + half_side <= cfg.camera.frame_height;
        if (box_in_frame) {
            Detection d;
            d.t = t;
            d.box = {quantize(proj.pixel.x, 6), quantize(proj.pixel.y, 6),
                     static_cast<double>(cfg.marker_side), static_cast<double>(cfg.marker_side)};
            d.objectness = 1.0;
            d.class_prob = 1.0;
            d.confidence = 1.0;
            out.detections_truth.records.push_back(d);
        } else {
            ++out.frames_without_marker;
        }
    }

    std::mt19937_64 noise_rng(cfg.seed ^ 0x73656e736f72ULL); // sensor stream
    const long long n_sensor = std::max(1LL, std::llround(cfg.duration * cfg.sensor_rate));
    for (long long j = 0; j < n_sensor; ++j) {
        const double t = quantize(static_cast<double>(j) / cfg.sensor_rate, 6);
        const MotionCommand cmd = command_at(cfg.commands, t);
        InclinometerReading r;
        r.t = t;
        r.angle = quantize(cmd.vertical_angle +
                               uniform_in(noise_rng, cfg.sensor_noise.min_deflection,
                                          cfg.sensor_noise.max_deflection),
                           6);
        out.sensor.push_back(r);
    }

    atomic_write(out_dir / "truth.csv", [&](std::ostream& os) {
        os << "t_s,dx_m,dy_m\n";
        for (const DisplacementSample& s : out.truth) {
            os << fmt_fixed(s.t, 6) << "," << fmt_fixed(s.dx, 6) << "," << fmt_fixed(s.dy, 6)
               << "\n";
        }
    });
    save_detections(out.detections_truth, out_dir / "detections_truth.jsonl");
    write_readings_csv(out.sensor, out_dir / "sensor.csv");
    return out;
}

std::vector<DisplacementSample> read_truth_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("no such truth file: " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || line != "t_s,dx_m,dy_m") {
        throw FormatError("bad truth CSV header in " + path.string(), 1);
    }
    std::vector<DisplacementSample> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string t_s, dx_s, dy_s;
        if (!std::getline(ss, t_s, ',') || !std::getline(ss, dx_s, ',') ||
            !std::getline(ss, dy_s)) {
            throw FormatError("bad truth row", lineno);
        }
        DisplacementSample s;
        s.t = parse_double(t_s, lineno);
        s.dx = parse_double(dx_s, lineno);
        s.dy = parse_double(dy_s, lineno);
        s.source = DisplacementSource::sim_truth;
        out.push_back(s);
    }
    return out;
}

} // namespace boomtrack
