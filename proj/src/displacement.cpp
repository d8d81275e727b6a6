#include "boomtrack/displacement.hpp"

#include "boomtrack/errors.hpp"
#include "boomtrack/io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace boomtrack {

CalibrationProfile make_calibration(double pixel_pitch, double depth, int frame_width_px,
                                    int frame_height_px) {
    if (pixel_pitch <= 0.0) throw ValueError("pixel pitch must be positive");
    if (depth <= 0.0) throw ValueError("depth must be positive");
    if (frame_width_px <= 0 || frame_height_px <= 0) {
        throw ValueError("frame dimensions must be positive");
    }
    CalibrationProfile c;
    c.pixel_pitch = pixel_pitch;
    c.depth = depth;
    c.frame_width_px = frame_width_px;
    c.frame_height_px = frame_height_px;
    c.frame_width_m = pixel_pitch * frame_width_px;
    return c;
}

const char* to_string(DisplacementSource s) {
    switch (s) {
        case DisplacementSource::vision: return "vision";
        case DisplacementSource::inclinometer: return "inclinometer";
        case DisplacementSource::sim_truth: return "sim-truth";
    }
    return "vision";
}

DisplacementSource displacement_source_from_string(const std::string& s) {
    if (s == "vision") return DisplacementSource::vision;
    if (s == "inclinometer") return DisplacementSource::inclinometer;
    if (s == "sim-truth") return DisplacementSource::sim_truth;
    throw ValueError("unknown displacement source: '" + s + "'");
}

double derive_pixel_pitch(double frame_width_m, double frame_width_px) {
    if (frame_width_m <= 0.0 || frame_width_px <= 0.0) {
        throw ValueError("pixel pitch derivation requires positive measurements");
    }
    return frame_width_m / frame_width_px;
}

ReferenceAnchor anchor_reference(const DetectionStream& s) {
    if (s.records.empty()) {
        throw ValueError("cannot anchor reference: no detections ever accepted");
    }
    const Detection& first = s.records.front();
    return {first.box.cx, first.box.cy, first.t};
}

std::vector<DisplacementSample> displacement(const DetectionStream& s, const ReferenceAnchor& a,
                                             const CalibrationProfile& c) {
    std::vector<DisplacementSample> out;
    out.reserve(s.records.size());
    for (const Detection& d : s.records) {
        DisplacementSample sample;
        sample.t = d.t;
        sample.dx = (d.box.cx - a.cx0) * c.pixel_pitch;
        sample.dy = -(d.box.cy - a.cy0) * c.pixel_pitch;
        sample.source = DisplacementSource::vision;
        out.push_back(sample);
    }
    return out;
}

double displacement_magnitude(const DisplacementSample& d) {
    if (!std::isfinite(d.dx) || !std::isfinite(d.dy)) {
        throw ValueError("displacement sample has non-finite components");
    }
    return std::hypot(d.dx, d.dy);
}

void write_displacement_csv(const std::vector<DisplacementSample>& samples,
                            const std::filesystem::path& path) {
    atomic_write(path, [&](std::ostream& out) {
        out << "t_s,dx_m,dy_m,source\n";
        for (const DisplacementSample& s : samples) {
            out << fmt_fixed(s.t, 6) << "," << fmt_fixed(s.dx, 6) << "," << fmt_fixed(s.dy, 6)
                << "," << to_string(s.source) << "\n";
        }
    });
}

std::vector<DisplacementSample> read_displacement_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("no such displacement file: " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || line != "t_s,dx_m,dy_m,source") {
        throw FormatError("bad displacement CSV header in " + path.string(), 1);
    }
    std::vector<DisplacementSample> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string t_s, dx_s, dy_s, src_s;
        if (!std::getline(ss, t_s, ',') || !std::getline(ss, dx_s, ',') ||
            !std::getline(ss, dy_s, ',') || !std::getline(ss, src_s)) {
            throw FormatError("bad displacement row", lineno);
        }
        char* end = nullptr;
        DisplacementSample s;
        s.t = std::strtod(t_s.c_str(), &end);
        if (end != t_s.c_str() + t_s.size()) throw FormatError("bad t_s value", lineno);
        s.dx = std::strtod(dx_s.c_str(), &end);
        if (end != dx_s.c_str() + dx_s.size()) throw FormatError("bad dx_m value", lineno);
        s.dy = std::strtod(dy_s.c_str(), &end);
        if (end != dy_s.c_str() + dy_s.size()) throw FormatError("bad dy_m value", lineno);
        try {
            s.source = displacement_source_from_string(src_s);
        } catch (const ValueError& e) {
            throw FormatError(e.what(), lineno);
        }
        out.push_back(s);
    }
    return out;
}

} // namespace boomtrack
