#include "boomtrack/incline.hpp"

#include "boomtrack/errors.hpp"
#include "boomtrack/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

namespace boomtrack {

namespace {

double parse_field(const std::string& s, const char* what, std::size_t row) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw FormatError(std::string("bad ") + what + " value: '" + s + "'", row);
    }
    return v;
}

} // namespace

std::vector<InclinometerReading> load_readings(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("no such readings file: " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError("empty readings file " + path.string(), 1);
    }
    bool dual_axis = false;
    if (line == "t_s,angle_deg") {
        dual_axis = false;
    } else if (line == "t_s,angle_deg,angle2_deg") {
        dual_axis = true;
    } else {
        throw FormatError("bad readings header in " + path.string() + ": '" + line + "'", 1);
    }
    std::vector<InclinometerReading> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string t_s, a_s, a2_s;
        if (!std::getline(ss, t_s, ',') || !std::getline(ss, a_s, dual_axis ? ',' : '\n')) {
            throw FormatError("bad readings row", row);
        }
        InclinometerReading r;
        r.t = parse_field(t_s, "t_s", row);
        r.angle = parse_field(a_s, "angle_deg", row);
        if (dual_axis) {
            if (!std::getline(ss, a2_s)) {
                throw FormatError("missing angle2_deg field", row);
            }
            r.angle2 = parse_field(a2_s, "angle2_deg", row);
        }
        if (r.t < 0.0) {
            throw FormatError("negative timestamp", row);
        }
        out.push_back(r);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const InclinometerReading& a, const InclinometerReading& b) {
                         return a.t < b.t;
                     });
    return out;
}

void write_readings_csv(const std::vector<InclinometerReading>& readings,
                        const std::filesystem::path& path) {
    const bool dual = !readings.empty() && readings.front().angle2.has_value();
    atomic_write(path, [&](std::ostream& out) {
        out << (dual ? "t_s,angle_deg,angle2_deg" : "t_s,angle_deg") << "\n";
        for (const InclinometerReading& r : readings) {
            out << fmt_fixed(r.t, 6) << "," << fmt_fixed(r.angle, 6);
            if (dual) {
                out << "," << fmt_fixed(r.angle2.value_or(0.0), 6);
            }
            out << "\n";
        }
    });
}

NoiseProfile characterize_noise(const std::vector<std::vector<InclinometerReading>>& trials,
                                double nominal_angle) {
    if (trials.empty()) {
        throw ValueError("noise characterization needs at least one trial");
    }
    NoiseProfile p;
    p.trial_count = static_cast<int>(trials.size());
    bool first = true;
    for (const auto& trial : trials) {
        if (trial.empty()) {
            throw ValueError("empty stationary trial");
        }
        for (const InclinometerReading& r : trial) {
            const double deflection = r.angle - nominal_angle;
            if (first) {
                p.min_deflection = p.max_deflection = deflection;
                first = false;
            } else {
                p.min_deflection = std::min(p.min_deflection, deflection);
                p.max_deflection = std::max(p.max_deflection, deflection);
            }
        }
        p.trial_duration = std::max(p.trial_duration, trial.back().t - trial.front().t);
    }
    return p;
}

double angle_to_arc(double angle_deg, double radius_m) {
    if (radius_m <= 0.0) {
        throw ValueError("radius must be positive");
    }
    return angle_deg * std::numbers::pi / 180.0 * radius_m;
}

double angle_to_arc_paper_compat(double angle_deg) {
    return angle_deg * 1.046 * 304.8 / 1000.0;
}

std::vector<DisplacementSample> readings_to_displacement(
    const std::vector<InclinometerReading>& readings, double radius_m, bool use_second_axis,
    bool paper_compat) {
    if (readings.empty()) {
        throw ValueError("cannot convert an empty reading stream");
    }
    if (radius_m <= 0.0) {
        throw ValueError("radius must be positive");
    }
    auto axis = [&](const InclinometerReading& r) {
        if (!use_second_axis) return r.angle;
        if (!r.angle2) throw ValueError("stream has no second axis");
        return *r.angle2;
    };
    const double angle0 = axis(readings.front());
    std::vector<DisplacementSample> out;
    out.reserve(readings.size());
    for (const InclinometerReading& r : readings) {
        const double delta = axis(r) - angle0;
        DisplacementSample s;
        s.t = r.t;
        s.dx = 0.0;
        s.dy = paper_compat ? angle_to_arc_paper_compat(delta) : angle_to_arc(delta, radius_m);
        s.source = DisplacementSource::inclinometer;
        out.push_back(s);
    }
    return out;
}

} // namespace boomtrack
