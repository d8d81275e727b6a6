#include "boomtrack/validate.hpp"

#include "boomtrack/errors.hpp"
#include "boomtrack/io.hpp"

#include <algorithm>
#include <cmath>

namespace boomtrack {

AlignResult align(const std::vector<DisplacementSample>& vision,
                  const std::vector<DisplacementSample>& sensor, double max_lag) {
    if (vision.empty() || sensor.empty()) {
        throw ValueError("alignment needs non-empty vision and sensor streams");
    }
    if (max_lag < 0.0) {
        throw ValueError("max_lag must be non-negative");
    }
    AlignResult out;
    std::size_t si = 0;
    for (const DisplacementSample& v : vision) {
        while (si + 1 < sensor.size() && sensor[si + 1].t <= v.t) {
            ++si;
        }
        if (sensor[si].t > v.t || v.t - sensor[si].t > max_lag) {
            ++out.dropped;
            continue;
        }
        AlignedPair p;
        p.t_frame = v.t;
        p.vision = v;
        p.sensor = sensor[si];
        p.lag = v.t - sensor[si].t;
        out.pairs.push_back(p);
    }
    return out;
}

ValidationReport compare(const AlignResult& aligned, double tolerance, bool magnitude) {
    if (aligned.pairs.empty()) {
        throw ValueError("nothing to compare: empty pair list");
    }
    if (tolerance <= 0.0) {
        throw ValueError("tolerance must be positive");
    }
    ValidationReport r;
    r.pairs = aligned.pairs;
    r.dropped = aligned.dropped;
    r.tolerance = tolerance;
    r.magnitude_mode = magnitude;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const AlignedPair& p : r.pairs) {
        const double err = magnitude
            ? std::abs(displacement_magnitude(p.vision) - displacement_magnitude(p.sensor))
            : std::abs(p.vision.dy - p.sensor.dy);
        r.errors.push_back(err);
        r.max_error = std::max(r.max_error, err);
        sum += err;
        sum_sq += err * err;
    }
    const double n = static_cast<double>(r.errors.size());
    r.mean_error = sum / n;
    r.rmse = std::sqrt(sum_sq / n);
    r.pass = r.max_error < r.tolerance;
    return r;
}

double manual_check(double marked_start, double marked_end, double vision_estimate) {
    return std::abs((marked_end - marked_start) - vision_estimate);
}

void write_report_csv(const ValidationReport& report, const std::filesystem::path& path) {
    atomic_write(path, [&](std::ostream& out) {
        out << "t_s,vision_dy_m,sensor_dy_m,abs_error_m\n";
        for (std::size_t i = 0; i < report.pairs.size(); ++i) {
            const AlignedPair& p = report.pairs[i];
            out << fmt_fixed(p.t_frame, 6) << "," << fmt_fixed(p.vision.dy, 6) << ","
                << fmt_fixed(p.sensor.dy, 6) << "," << fmt_fixed(report.errors[i], 6) << "\n";
        }
        const bool empty = report.pairs.empty();
        out << "max_error_m=" << (empty ? "nan" : fmt_fixed(report.max_error, 6)) << "\n";
        out << "rmse_m=" << (empty ? "nan" : fmt_fixed(report.rmse, 6)) << "\n";
        out << "mean_error_m=" << (empty ? "nan" : fmt_fixed(report.mean_error, 6)) << "\n";
        out << "tolerance_m=" << fmt_fixed(report.tolerance, 6) << "\n";
        out << "pairs=" << report.pairs.size() << "\n";
        out << "gap_count=" << report.gap_count << "\n";
        out << "dropped_no_sensor=" << report.dropped << "\n";
        out << "pass=" << (report.pass ? "true" : "false") << "\n";
    });
}

} // namespace boomtrack
