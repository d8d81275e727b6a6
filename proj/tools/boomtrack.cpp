#include "boomtrack/detections.hpp"
#include "boomtrack/displacement.hpp"
#include "boomtrack/errors.hpp"
#include "boomtrack/fiducial.hpp"
#include "boomtrack/frame.hpp"
#include "boomtrack/incline.hpp"
#include "boomtrack/io.hpp"
#include "boomtrack/metrics.hpp"
#include "boomtrack/sim.hpp"
#include "boomtrack/validate.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <map>
#include <sstream>

namespace bt = boomtrack;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidationFail = 1;
constexpr int kExitError = 2;

struct DictOptions {
    int grid = 6;
    int count = 50;
    int min_hamming = 9;
    std::uint64_t seed = 0;
    std::string out;
};

int run_dict(const DictOptions& opt) {
    const bt::MarkerDictionary d =
        bt::generate_dictionary(opt.grid, opt.count, opt.min_hamming, opt.seed);
    bt::save_dictionary(d, opt.out);
    std::cerr << "wrote " << d.count() << " codes (grid " << d.grid << ", min hamming "
              << d.min_hamming << ") to " << opt.out << "\n";
    return kExitOk;
}

struct SimulateOptions {
    std::string config;
    std::string out_dir;
    std::int64_t seed = -1; // <0 keeps the config's seed
};

int run_simulate(const SimulateOptions& opt) {
    bt::ScenarioConfig cfg = bt::parse_scenario(opt.config);
    if (opt.seed >= 0) {
        cfg.seed = static_cast<std::uint64_t>(opt.seed);
    }
    const bt::ScenarioOutputs out = bt::run_scenario(cfg, opt.out_dir);
    std::cerr << "simulated " << out.frame_paths.size() << " frames, "
              << out.detections_truth.records.size() << " ideal detections, "
              << out.sensor.size() << " sensor readings";
    if (out.frames_without_marker > 0) {
        std::cerr << " (" << out.frames_without_marker << " frames with the marker out of view)";
    }
    std::cerr << "\n";
    return kExitOk;
}

struct DetectOptions {
    std::string dict;
    std::string images;
    std::string out;
    int window = 15;
    int offset = 7;
    double min_perimeter = 40.0;
};

int run_detect(const DetectOptions& opt) {
    const bt::MarkerDictionary dict = bt::load_dictionary(opt.dict);
    bt::DetectorParams params;
    params.threshold_window = opt.window;
    params.threshold_offset = opt.offset;
    params.min_perimeter = opt.min_perimeter;

    std::vector<std::filesystem::path> images;
    if (!std::filesystem::is_directory(opt.images)) {
        throw bt::IoError("no such image directory: " + opt.images);
    }
    for (const auto& entry : std::filesystem::directory_iterator(opt.images)) {
        const auto ext = entry.path().extension();
        if (entry.is_regular_file() && (ext == ".pgm" || ext == ".ppm")) {
            images.push_back(entry.path());
        }
    }
    std::sort(images.begin(), images.end());

    bt::DetectionStream stream;
    int frames_without = 0;
    int zero_timestamps = 0;
    for (const auto& path : images) {
        const bt::Frame frame = bt::load_image(path);
        zero_timestamps += frame.timestamp == 0.0 ? 1 : 0;
        const auto observations = bt::detect_markers(frame, dict, params);
        if (observations.empty()) {
            ++frames_without;
        }
        for (const auto& obs : observations) {
            double min_x = obs.corners[0].x, max_x = obs.corners[0].x;
            double min_y = obs.corners[0].y, max_y = obs.corners[0].y;
            for (const auto& c : obs.corners) {
                min_x = std::min(min_x, c.x);
                max_x = std::max(max_x, c.x);
                min_y = std::min(min_y, c.y);
                max_y = std::max(max_y, c.y);
            }
            bt::Detection d;
            d.t = frame.timestamp;
            d.box = {bt::quantize(obs.center.x, 6), bt::quantize(obs.center.y, 6),
                     bt::quantize(max_x - min_x + 1.0, 6), bt::quantize(max_y - min_y + 1.0, 6)};
            d.objectness = 1.0;
            d.class_prob = 1.0;
            d.confidence = 1.0;
            stream.records.push_back(d);
        }
    }
    std::stable_sort(stream.records.begin(), stream.records.end(),
                     [](const bt::Detection& a, const bt::Detection& b) {
                         if (a.t != b.t) return a.t < b.t;
                         if (a.box.cx != b.box.cx) return a.box.cx < b.box.cx;
                         return a.box.cy < b.box.cy;
                     });
    bt::save_detections(stream, opt.out);
    std::cerr << images.size() << " frames, " << stream.records.size() << " detections, "
              << frames_without << " frames without a detection\n";
    if (zero_timestamps > 1) {
        std::cerr << "warning: " << zero_timestamps
                  << " frames have timestamp 0 (no .meta sidecars?); downstream "
                     "per-frame selection will collapse them\n";
    }
    return kExitOk;
}

struct QuantifyOptions {
    std::string dets;
    std::string out;
    double pitch = 0.003196;
    double depth = 18.2;
    double min_conf = 0.5;
    int frame_width = 1920;
    int frame_height = 1200;
    bool clamp = false;
};

int run_quantify(const QuantifyOptions& opt) {
    std::optional<bt::FrameGeometry> geometry;
    if (opt.clamp) {
        geometry = bt::FrameGeometry{opt.frame_width, opt.frame_height};
    }
    const bt::DetectionStream raw = bt::load_detections(opt.dets, geometry);
    const bt::DetectionStream best = bt::best_per_frame(raw, opt.min_conf);
    const bt::CalibrationProfile calib =
        bt::make_calibration(opt.pitch, opt.depth, opt.frame_width, opt.frame_height);
    if (best.records.empty()) {
        // nothing was ever accepted: emit an empty stream, never invented motion
        bt::write_displacement_csv({}, opt.out);
        std::cerr << "warning: no detections at or above confidence " << opt.min_conf
                  << "; wrote an empty displacement table\n";
        return kExitOk;
    }
    const bt::ReferenceAnchor anchor = bt::anchor_reference(best);
    const auto samples = bt::displacement(best, anchor, calib);
    bt::write_displacement_csv(samples, opt.out);
    std::cerr << samples.size() << " displacement samples (anchor at "
              << bt::fmt_fixed(anchor.cx0, 2) << "," << bt::fmt_fixed(anchor.cy0, 2) << " px, t0="
              << bt::fmt_fixed(anchor.t0, 3) << " s)\n";
    return kExitOk;
}

struct InclineOptions {
    std::string readings;
    std::string out;
    double radius = 18.2;
    int axis = 1;
    bool paper_compat = false;
};

int run_incline(const InclineOptions& opt) {
    const auto readings = bt::load_readings(opt.readings);
    const auto samples =
        bt::readings_to_displacement(readings, opt.radius, opt.axis == 2, opt.paper_compat);
    bt::write_displacement_csv(samples, opt.out);
    std::cerr << samples.size() << " sensor displacement samples at radius " << opt.radius
              << " m" << (opt.paper_compat ? " (paper-compat conversion)" : "") << "\n";
    return kExitOk;
}

struct ValidateOptions {
    std::string vision;
    std::string sensor;
    std::string out;
    double tolerance = 0.026;
    double max_lag = 0.15;
    int expected_frames = 0;
    bool magnitude = false;
};

int run_validate(const ValidateOptions& opt) {
    const auto vision = bt::read_displacement_csv(opt.vision);
    const auto sensor = bt::read_displacement_csv(opt.sensor);
    const int gaps = opt.expected_frames > 0
        ? std::max(0, opt.expected_frames - static_cast<int>(vision.size()))
        : 0;

    bt::ValidationReport report;
    if (vision.empty() || sensor.empty()) {
        // every frame is a gap; there is nothing to compare and nothing is invented
        report.tolerance = opt.tolerance;
        report.pass = false;
        report.gap_count = gaps;
        report.magnitude_mode = opt.magnitude;
    } else {
        const bt::AlignResult aligned = bt::align(vision, sensor, opt.max_lag);
        if (aligned.pairs.empty()) {
            report.tolerance = opt.tolerance;
            report.pass = false;
            report.gap_count = gaps;
            report.dropped = aligned.dropped;
            report.magnitude_mode = opt.magnitude;
        } else {
            report = bt::compare(aligned, opt.tolerance, opt.magnitude);
            report.gap_count = gaps;
        }
    }
    bt::write_report_csv(report, opt.out);
    std::cout << "pass=" << (report.pass ? "true" : "false") << " pairs=" << report.pairs.size()
              << " gap_count=" << report.gap_count << " dropped=" << report.dropped;
    if (!report.pairs.empty()) {
        std::cout << " max_error_m=" << bt::fmt_fixed(report.max_error, 6) << " rmse_m="
                  << bt::fmt_fixed(report.rmse, 6);
    }
    std::cout << "\n";
    return report.pass ? kExitOk : kExitValidationFail;
}

struct EvalOptions {
    std::string dets;
    std::string gt;
    std::string out;
    std::string iou = "0.5,0.9";
};

int run_eval(const EvalOptions& opt) {
    bt::EvalConfig cfg;
    cfg.iou_thresholds.clear();
    std::stringstream ss(opt.iou);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            cfg.iou_thresholds.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw bt::ValueError("bad IoU threshold '" + item + "'");
        }
    }
    if (cfg.iou_thresholds.empty()) {
        throw bt::ValueError("no IoU thresholds given");
    }
    std::sort(cfg.iou_thresholds.begin(), cfg.iou_thresholds.end());

    const bt::DetectionStream dets = bt::load_detections(opt.dets);
    std::map<double, std::vector<bt::Detection>> by_image;
    for (const auto& d : dets.records) {
        by_image[d.t].push_back(d);
    }
    const bt::GroundTruthSet gt = bt::load_ground_truth(opt.gt);
    const auto aps = bt::map_at(by_image, gt, cfg);
    bt::atomic_write(opt.out, [&](std::ostream& os) {
        os << "iou_threshold,ap\n";
        for (const auto& [threshold, ap] : aps) {
            os << bt::fmt_fixed(threshold, 6) << "," << bt::fmt_fixed(ap, 6) << "\n";
        }
    });
    for (const auto& [threshold, ap] : aps) {
        std::cout << "mAP@" << bt::fmt_fixed(threshold, 2) << "=" << bt::fmt_fixed(ap, 6) << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"boom tip displacement quantification toolkit"};
    app.require_subcommand(1);

    DictOptions dict_opt;
    auto* dict = app.add_subcommand("dict", "generate a marker dictionary");
    dict->add_option("--grid", dict_opt.grid, "bits per side")->check(CLI::PositiveNumber);
    dict->add_option("--count", dict_opt.count, "number of ids")->check(CLI::PositiveNumber);
    dict->add_option("--min-hamming", dict_opt.min_hamming, "minimum pairwise distance")
        ->check(CLI::PositiveNumber);
    dict->add_option("--seed", dict_opt.seed, "generation seed");
    dict->add_option("--out", dict_opt.out, "output dictionary file")->required();

    SimulateOptions sim_opt;
    auto* simulate = app.add_subcommand("simulate", "run the kinematic boom simulator");
    simulate->add_option("--config", sim_opt.config, "scenario config file")->required();
    simulate->add_option("--out-dir", sim_opt.out_dir, "output directory")->required();
    simulate->add_option("--seed", sim_opt.seed, "override the scenario seed");

    DetectOptions det_opt;
    auto* detect = app.add_subcommand("detect", "detect fiducial markers in a frame directory");
    detect->add_option("--dict", det_opt.dict, "dictionary file")->required();
    detect->add_option("--images", det_opt.images, "directory of PGM/PPM frames")->required();
    detect->add_option("--out", det_opt.out, "detections JSONL output")->required();
    detect->add_option("--window", det_opt.window, "adaptive threshold window, px");
    detect->add_option("--offset", det_opt.offset, "adaptive threshold offset, gray levels");
    detect->add_option("--min-perimeter", det_opt.min_perimeter, "candidate perimeter floor, px");

    QuantifyOptions quant_opt;
    auto* quantify = app.add_subcommand("quantify", "convert detections to metric displacement");
    quantify->add_option("--dets", quant_opt.dets, "detections JSONL")->required();
    quantify->add_option("--pitch", quant_opt.pitch, "pixel pitch, m/px")
        ->required()
        ->check(CLI::PositiveNumber);
    quantify->add_option("--depth", quant_opt.depth, "working depth, m")
        ->check(CLI::PositiveNumber);
    quantify->add_option("--min-conf", quant_opt.min_conf, "confidence floor");
    quantify->add_option("--frame-width", quant_opt.frame_width, "frame width, px");
    quantify->add_option("--frame-height", quant_opt.frame_height, "frame height, px");
    quantify->add_flag("--clamp", quant_opt.clamp, "clamp boxes to the frame geometry");
    quantify->add_option("--out", quant_opt.out, "displacement CSV output")->required();

    InclineOptions inc_opt;
    auto* incline = app.add_subcommand("incline", "convert inclinometer angles to displacement");
    incline->add_option("--readings", inc_opt.readings, "sensor CSV")->required();
    incline->add_option("--radius", inc_opt.radius, "boom radius, m")
        ->required()
        ->check(CLI::PositiveNumber);
    incline->add_option("--axis", inc_opt.axis, "sensor axis (1 or 2)")
        ->check(CLI::Range(1, 2));
    incline->add_flag("--paper-compat", inc_opt.paper_compat,
                      "use the published (x1.046, x304.8) chain");
    incline->add_option("--out", inc_opt.out, "displacement CSV output")->required();

    ValidateOptions val_opt;
    auto* validate = app.add_subcommand("validate", "compare vision against sensor displacement");
    validate->add_option("--vision", val_opt.vision, "vision displacement CSV")->required();
    validate->add_option("--sensor", val_opt.sensor, "sensor displacement CSV")->required();
    validate->add_option("--tolerance", val_opt.tolerance, "pass bound, m")
        ->check(CLI::PositiveNumber);
    validate->add_option("--max-lag", val_opt.max_lag, "max sensor age, s");
    validate->add_option("--expected-frames", val_opt.expected_frames,
                         "frame count for gap accounting");
    validate->add_flag("--magnitude", val_opt.magnitude, "compare magnitudes, not the vertical");
    validate->add_option("--out", val_opt.out, "report CSV output")->required();

    EvalOptions eval_opt;
    auto* eval = app.add_subcommand("eval", "detection metrics against ground truth");
    eval->add_option("--dets", eval_opt.dets, "detections JSONL")->required();
    eval->add_option("--gt", eval_opt.gt, "ground truth JSONL")->required();
    eval->add_option("--iou", eval_opt.iou, "comma-separated IoU thresholds");
    eval->add_option("--out", eval_opt.out, "metrics CSV output")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitError;
    }

    try {
        if (dict->parsed()) return run_dict(dict_opt);
        if (simulate->parsed()) return run_simulate(sim_opt);
        if (detect->parsed()) return run_detect(det_opt);
        if (quantify->parsed()) return run_quantify(quant_opt);
        if (incline->parsed()) return run_incline(inc_opt);
        if (validate->parsed()) return run_validate(val_opt);
        if (eval->parsed()) return run_eval(eval_opt);
    } catch (const bt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
