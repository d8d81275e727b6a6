// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Criteria pin the published constants, the formula identities, and the
// simulator-oracle properties, each with its runtime budget.

#include "boomtrack/detections.hpp"
#include "boomtrack/displacement.hpp"
#include "boomtrack/fiducial.hpp"
#include "boomtrack/frame.hpp"
#include "boomtrack/incline.hpp"
#include "boomtrack/io.hpp"
#include "boomtrack/metrics.hpp"
#include "boomtrack/sim.hpp"
#include "boomtrack/validate.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#ifndef BOOMTRACK_CLI
#error "BOOMTRACK_CLI must point at the built binary"
#endif

namespace bt = boomtrack;

namespace {

struct Checker {
    bool ok = true;
    std::string detail;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
    void note(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

int run_cli(const std::string& args, const std::filesystem::path& log) {
    const std::string cmd =
        std::string(BOOMTRACK_CLI) + " " + args + " >" + log.string() + " 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_lab_scenario(const std::filesystem::path& path, int marker_side, double duration,
                        double step_angle_deg, int seed) {
    std::ofstream out(path);
    out << "boom_length_m = 3.0\npivot_height_m = 1.7\n";
    out << "vertical_range_m = 1.2\nhorizontal_range_m = 3.0\n";
    out << "frame_width = 640\nframe_height = 480\n";
    out << "pixel_pitch_m = 0.004\ndepth_m = 5.0\n";
    out << "frame_rate_hz = 5\nsensor_rate_hz = 10\n";
    out << "duration_s = " << duration << "\nchannels = 1\n";
    out << "marker_id = 3\nmarker_side_px = " << marker_side << "\n";
    out << "dict_grid = 6\ndict_count = 50\ndict_min_hamming = 9\n";
    out << "noise_min_deg = -0.07\nnoise_max_deg = -0.03\n";
    out << "seed = " << seed << "\n";
    out << "command = 0, 0, 0\n";
    out << "command = " << duration * 0.4 << ", " << step_angle_deg << ", 0\n";
}

// ---------------------------------------------------------------------------

Checker criterion_pixel_pitch() {
    Checker c;
    const auto dir = test_scratch_dir("acc1");
    {
        bt::DetectionStream s;
        bt::Detection a;
        a.t = 0.0;
        a.box = {960.0, 600.0, 32, 32};
        bt::Detection b = a;
        b.t = 0.2;
        b.box.cy = 795.9; // 195.9 px downward
        s.records = {a, b};
        bt::save_detections(s, dir / "dets.jsonl");
    }
    c.expect(run_cli("quantify --dets " + (dir / "dets.jsonl").string() +
                         " --pitch 0.003196 --out " + (dir / "disp.csv").string(),
                     dir / "log.txt") == 0,
             "quantify exited nonzero");
    const auto samples = bt::read_displacement_csv(dir / "disp.csv");
    c.expect(samples.size() == 2, "expected 2 samples");
    if (samples.size() == 2) {
        const double got = std::abs(samples[1].dy);
        c.expect(std::abs(got - 0.626) < 0.001, "|dy| off the 626 mm model reading");
        c.note("195.9 px -> " + bt::fmt_fixed(got, 6) + " m vs 0.626 m");
    }
    return c;
}

Checker criterion_arc_conversion() {
    Checker c;
    const double lower_exact = bt::angle_to_arc(0.03, 18.2);
    const double upper_exact = bt::angle_to_arc(0.07, 18.2);
    const double lower_compat = bt::angle_to_arc_paper_compat(0.03);
    const double upper_compat = bt::angle_to_arc_paper_compat(0.07);
    // The published 0.0095 m comes from the exact arc; the published 0.0223 m
    // comes from the paper's own (x1.046, x304.8) chain. Each mode reproduces
    // the figure it produced.
    c.expect(std::abs(lower_exact - 0.0095) < 5e-5, "0.03 deg exact arc misses 0.0095 m");
    c.expect(std::abs(upper_compat - 0.0223) < 5e-5, "0.07 deg compat chain misses 0.0223 m");
    c.note("0.03deg: exact " + bt::fmt_fixed(lower_exact, 6) + " / compat " +
           bt::fmt_fixed(lower_compat, 6));
    c.note("0.07deg: exact " + bt::fmt_fixed(upper_exact, 6) + " / compat " +
           bt::fmt_fixed(upper_compat, 6));
    // Bit-for-bit reproduction of the published conversion chain.
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 1000; ++i) {
        const double angle = -3.0 + bt::uniform01(rng) * 6.0;
        if (bt::angle_to_arc_paper_compat(angle) != angle * 1.046 * 304.8 / 1000.0) {
            c.expect(false, "compat chain is not bit-for-bit at angle " + bt::fmt_fixed(angle, 9));
            break;
        }
    }
    return c;
}

Checker criterion_end_to_end(const std::filesystem::path& dir) {
    Checker c;
    const double step_angle = std::asin(0.5 / 3.0) * 180.0 / std::numbers::pi;
    write_lab_scenario(dir / "step.cfg", 64, 20.0, step_angle, 42);
    c.expect(run_cli("simulate --config " + (dir / "step.cfg").string() + " --out-dir " +
                         (dir / "sim").string(),
                     dir / "log1.txt") == 0,
             "simulate failed");
    c.expect(run_cli("detect --dict " + (dir / "sim/dictionary.txt").string() + " --images " +
                         (dir / "sim/frames").string() + " --out " + (dir / "dets.jsonl").string(),
                     dir / "log2.txt") == 0,
             "detect failed");
    c.expect(run_cli("quantify --dets " + (dir / "dets.jsonl").string() +
                         " --pitch 0.004 --depth 5 --frame-width 640 --frame-height 480 --out " +
                         (dir / "disp.csv").string(),
                     dir / "log3.txt") == 0,
             "quantify failed");
    c.expect(run_cli("incline --readings " + (dir / "sim/sensor.csv").string() +
                         " --radius 3.0 --out " + (dir / "disp_sensor.csv").string(),
                     dir / "log4.txt") == 0,
             "incline failed");
    const int validate_rc =
        run_cli("validate --vision " + (dir / "disp.csv").string() + " --sensor " +
                    (dir / "disp_sensor.csv").string() +
                    " --tolerance 0.026 --expected-frames 100 --out " +
                    (dir / "report.csv").string(),
                dir / "log5.txt");
    c.expect(validate_rc == 0, "validate exited " + std::to_string(validate_rc));

    const auto truth = bt::read_truth_csv(dir / "sim/truth.csv");
    const auto vision = bt::read_displacement_csv(dir / "disp.csv");
    c.expect(truth.size() == 100, "expected a 100-frame scenario");
    c.expect(vision.size() == truth.size(), "vision stream has gaps");
    std::map<double, double> truth_dy;
    for (const auto& s : truth) truth_dy[s.t] = s.dy;
    double max_err = 0.0;
    for (const auto& s : vision) {
        const auto it = truth_dy.find(s.t);
        if (it == truth_dy.end()) {
            c.expect(false, "vision sample at unknown t");
            continue;
        }
        max_err = std::max(max_err, std::abs(s.dy - it->second));
    }
    c.expect(max_err < 2 * 0.004, "vision-vs-truth above 2 x pitch");
    c.note("max |vision-truth| = " + bt::fmt_fixed(max_err, 6) + " m (bound 0.008)");
    if (!truth.empty()) {
        c.expect(truth.back().dy == 0.5, "truth should end exactly on the 0.5 m step");
    }
    const std::string report = slurp(dir / "report.csv");
    c.expect(report.find("pass=true") != std::string::npos, "report did not pass");
    for (const std::string& line : {std::string("max_error_m="), std::string("rmse_m=")}) {
        const auto pos = report.find(line);
        if (pos != std::string::npos) {
            const auto end = report.find('\n', pos);
            c.note(report.substr(pos, end - pos));
        }
    }
    return c;
}

Checker criterion_fiducial_roundtrip() {
    Checker c;
    const bt::MarkerDictionary d = bt::generate_dictionary(6, 50, 9, 0);

    int clean_hits = 0;
    for (int id = 0; id < 50; ++id) {
        const int side = 32;
        const int quiet = side / 8;
        const bt::Frame marker = bt::render_marker(d, id, side, quiet);
        bt::Frame canvas = bt::make_frame(side + 6 * quiet, side + 6 * quiet, 1, 255);
        for (int y = 0; y < marker.height; ++y)
            for (int x = 0; x < marker.width; ++x)
                canvas.at(2 * quiet + x, 2 * quiet + y) = marker.at(x, y);
        const auto obs = bt::detect_markers(canvas, d);
        if (obs.size() == 1 && obs[0].id == id) {
            ++clean_hits;
        } else if (!obs.empty() && obs[0].id != id) {
            c.expect(false, "misdecode of id " + std::to_string(id));
        }
    }
    c.expect(clean_hits == 50, "clean 32 px roundtrip missed ids");
    c.note("clean 32 px: " + std::to_string(clean_hits) + "/50");

    bt::CameraModel cam;
    cam.pixel_pitch = 0.01;
    cam.frame_width = 160;
    cam.frame_height = 160;
    cam.principal_x = 80.0;
    cam.principal_y = 80.0;
    bt::BackgroundSpec bg;
    bg.seed = 4;
    int corrupted_hits = 0;
    int corrupted_total = 0;
    for (const double sign : {-1.0, 1.0}) {
        bt::CorruptionSpec worst;
        worst.blur_sigma = 2.5;
        worst.exposure = 0.25 * sign;
        worst.rotation = 20.0 * sign;
        for (int id = 0; id < 50; ++id) {
            const bt::Frame marker = bt::render_marker(d, id, 48, 6);
            const bt::Frame scene = bt::render_scene(cam, marker, {0.0, 0.0}, bg, worst, 1);
            const auto obs = bt::detect_markers(scene, d);
            ++corrupted_total;
            bool hit = false;
            for (const auto& o : obs) {
                if (o.id != id) {
                    c.expect(false, "misdecode under corruption (id " + std::to_string(id) + ")");
                }
                hit |= o.id == id;
            }
            corrupted_hits += hit ? 1 : 0;
        }
    }
    c.expect(corrupted_hits * 100 >= corrupted_total * 95,
             "corrupted decode rate below 95%");
    c.note("max augmentation 48 px: " + std::to_string(corrupted_hits) + "/" +
           std::to_string(corrupted_total));
    return c;
}

Checker criterion_metric_oracles() {
    Checker c;
    // Canonical box family: a 3x3 grid of 4x4 boxes; ground truths sit on a
    // 1 px diagonal shift of the same lattice. Confidence follows the index.
    std::vector<bt::Box> det_lattice, gt_lattice;
    for (int gy = 0; gy < 3; ++gy) {
        for (int gx = 0; gx < 3; ++gx) {
            det_lattice.push_back({gx * 3.0, gy * 3.0, 4.0, 4.0});
            gt_lattice.push_back({gx * 3.0 + 1.0, gy * 3.0 + 1.0, 4.0, 4.0});
        }
    }
    const double confs[9] = {0.95, 0.85, 0.75, 0.65, 0.55, 0.45, 0.35, 0.25, 0.15};

    long long instances = 0;
    std::mt19937_64 rng(777);
    for (int trial = 0; trial < 40000; ++trial) {
        const int nd = static_cast<int>(rng() % 5);
        const int ng = static_cast<int>(rng() % 5);
        std::vector<bt::Detection> dets;
        for (int i = 0; i < nd; ++i) {
            const int pick = static_cast<int>(rng() % 9);
            bt::Detection d;
            d.box = det_lattice[static_cast<std::size_t>(pick)];
            d.confidence = d.objectness = confs[static_cast<std::size_t>((pick + i) % 9)];
            d.class_prob = 1.0;
            dets.push_back(d);
        }
        std::vector<bt::Box> gts;
        for (int i = 0; i < ng; ++i) {
            gts.push_back(gt_lattice[rng() % 9]);
        }
        const double thr = (trial % 2 == 0) ? 0.5 : 0.9;

        std::stable_sort(dets.begin(), dets.end(), bt::confidence_order);
        const bt::MatchLabels got = bt::match_detections(dets, gts, thr);
        const oracle::MatchOutcome expected = oracle::match(dets, gts, thr);
        bool same = got.fn == expected.fn && got.tp.size() == expected.tp.size();
        for (std::size_t i = 0; same && i < got.tp.size(); ++i) {
            same = static_cast<int>(got.tp[i]) == expected.tp[i];
        }
        if (!same) {
            c.expect(false, "match mismatch at instance " + std::to_string(trial));
            break;
        }

        const auto kept = bt::nms(dets, thr);
        const auto kept_expected = oracle::nms(dets, thr);
        same = kept.size() == kept_expected.size();
        for (std::size_t i = 0; same && i < kept.size(); ++i) {
            same = kept[i].box.cx == kept_expected[i].box.cx &&
                   kept[i].box.cy == kept_expected[i].box.cy &&
                   kept[i].confidence == kept_expected[i].confidence;
        }
        if (!same) {
            c.expect(false, "nms mismatch at instance " + std::to_string(trial));
            break;
        }

        if (!gts.empty() && !dets.empty()) {
            const double ap = bt::average_precision(
                bt::precision_recall_curve(got.tp, static_cast<int>(gts.size())));
            std::vector<int> tp_int(got.tp.begin(), got.tp.end());
            const double ap_expected =
                oracle::ap_from_labels(tp_int, static_cast<int>(gts.size()));
            if (ap != ap_expected) {
                c.expect(false, "AP mismatch at instance " + std::to_string(trial));
                break;
            }
        }
        ++instances;
    }
    c.note(std::to_string(instances) + " enumerated instances agreed exactly");

    int corpora_checked = 0;
    for (int corpus = 0; corpus < 100; ++corpus) {
        std::mt19937_64 crng(9000 + static_cast<std::uint64_t>(corpus));
        std::map<double, std::vector<bt::Detection>> dets_by_image;
        bt::GroundTruthSet gt;
        const int images = 1 + static_cast<int>(crng() % 4);
        int total_gt = 0;
        for (int img = 0; img < images; ++img) {
            const int nd = static_cast<int>(crng() % 5);
            for (int i = 0; i < nd; ++i) {
                bt::Detection d;
                d.box = {static_cast<double>(crng() % 30), static_cast<double>(crng() % 30),
                         2.0 + static_cast<double>(crng() % 8),
                         2.0 + static_cast<double>(crng() % 8)};
                d.confidence = d.objectness = static_cast<double>(crng() % 101) / 100.0;
                d.class_prob = 1.0;
                dets_by_image[img].push_back(d);
            }
            const int ng = static_cast<int>(crng() % 5);
            for (int i = 0; i < ng; ++i) {
                gt[img].push_back({static_cast<double>(crng() % 30),
                                   static_cast<double>(crng() % 30),
                                   2.0 + static_cast<double>(crng() % 8),
                                   2.0 + static_cast<double>(crng() % 8)});
                ++total_gt;
            }
        }
        if (total_gt == 0) continue;
        const auto aps = bt::map_at(dets_by_image, gt, bt::EvalConfig{{0.50, 0.90}});
        if (aps.at(0.90) > aps.at(0.50) + 1e-12) {
            c.expect(false, "mAP@90 exceeded mAP@50 on corpus " + std::to_string(corpus));
        }
        ++corpora_checked;
    }
    c.note(std::to_string(corpora_checked) + " corpora kept mAP@90 <= mAP@50");
    return c;
}

Checker criterion_range_failure(const std::filesystem::path& dir) {
    Checker c;
    write_lab_scenario(dir / "tiny.cfg", 8, 2.0, 1.0, 7);
    c.expect(run_cli("simulate --config " + (dir / "tiny.cfg").string() + " --out-dir " +
                         (dir / "sim").string(),
                     dir / "log1.txt") == 0,
             "simulate failed");
    c.expect(run_cli("detect --dict " + (dir / "sim/dictionary.txt").string() + " --images " +
                         (dir / "sim/frames").string() + " --out " + (dir / "dets.jsonl").string(),
                     dir / "log2.txt") == 0,
             "detect failed");
    c.expect(slurp(dir / "dets.jsonl").empty(), "the 8 px marker was somehow detected");
    c.expect(run_cli("quantify --dets " + (dir / "dets.jsonl").string() +
                         " --pitch 0.004 --out " + (dir / "disp.csv").string(),
                     dir / "log3.txt") == 0,
             "quantify failed on the empty stream");
    c.expect(run_cli("incline --readings " + (dir / "sim/sensor.csv").string() +
                         " --radius 3.0 --out " + (dir / "disp_sensor.csv").string(),
                     dir / "log4.txt") == 0,
             "incline failed");
    const int rc = run_cli("validate --vision " + (dir / "disp.csv").string() + " --sensor " +
                               (dir / "disp_sensor.csv").string() +
                               " --expected-frames 10 --out " + (dir / "report.csv").string(),
                           dir / "log5.txt");
    c.expect(rc == 1, "validate should fail-close on an all-gap stream");
    const std::string report = slurp(dir / "report.csv");
    c.expect(report.find("gap_count=10") != std::string::npos, "gaps not reported");
    c.expect(report.find("pairs=0") != std::string::npos, "pairs fabricated");
    c.note("0 detections, gap_count=10, pairs=0");
    return c;
}

Checker criterion_determinism(const std::filesystem::path& first_run) {
    Checker c;
    const auto dir = test_scratch_dir("acc7");
    const double step_angle = std::asin(0.5 / 3.0) * 180.0 / std::numbers::pi;
    write_lab_scenario(dir / "step.cfg", 64, 20.0, step_angle, 42);
    c.expect(run_cli("simulate --config " + (dir / "step.cfg").string() + " --out-dir " +
                         (dir / "sim").string(),
                     dir / "log1.txt") == 0,
             "simulate failed");
    c.expect(run_cli("detect --dict " + (dir / "sim/dictionary.txt").string() + " --images " +
                         (dir / "sim/frames").string() + " --out " + (dir / "dets.jsonl").string(),
                     dir / "log2.txt") == 0,
             "detect failed");
    c.expect(run_cli("quantify --dets " + (dir / "dets.jsonl").string() +
                         " --pitch 0.004 --depth 5 --frame-width 640 --frame-height 480 --out " +
                         (dir / "disp.csv").string(),
                     dir / "log3.txt") == 0,
             "quantify failed");
    c.expect(run_cli("incline --readings " + (dir / "sim/sensor.csv").string() +
                         " --radius 3.0 --out " + (dir / "disp_sensor.csv").string(),
                     dir / "log4.txt") == 0,
             "incline failed");
    run_cli("validate --vision " + (dir / "disp.csv").string() + " --sensor " +
                (dir / "disp_sensor.csv").string() +
                " --tolerance 0.026 --expected-frames 100 --out " + (dir / "report.csv").string(),
            dir / "log5.txt");

    int identical = 0;
    const std::vector<std::pair<std::string, std::string>> pairs = {
        {"sim/truth.csv", "sim/truth.csv"},
        {"sim/sensor.csv", "sim/sensor.csv"},
        {"sim/detections_truth.jsonl", "sim/detections_truth.jsonl"},
        {"sim/dictionary.txt", "sim/dictionary.txt"},
        {"sim/frames/frame_000050.pgm", "sim/frames/frame_000050.pgm"},
        {"dets.jsonl", "dets.jsonl"},
        {"disp.csv", "disp.csv"},
        {"disp_sensor.csv", "disp_sensor.csv"},
        {"report.csv", "report.csv"},
    };
    for (const auto& [a, b] : pairs) {
        if (slurp(first_run / a) == slurp(dir / b)) {
            ++identical;
        } else {
            c.expect(false, a + " differs between runs");
        }
    }
    c.note(std::to_string(identical) + "/" + std::to_string(pairs.size()) +
           " artifacts byte-identical");
    return c;
}

Checker criterion_invariants() {
    Checker c;
    std::mt19937_64 rng(31337);
    int cases = 0;

    // frames: save/load identity, grayscale idempotence, factor-1 identity
    for (int i = 0; i < 1000; ++i) {
        const int w = 1 + static_cast<int>(rng() % 12);
        const int h = 1 + static_cast<int>(rng() % 12);
        bt::Frame f = bt::make_frame(w, h, (rng() & 1) ? 3 : 1);
        for (auto& px : f.pixels) px = static_cast<std::uint8_t>(rng() & 0xff);
        const bt::Frame g1 = bt::to_grayscale(f);
        if (bt::to_grayscale(g1).pixels != g1.pixels) c.expect(false, "grayscale idempotence");
        if (bt::downscale(f, {1}).pixels != f.pixels) c.expect(false, "factor-1 identity");
        ++cases;
    }
    {
        const auto dir = test_scratch_dir("acc8_frames");
        for (int i = 0; i < 1000; ++i) {
            bt::Frame f = bt::make_frame(1 + static_cast<int>(rng() % 12),
                                         1 + static_cast<int>(rng() % 12), (rng() & 1) ? 3 : 1);
            for (auto& px : f.pixels) px = static_cast<std::uint8_t>(rng() & 0xff);
            f.timestamp = bt::quantize(bt::uniform01(rng) * 100.0, 6);
            const auto p = dir / ("f" + std::to_string(i) + (f.channels == 1 ? ".pgm" : ".ppm"));
            bt::save_image(f, p);
            const bt::Frame back = bt::load_image(p);
            if (back.pixels != f.pixels || back.timestamp != f.timestamp) {
                c.expect(false, "load/save identity");
            }
            ++cases;
        }
    }

    // iou and nms invariants
    auto random_box = [&]() {
        return bt::Box{static_cast<double>(rng() % 30), static_cast<double>(rng() % 30),
                       1.0 + static_cast<double>(rng() % 8), 1.0 + static_cast<double>(rng() % 8)};
    };
    for (int i = 0; i < 1000; ++i) {
        const bt::Box a = random_box();
        const bt::Box b = random_box();
        const double v = bt::iou(a, b);
        if (v != bt::iou(b, a) || v < 0.0 || v > 1.0) c.expect(false, "iou symmetry/range");
        if (bt::iou(a, a) != 1.0) c.expect(false, "iou self-identity");
        ++cases;
    }
    for (int i = 0; i < 1000; ++i) {
        std::vector<bt::Detection> dets;
        const int n = static_cast<int>(rng() % 7);
        for (int k = 0; k < n; ++k) {
            bt::Detection d;
            d.box = random_box();
            d.confidence = d.objectness = static_cast<double>(rng() % 101) / 100.0;
            d.t = 0.1 * static_cast<double>(rng() % 3);
            dets.push_back(d);
        }
        const double thr = 0.2 + static_cast<double>(rng() % 60) / 100.0;
        const auto kept = bt::nms(dets, thr);
        if (kept.size() > dets.size()) c.expect(false, "nms subset");
        for (std::size_t x = 0; x < kept.size(); ++x)
            for (std::size_t y = x + 1; y < kept.size(); ++y)
                if (bt::iou(kept[x].box, kept[y].box) >= thr) c.expect(false, "nms overlap");
        bt::DetectionStream s;
        s.records = dets;
        std::stable_sort(s.records.begin(), s.records.end(),
                         [](const bt::Detection& a, const bt::Detection& b) { return a.t < b.t; });
        const auto best = bt::best_per_frame(s, 0.5);
        for (std::size_t x = 1; x < best.records.size(); ++x)
            if (best.records[x].t <= best.records[x - 1].t) c.expect(false, "best_per_frame dup");
        ++cases;
    }

    // matching and AP invariants
    for (int i = 0; i < 1000; ++i) {
        std::vector<bt::Detection> dets;
        std::vector<bt::Box> gts;
        const int nd = static_cast<int>(rng() % 5);
        const int ng = 1 + static_cast<int>(rng() % 5);
        for (int k = 0; k < nd; ++k) {
            bt::Detection d;
            d.box = random_box();
            d.confidence = d.objectness = static_cast<double>(rng() % 101) / 100.0;
            dets.push_back(d);
        }
        for (int k = 0; k < ng; ++k) gts.push_back(random_box());
        std::stable_sort(dets.begin(), dets.end(), bt::confidence_order);
        const auto labels = bt::match_detections(dets, gts, 0.5);
        int tp = 0;
        for (const auto v : labels.tp) tp += v;
        if (tp + labels.fn != ng) c.expect(false, "TP+FN=GT");
        const double ap = bt::average_precision(bt::precision_recall_curve(labels.tp, ng));
        if (ap < 0.0 || ap > 1.0) c.expect(false, "AP range");
        ++cases;
    }

    // displacement invariants
    for (int i = 0; i < 1000; ++i) {
        const double pitch = 0.001 + static_cast<double>(rng() % 100) / 10000.0;
        const auto calib = bt::make_calibration(pitch, 5.0, 640, 480);
        bt::DetectionStream s;
        bt::Detection a;
        a.t = 0.0;
        a.box = {320, 240, 8, 8};
        bt::Detection b = a;
        b.t = 0.1;
        b.box.cx += static_cast<double>(rng() % 200) - 100.0;
        b.box.cy += static_cast<double>(rng() % 200) - 100.0;
        bt::Detection back = a;
        back.t = 0.2;
        s.records = {a, b, back};
        const auto samples = bt::displacement(s, bt::anchor_reference(s), calib);
        if (samples[0].dx != 0.0 || samples[0].dy != 0.0) c.expect(false, "anchor zero");
        if (samples[2].dx != 0.0 || samples[2].dy != 0.0) c.expect(false, "round trip zero");
        const auto doubled = bt::displacement(
            s, bt::anchor_reference(s), bt::make_calibration(2 * pitch, 5.0, 640, 480));
        if (std::abs(doubled[1].dy - 2 * samples[1].dy) > 1e-12) {
            c.expect(false, "scale equivariance");
        }
        ++cases;
    }

    // arc conversion invariants
    for (int i = 0; i < 1000; ++i) {
        const double a = -3.0 + bt::uniform01(rng) * 6.0;
        const double r = 0.5 + bt::uniform01(rng) * 30.0;
        if (std::abs(bt::angle_to_arc(-a, r) + bt::angle_to_arc(a, r)) > 1e-12) {
            c.expect(false, "arc oddness");
        }
        if (a != 0.0) {
            const double rel = std::abs(bt::angle_to_arc_paper_compat(a) -
                                        bt::angle_to_arc(a, 18.2)) /
                               std::abs(bt::angle_to_arc(a, 18.2));
            if (rel >= 0.004) c.expect(false, "compat within 0.4%");
        }
        ++cases;
    }

    // alignment and report invariants
    for (int i = 0; i < 1000; ++i) {
        std::vector<bt::DisplacementSample> vision, sensor;
        double t = 0.0;
        const int nv = 1 + static_cast<int>(rng() % 10);
        for (int k = 0; k < nv; ++k) {
            t += 0.05 + bt::uniform01(rng) * 0.2;
            vision.push_back({t, 0.0, bt::uniform01(rng), bt::DisplacementSource::vision});
        }
        t = 0.0;
        const int ns = 1 + static_cast<int>(rng() % 10);
        for (int k = 0; k < ns; ++k) {
            t += 0.05 + bt::uniform01(rng) * 0.2;
            sensor.push_back({t, 0.0, bt::uniform01(rng), bt::DisplacementSource::inclinometer});
        }
        const auto aligned = bt::align(vision, sensor, 0.2);
        if (aligned.pairs.size() + static_cast<std::size_t>(aligned.dropped) != vision.size()) {
            c.expect(false, "align count conservation");
        }
        for (const auto& p : aligned.pairs) {
            if (p.lag < 0.0) c.expect(false, "nonnegative lag");
        }
        if (!aligned.pairs.empty()) {
            const auto report = bt::compare(aligned, 0.026);
            if (!(report.mean_error <= report.rmse + 1e-12 &&
                  report.rmse <= report.max_error + 1e-12)) {
                c.expect(false, "mean <= rmse <= max");
            }
        }
        ++cases;
    }

    // boom kinematics invariants
    const bt::BoomModel lab{3.0, 1.7, 1.2, 3.0};
    for (int i = 0; i < 1000; ++i) {
        const double a = -20.0 + bt::uniform01(rng) * 40.0;
        const auto up = bt::tip_position(lab, {0.0, a, 0.0});
        const auto down = bt::tip_position(lab, {0.0, -a, 0.0});
        if (std::abs(up.y + down.y) > 1e-12) c.expect(false, "tip oddness");
        ++cases;
    }

    // fiducial rotation invariance, decoding determinism
    {
        const bt::MarkerDictionary d = bt::generate_dictionary(6, 50, 9, 0);
        for (const int id : {2, 21, 42}) {
            bt::Frame canvas = bt::make_frame(128, 128, 1, 255);
            const bt::Frame marker = bt::render_marker(d, id, 64, 8);
            for (int y = 0; y < marker.height; ++y)
                for (int x = 0; x < marker.width; ++x) canvas.at(24 + x, 24 + y) = marker.at(x, y);
            for (int rot = 0; rot < 4; ++rot) {
                const auto obs = bt::detect_markers(canvas, d);
                if (obs.size() != 1 || obs[0].id != id) c.expect(false, "rotation invariance");
                bt::Frame next = bt::make_frame(canvas.height, canvas.width, 1);
                for (int y = 0; y < canvas.height; ++y)
                    for (int x = 0; x < canvas.width; ++x)
                        next.at(canvas.height - 1 - y, x) = canvas.at(x, y);
                canvas = next;
                ++cases;
            }
        }
    }

    c.note(std::to_string(cases) + " generated cases across the module properties");
    return c;
}

} // namespace

int main() {
    struct Entry {
        int id;
        const char* name;
        double budget_s;
        std::function<Checker()> run;
    };

    const auto e2e_dir = test_scratch_dir("acc3");
    const std::vector<Entry> entries = {
        {1, "pixel-pitch constant (195.9 px -> 0.626 m)", 1.0, criterion_pixel_pitch},
        {2, "arc conversion (0.0095 m / 0.0223 m, compat bit-for-bit)", 1.0,
         criterion_arc_conversion},
        {3, "end-to-end 0.5 m step oracle", 60.0, [&] { return criterion_end_to_end(e2e_dir); }},
        {4, "fiducial roundtrip, clean and corrupted", 120.0, criterion_fiducial_roundtrip},
        {5, "metric oracle equivalence", 30.0, criterion_metric_oracles},
        {6, "range failure mode (8 px marker -> gaps)", 60.0,
         [] { return criterion_range_failure(test_scratch_dir("acc6")); }},
        {7, "pipeline determinism", 120.0, [&] { return criterion_determinism(e2e_dir); }},
        {8, "module invariant suite", 60.0, criterion_invariants},
    };

    int failures = 0;
    for (const auto& entry : entries) {
        const auto start = std::chrono::steady_clock::now();
        Checker c;
        try {
            c = entry.run();
        } catch (const std::exception& e) {
            c.ok = false;
            c.detail = std::string("exception: ") + e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (seconds >= entry.budget_s) {
            c.ok = false;
            c.detail += (c.detail.empty() ? "" : "; ") + std::string("over the ") +
                        bt::fmt_fixed(entry.budget_s, 0) + " s budget";
        }
        failures += c.ok ? 0 : 1;
        std::cout << (c.ok ? "PASS" : "FAIL") << "  " << entry.id << "  " << entry.name << "  ["
                  << bt::fmt_fixed(seconds, 2) << " s]";
        if (!c.detail.empty()) {
            std::cout << "  -- " << c.detail;
        }
        std::cout << "\n";
    }
    std::cout << (failures == 0 ? "ACCEPTANCE: all criteria passed"
                                : "ACCEPTANCE: " + std::to_string(failures) + " criteria failed")
              << "\n";
    return failures == 0 ? 0 : 1;
}
