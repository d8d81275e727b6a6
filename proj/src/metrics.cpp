#include "boomtrack/metrics.hpp"

#include "boomtrack/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

namespace boomtrack {

MatchLabels match_detections(const std::vector<Detection>& dets_by_confidence,
                             const std::vector<Box>& gt, double iou_t) {
    MatchLabels out;
    out.tp.assign(dets_by_confidence.size(), 0);
    std::vector<std::uint8_t> used(gt.size(), 0);
    for (std::size_t i = 0; i < dets_by_confidence.size(); ++i) {
        double best_iou = 0.0;
        std::size_t best_j = gt.size();
        for (std::size_t j = 0; j < gt.size(); ++j) {
            if (used[j]) continue;
            const double v = iou(dets_by_confidence[i].box, gt[j]);
            if (v > best_iou) {
                best_iou = v;
                best_j = j;
            }
        }
        if (best_j < gt.size() && best_iou >= iou_t) {
            out.tp[i] = 1;
            used[best_j] = 1;
        }
    }
    out.fn = static_cast<int>(std::count(used.begin(), used.end(), 0));
    return out;
}

std::vector<PrPoint> precision_recall_curve(const std::vector<std::uint8_t>& ranked_tp,
                                            int total_gt) {
    if (total_gt <= 0) {
        throw ValueError("recall undefined: zero ground truths");
    }
    std::vector<PrPoint> curve;
    curve.reserve(ranked_tp.size());
    int tp = 0;
    for (std::size_t i = 0; i < ranked_tp.size(); ++i) {
        tp += ranked_tp[i] ? 1 : 0;
        const double precision = static_cast<double>(tp) / static_cast<double>(i + 1);
        const double recall = static_cast<double>(tp) / static_cast<double>(total_gt);
        curve.push_back({precision, recall});
    }
    return curve;
}

double average_precision(const std::vector<PrPoint>& curve) {
    if (curve.empty()) {
        return 0.0;
    }
    // Envelope from the right: precision at recall r is the max precision at
    // any recall >= r. Sum rectangle areas over recall increments.
    std::vector<PrPoint> pts = curve;
    std::stable_sort(pts.begin(), pts.end(),
                     [](const PrPoint& a, const PrPoint& b) { return a.recall < b.recall; });
    std::vector<double> env(pts.size());
    double running = 0.0;
    for (std::size_t i = pts.size(); i-- > 0;) {
        running = std::max(running, pts[i].precision);
        env[i] = running;
    }
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].recall > prev_recall) {
            ap += (pts[i].recall - prev_recall) * env[i];
            prev_recall = pts[i].recall;
        }
    }
    return ap;
}

std::map<double, double> map_at(const std::map<double, std::vector<Detection>>& dets_by_image,
                                const GroundTruthSet& gt, const EvalConfig& cfg) {
    int total_gt = 0;
    for (const auto& [id, boxes] : gt) {
        total_gt += static_cast<int>(boxes.size());
    }
    std::map<double, double> result;
    for (const double threshold : cfg.iou_thresholds) {
        if (!(threshold > 0.0 && threshold <= 1.0)) {
            throw ValueError("IoU threshold outside (0, 1]");
        }
        // Per image: rank by confidence, match greedily; then merge labels
        // into one global confidence-ranked list.
        struct Labeled {
            double confidence;
            double cx, cy;
            std::uint8_t tp;
        };
        std::vector<Labeled> all;
        for (const auto& [image, dets] : dets_by_image) {
            std::vector<Detection> ranked = dets;
            std::stable_sort(ranked.begin(), ranked.end(), confidence_order);
            static const std::vector<Box> kNoBoxes;
            const auto git = gt.find(image);
            const std::vector<Box>& boxes = git == gt.end() ? kNoBoxes : git->second;
            const MatchLabels labels = match_detections(ranked, boxes, threshold);
            for (std::size_t i = 0; i < ranked.size(); ++i) {
                all.push_back({ranked[i].confidence, ranked[i].box.cx, ranked[i].box.cy,
                               labels.tp[i]});
            }
        }
        std::stable_sort(all.begin(), all.end(), [](const Labeled& a, const Labeled& b) {
            if (a.confidence != b.confidence) return a.confidence > b.confidence;
            if (a.cx != b.cx) return a.cx < b.cx;
            return a.cy < b.cy;
        });
        std::vector<std::uint8_t> ranked_tp(all.size());
        for (std::size_t i = 0; i < all.size(); ++i) {
            ranked_tp[i] = all[i].tp;
        }
        if (all.empty() || total_gt == 0) {
            result[threshold] = 0.0;
            continue;
        }
        result[threshold] = average_precision(precision_recall_curve(ranked_tp, total_gt));
    }
    return result;
}

SplitIndices split_dataset(std::size_t n, double train_ratio, double test_ratio,
                           double valid_ratio, std::uint64_t seed) {
    const double sum = train_ratio + test_ratio + valid_ratio;
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ValueError("split ratios must sum to 1");
    }
    if (train_ratio < 0.0 || test_ratio < 0.0 || valid_ratio < 0.0) {
        throw ValueError("split ratios must be non-negative");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Explicit Fisher-Yates: std::shuffle is not reproducible across standard
    // library implementations.
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    const std::size_t n_test = static_cast<std::size_t>(std::floor(test_ratio * static_cast<double>(n)));
    const std::size_t n_valid = static_cast<std::size_t>(std::floor(valid_ratio * static_cast<double>(n)));
    const std::size_t n_train = n - n_test - n_valid;
    SplitIndices out;
    out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                    order.begin() + static_cast<std::ptrdiff_t>(n_train + n_test));
    out.valid.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_test), order.end());
    return out;
}

GroundTruthSet load_ground_truth(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("no such ground truth file: " + path.string());
    }
    GroundTruthSet gt;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(std::string("bad JSON: ") + e.what(), lineno);
        }
        for (const char* key : {"image", "cx", "cy", "w", "h"}) {
            if (!obj.contains(key) || !obj[key].is_number()) {
                throw FormatError(std::string("missing or non-numeric '") + key + "'", lineno);
            }
        }
        const Box box{obj["cx"].get<double>(), obj["cy"].get<double>(),
                      obj["w"].get<double>(), obj["h"].get<double>()};
        if (box.w <= 0.0 || box.h <= 0.0) {
            throw FormatError("non-positive ground truth box", lineno);
        }
        gt[obj["image"].get<double>()].push_back(box);
    }
    return gt;
}

} // namespace boomtrack
