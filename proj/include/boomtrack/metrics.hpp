#pragma once

#include "boomtrack/detections.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace boomtrack {

// Ground truth boxes per image. Image ids are the frame timestamps, which is
// the one field shared by the detections contract and the GT contract.
using GroundTruthSet = std::map<double, std::vector<Box>>;

struct EvalConfig {
    std::vector<double> iou_thresholds{0.50, 0.90}; // ascending, in (0, 1]
};

// TP/FP flags parallel to the confidence-ranked detections, plus the count
// of ground truths left unmatched.
struct MatchLabels {
    std::vector<std::uint8_t> tp;
    int fn = 0;
};

// Greedy matching: in confidence order each detection takes the unmatched
// ground truth with the highest IoU, provided IoU >= iou_t. Each ground
// truth matches at most once.
MatchLabels match_detections(const std::vector<Detection>& dets_by_confidence,
                             const std::vector<Box>& gt, double iou_t);

struct PrPoint {
    double precision = 0.0;
    double recall = 0.0;
};

// Cumulative precision/recall as the cutoff sweeps the ranked labels.
// Zero ground truths leave recall undefined and raise ValueError.
std::vector<PrPoint> precision_recall_curve(const std::vector<std::uint8_t>& ranked_tp,
                                            int total_gt);

// Area under the precision envelope over recall in [0, 1], all-points
// interpolation (precision at recall r = max precision at recall >= r).
// An empty curve scores 0.
double average_precision(const std::vector<PrPoint>& curve);

// AP per IoU threshold over a multi-image corpus. Single class, so mAP@t is
// AP@t. Detections are ranked globally by confidence for the curve.
std::map<double, double> map_at(const std::map<double, std::vector<Detection>>& dets_by_image,
                                const GroundTruthSet& gt, const EvalConfig& cfg);

// Seeded shuffle then floor-sized test/valid splits with the remainder going
// to train. Returned index lists partition 0..n-1.
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::vector<std::size_t> valid;
};
SplitIndices split_dataset(std::size_t n, double train_ratio, double test_ratio,
                           double valid_ratio, std::uint64_t seed);

// GT JSONL loader: {"image": <t>, "cx":.., "cy":.., "w":.., "h":..} per line.
GroundTruthSet load_ground_truth(const std::filesystem::path& path);

} // namespace boomtrack
