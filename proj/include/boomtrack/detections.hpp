#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace boomtrack {

// Axis-aligned box in pixels, center format.
struct Box {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;
};

// One detection record: single class "Target" (class_id 0).
// confidence == objectness * class_prob always.
struct Detection {
    double t = 0.0;
    Box box;
    double objectness = 1.0;
    double class_prob = 1.0;
    double confidence = 1.0;
    int class_id = 0;
};

struct FrameGeometry {
    int width = 0;
    int height = 0;
};

struct DetectionStream {
    std::optional<FrameGeometry> frame_geometry;
    std::vector<Detection> records; // sorted by t, non-decreasing
};

// Product of objectness and class probability; zero objectness means zero
// confidence. Inputs outside [0, 1] raise ValueError.
double compose_confidence(double objectness, double class_prob);

// Intersection over union; 0 for disjoint boxes, 1 only for identical ones.
// Non-positive box dimensions raise ValueError.
double iou(const Box& a, const Box& b);

// Greedy non-maximum suppression over one frame's detections: highest
// confidence first, suppressing anything with IoU >= threshold against a
// kept box. Ties break on smaller cx, then smaller cy.
std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold);

// Sort key shared by nms/best_per_frame/ranking: confidence descending,
// ties broken by smaller cx then smaller cy.
bool confidence_order(const Detection& a, const Detection& b);

// Loads the detections JSONL contract, one object per line:
//   {"t":..,"cx":..,"cy":..,"w":..,"h":..,"objectness":..,"class_prob":..,"class_id":0}
// Confidence is recomputed from objectness x class_prob when both are
// present, otherwise a given "confidence" value is taken as-is. Records are
// sorted by t. Malformed lines report their line number. When `geometry` is
// given, boxes are clamped to the frame; a box entirely outside it is an
// error.
DetectionStream load_detections(const std::filesystem::path& path,
                                std::optional<FrameGeometry> geometry = std::nullopt);

// Serializes a stream in the same JSONL contract (fixed 6-decimal fields, so
// identical streams produce byte-identical files).
void save_detections(const DetectionStream& s, const std::filesystem::path& path);
std::string detection_jsonl_line(const Detection& d);

// For each distinct timestamp keeps the single highest-confidence detection
// at or above min_confidence; frames with none are omitted (a gap).
DetectionStream best_per_frame(const DetectionStream& s, double min_confidence);

} // namespace boomtrack
