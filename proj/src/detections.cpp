#include "boomtrack/detections.hpp"

#include "boomtrack/errors.hpp"
#include "boomtrack/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace boomtrack {

double compose_confidence(double objectness, double class_prob) {
    if (!(objectness >= 0.0 && objectness <= 1.0)) {
        throw ValueError("objectness outside [0, 1]");
    }
    if (!(class_prob >= 0.0 && class_prob <= 1.0)) {
        throw ValueError("class probability outside [0, 1]");
    }
    return objectness * class_prob;
}

double iou(const Box& a, const Box& b) {
    if (a.w <= 0.0 || a.h <= 0.0 || b.w <= 0.0 || b.h <= 0.0) {
        throw ValueError("iou requires positive box dimensions");
    }
    const double ax0 = a.cx - a.w / 2, ax1 = a.cx + a.w / 2;
    const double ay0 = a.cy - a.h / 2, ay1 = a.cy + a.h / 2;
    const double bx0 = b.cx - b.w / 2, bx1 = b.cx + b.w / 2;
    const double by0 = b.cy - b.h / 2, by1 = b.cy + b.h / 2;
    const double iw = std::min(ax1, bx1) - std::max(ax0, bx0);
    const double ih = std::min(ay1, by1) - std::max(ay0, by0);
    if (iw <= 0.0 || ih <= 0.0) {
        return 0.0;
    }
    const double inter = iw * ih;
    const double uni = a.w * a.h + b.w * b.h - inter;
    return inter / uni;
}

bool confidence_order(const Detection& a, const Detection& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.box.cx != b.box.cx) return a.box.cx < b.box.cx;
    return a.box.cy < b.box.cy;
}

std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold) {
    std::stable_sort(dets.begin(), dets.end(), confidence_order);
    std::vector<Detection> kept;
    for (const Detection& d : dets) {
        bool suppressed = false;
        for (const Detection& k : kept) {
            if (iou(d.box, k.box) >= iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) {
            kept.push_back(d);
        }
    }
    return kept;
}

namespace {

double require_number(const nlohmann::json& obj, const char* key, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_number()) {
        throw FormatError(std::string("missing or non-numeric '") + key + "'", line);
    }
    return it->get<double>();
}

void clamp_to_frame(Detection& d, const FrameGeometry& g, std::size_t line) {
    double x0 = d.box.cx - d.box.w / 2, x1 = d.box.cx + d.box.w / 2;
    double y0 = d.box.cy - d.box.h / 2, y1 = d.box.cy + d.box.h / 2;
    x0 = std::max(0.0, x0);
    y0 = std::max(0.0, y0);
    x1 = std::min(static_cast<double>(g.width), x1);
    y1 = std::min(static_cast<double>(g.height), y1);
    if (x1 <= x0 || y1 <= y0) {
        throw FormatError("box lies entirely outside the frame", line);
    }
    d.box = {(x0 + x1) / 2, (y0 + y1) / 2, x1 - x0, y1 - y0};
}

} // namespace

DetectionStream load_detections(const std::filesystem::path& path,
                                std::optional<FrameGeometry> geometry) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("no such detections file: " + path.string());
    }
    DetectionStream s;
    s.frame_geometry = geometry;
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
        if (!obj.is_object()) {
            throw FormatError("detection record is not an object", lineno);
        }
        Detection d;
        d.t = require_number(obj, "t", lineno);
        d.box.cx = require_number(obj, "cx", lineno);
        d.box.cy = require_number(obj, "cy", lineno);
        d.box.w = require_number(obj, "w", lineno);
        d.box.h = require_number(obj, "h", lineno);
        if (obj.contains("class_id")) {
            d.class_id = obj["class_id"].get<int>();
        }
        const bool has_obj = obj.contains("objectness");
        const bool has_cls = obj.contains("class_prob");
        const bool has_conf = obj.contains("confidence");
        try {
            if (has_obj && has_cls) {
                d.objectness = require_number(obj, "objectness", lineno);
                d.class_prob = require_number(obj, "class_prob", lineno);
                d.confidence = compose_confidence(d.objectness, d.class_prob);
            } else if (has_conf) {
                d.confidence = require_number(obj, "confidence", lineno);
                if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
                    throw ValueError("confidence outside [0, 1]");
                }
                d.objectness = d.confidence;
                d.class_prob = 1.0;
            } else {
                throw ValueError("record carries neither objectness/class_prob nor confidence");
            }
        } catch (const ValueError& e) {
            throw FormatError(e.what(), lineno);
        }
        if (d.t < 0.0) {
            throw FormatError("negative timestamp", lineno);
        }
        if (d.box.w <= 0.0 || d.box.h <= 0.0) {
            throw FormatError("non-positive box dimensions", lineno);
        }
        if (geometry) {
            clamp_to_frame(d, *geometry, lineno);
        }
        s.records.push_back(d);
    }
    std::stable_sort(s.records.begin(), s.records.end(),
                     [](const Detection& a, const Detection& b) { return a.t < b.t; });
    return s;
}

std::string detection_jsonl_line(const Detection& d) {
    std::string out = "{\"t\":" + fmt_fixed(d.t, 6);
    out += ",\"cx\":" + fmt_fixed(d.box.cx, 6);
    out += ",\"cy\":" + fmt_fixed(d.box.cy, 6);
    out += ",\"w\":" + fmt_fixed(d.box.w, 6);
    out += ",\"h\":" + fmt_fixed(d.box.h, 6);
    out += ",\"objectness\":" + fmt_fixed(d.objectness, 6);
    out += ",\"class_prob\":" + fmt_fixed(d.class_prob, 6);
    out += ",\"class_id\":" + std::to_string(d.class_id) + "}";
    return out;
}

void save_detections(const DetectionStream& s, const std::filesystem::path& path) {
    atomic_write(path, [&](std::ostream& out) {
        for (const Detection& d : s.records) {
            out << detection_jsonl_line(d) << "\n";
        }
    });
}

DetectionStream best_per_frame(const DetectionStream& s, double min_confidence) {
    DetectionStream out;
    out.frame_geometry = s.frame_geometry;
    std::size_t i = 0;
    while (i < s.records.size()) {
        std::size_t j = i;
        const Detection* best = nullptr;
        while (j < s.records.size() && s.records[j].t == s.records[i].t) {
            const Detection& d = s.records[j];
            if (d.confidence >= min_confidence && (!best || confidence_order(d, *best))) {
                best = &d;
            }
            ++j;
        }
        if (best) {
            out.records.push_back(*best);
        }
        i = j;
    }
    return out;
}

} // namespace boomtrack
