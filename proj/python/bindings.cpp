#include "boomtrack/detections.hpp"
#include "boomtrack/displacement.hpp"
#include "boomtrack/errors.hpp"
#include "boomtrack/fiducial.hpp"
#include "boomtrack/frame.hpp"
#include "boomtrack/incline.hpp"
#include "boomtrack/metrics.hpp"
#include "boomtrack/sim.hpp"
#include "boomtrack/validate.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
namespace bt = boomtrack;

namespace {

bt::Frame frame_from_array(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() == 2) {
        bt::Frame f = bt::make_frame(static_cast<int>(arr.shape(1)),
                                     static_cast<int>(arr.shape(0)), 1);
        std::memcpy(f.pixels.data(), arr.data(), f.pixels.size());
        return f;
    }
    if (arr.ndim() == 3 && arr.shape(2) == 3) {
        bt::Frame f = bt::make_frame(static_cast<int>(arr.shape(1)),
                                     static_cast<int>(arr.shape(0)), 3);
        std::memcpy(f.pixels.data(), arr.data(), f.pixels.size());
        return f;
    }
    throw bt::ValueError("expected a (H, W) or (H, W, 3) uint8 array");
}

py::array_t<std::uint8_t> array_from_frame(const bt::Frame& f) {
    if (f.channels == 1) {
        py::array_t<std::uint8_t> arr({f.height, f.width});
        std::memcpy(arr.mutable_data(), f.pixels.data(), f.pixels.size());
        return arr;
    }
    py::array_t<std::uint8_t> arr({f.height, f.width, 3});
    std::memcpy(arr.mutable_data(), f.pixels.data(), f.pixels.size());
    return arr;
}

bt::Box box_from_tuple(const py::tuple& t) {
    if (t.size() != 4) {
        throw bt::ValueError("box tuples are (cx, cy, w, h)");
    }
    return {t[0].cast<double>(), t[1].cast<double>(), t[2].cast<double>(), t[3].cast<double>()};
}

} // namespace

PYBIND11_MODULE(_boomtrack, m) {
    m.doc() = "boom tip displacement quantification core";

    py::register_exception<bt::Error>(m, "BoomtrackError", PyExc_ValueError);

    py::class_<bt::Detection>(m, "Detection")
        .def(py::init([](double t, double cx, double cy, double w, double h, double objectness,
                         double class_prob) {
                 bt::Detection d;
                 d.t = t;
                 d.box = {cx, cy, w, h};
                 d.objectness = objectness;
                 d.class_prob = class_prob;
                 d.confidence = bt::compose_confidence(objectness, class_prob);
                 return d;
             }),
             py::arg("t"), py::arg("cx"), py::arg("cy"), py::arg("w"), py::arg("h"),
             py::arg("objectness") = 1.0, py::arg("class_prob") = 1.0)
        .def_property_readonly("t", [](const bt::Detection& d) { return d.t; })
        .def_property_readonly("cx", [](const bt::Detection& d) { return d.box.cx; })
        .def_property_readonly("cy", [](const bt::Detection& d) { return d.box.cy; })
        .def_property_readonly("w", [](const bt::Detection& d) { return d.box.w; })
        .def_property_readonly("h", [](const bt::Detection& d) { return d.box.h; })
        .def_readonly("objectness", &bt::Detection::objectness)
        .def_readonly("class_prob", &bt::Detection::class_prob)
        .def_readonly("confidence", &bt::Detection::confidence)
        .def("__repr__", [](const bt::Detection& d) {
            return "Detection(t=" + std::to_string(d.t) + ", cx=" + std::to_string(d.box.cx) +
                   ", cy=" + std::to_string(d.box.cy) + ", conf=" + std::to_string(d.confidence) +
                   ")";
        });

    py::class_<bt::MarkerObservation>(m, "MarkerObservation")
        .def_readonly("id", &bt::MarkerObservation::id)
        .def_readonly("hamming_corrections", &bt::MarkerObservation::hamming_corrections)
        .def_property_readonly("center",
                               [](const bt::MarkerObservation& o) {
                                   return py::make_tuple(o.center.x, o.center.y);
                               })
        .def_property_readonly("corners", [](const bt::MarkerObservation& o) {
            py::list out;
            for (const auto& c : o.corners) {
                out.append(py::make_tuple(c.x, c.y));
            }
            return out;
        });

    py::class_<bt::MarkerDictionary>(m, "MarkerDictionary")
        .def_property_readonly("grid", [](const bt::MarkerDictionary& d) { return d.grid; })
        .def_property_readonly("min_hamming",
                               [](const bt::MarkerDictionary& d) { return d.min_hamming; })
        .def("__len__", &bt::MarkerDictionary::count)
        .def("save", [](const bt::MarkerDictionary& d, const std::string& path) {
            bt::save_dictionary(d, path);
        });

    m.def("generate_dictionary", &bt::generate_dictionary, py::arg("grid"), py::arg("count"),
          py::arg("min_hamming"), py::arg("seed") = 0);
    m.def("load_dictionary",
          [](const std::string& path) { return bt::load_dictionary(path); });
    m.def(
        "render_marker",
        [](const bt::MarkerDictionary& d, int id, int side, int quiet_zone) {
            return array_from_frame(bt::render_marker(d, id, side, quiet_zone));
        },
        py::arg("dictionary"), py::arg("id"), py::arg("side"), py::arg("quiet_zone"));
    m.def(
        "detect_markers",
        [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& image,
           const bt::MarkerDictionary& d) {
            return bt::detect_markers(frame_from_array(image), d);
        },
        py::arg("image"), py::arg("dictionary"));

    m.def("compose_confidence", &bt::compose_confidence, py::arg("objectness"),
          py::arg("class_prob"));
    m.def(
        "iou",
        [](const py::tuple& a, const py::tuple& b) {
            return bt::iou(box_from_tuple(a), box_from_tuple(b));
        },
        py::arg("a"), py::arg("b"), "IoU of two (cx, cy, w, h) boxes");
    m.def(
        "nms",
        [](const std::vector<bt::Detection>& dets, double iou_threshold) {
            return bt::nms(dets, iou_threshold);
        },
        py::arg("detections"), py::arg("iou_threshold"));

    m.def("derive_pixel_pitch", &bt::derive_pixel_pitch, py::arg("frame_width_m"),
          py::arg("frame_width_px"));
    m.def(
        "displacement",
        [](const std::vector<bt::Detection>& dets, double pixel_pitch, double depth) {
            bt::DetectionStream s;
            s.records = dets;
            std::stable_sort(s.records.begin(), s.records.end(),
                             [](const bt::Detection& a, const bt::Detection& b) {
                                 return a.t < b.t;
                             });
            const auto calib = bt::make_calibration(pixel_pitch, depth, 1920, 1200);
            const auto samples = bt::displacement(s, bt::anchor_reference(s), calib);
            py::list out;
            for (const auto& sample : samples) {
                out.append(py::make_tuple(sample.t, sample.dx, sample.dy));
            }
            return out;
        },
        py::arg("detections"), py::arg("pixel_pitch"), py::arg("depth") = 18.2,
        "Anchor at the first detection and convert to (t, dx_m, dy_m) samples");

    m.def("angle_to_arc", &bt::angle_to_arc, py::arg("angle_deg"), py::arg("radius_m"));
    m.def("angle_to_arc_paper_compat", &bt::angle_to_arc_paper_compat, py::arg("angle_deg"));

    m.def(
        "map_at",
        [](const std::map<double, std::vector<bt::Detection>>& dets,
           const std::map<double, std::vector<py::tuple>>& gt, std::vector<double> thresholds) {
            bt::GroundTruthSet gts;
            for (const auto& [image, boxes] : gt) {
                for (const auto& b : boxes) {
                    gts[image].push_back(box_from_tuple(b));
                }
            }
            bt::EvalConfig cfg;
            cfg.iou_thresholds = std::move(thresholds);
            return bt::map_at(dets, gts, cfg);
        },
        py::arg("detections_by_image"), py::arg("ground_truth_by_image"),
        py::arg("iou_thresholds") = std::vector<double>{0.5, 0.9});

    m.def(
        "tip_position",
        [](double boom_length, double vertical_angle_deg, double horizontal_offset) {
            bt::BoomModel b;
            b.length = boom_length;
            b.vertical_range = boom_length;
            b.horizontal_range = std::abs(horizontal_offset) + 1.0;
            const bt::Vec2 tip =
                bt::tip_position(b, {0.0, vertical_angle_deg, horizontal_offset});
            return py::make_tuple(tip.x, tip.y);
        },
        py::arg("boom_length_m"), py::arg("vertical_angle_deg"),
        py::arg("horizontal_offset_m") = 0.0);

    m.attr("__version__") = "0.1.0";
}
