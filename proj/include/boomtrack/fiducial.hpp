#pragma once

#include "boomtrack/frame.hpp"
#include "boomtrack/geometry.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace boomtrack {

// Square-fiducial dictionary: `codes[id]` is a row-major grid x grid bit
// matrix (1 renders white, 0 black). No two codes come within min_hamming of
// each other under any of the four 90-degree rotations.
struct MarkerDictionary {
    int grid = 6;
    int min_hamming = 1;
    std::vector<std::vector<std::uint8_t>> codes;

    int count() const { return static_cast<int>(codes.size()); }
    // Bits correctable during decode without risking a neighboring id.
    int correction_radius() const { return (min_hamming - 1) / 2; }
};

// Decoded marker: corners are sub-pixel image points ordered clockwise from
// the decoded top-left; center is their mean.
struct MarkerObservation {
    int id = -1;
    std::array<Vec2, 4> corners{};
    Vec2 center{};
    int hamming_corrections = 0;
};

// Candidate quadrilateral from the first detection phase, corners clockwise.
struct Quad {
    std::array<Vec2, 4> corners{};
    double perimeter = 0.0;
};

struct DetectorParams {
    int threshold_window = 15;     // adaptive mean window, odd pixels
    int threshold_offset = 7;      // gray levels below the local mean
    double min_perimeter = 40.0;   // px, rejects tiny/distant candidates
    double approx_eps_rel = 0.03;  // polygon tolerance as fraction of perimeter
    double min_corner_dist = 10.0; // px, min quad side and candidate spacing
    double max_aspect = 4.0;       // max side-length ratio
    double border_black_min = 0.85; // fraction of border cells that must be black
    int cell_samples = 6;          // sample grid per cell (central region)
};

enum class DecodeFailure {
    none,
    degenerate_homography,
    border,   // border ring not black enough
    no_match, // no code within the correction radius
};

struct DecodeResult {
    std::optional<MarkerObservation> observation;
    DecodeFailure failure = DecodeFailure::none;
};

// Bit-matrix helpers shared with tests. rotate_code turns the matrix 90
// degrees clockwise.
std::vector<std::uint8_t> rotate_code(const std::vector<std::uint8_t>& code, int grid);
int hamming_distance(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b);

// Seeded rejection sampling; throws ValueError when `count` codes at
// `min_hamming` cannot be placed for this grid size.
MarkerDictionary generate_dictionary(int grid, int count, int min_hamming,
                                     std::uint64_t seed = 0);

// Text exchange format: one line per id, grid*grid characters of 0/1.
// min_hamming is recomputed (and the pairwise invariant re-verified) on load.
void save_dictionary(const MarkerDictionary& d, const std::filesystem::path& path);
MarkerDictionary load_dictionary(const std::filesystem::path& path);

// Grayscale render: white quiet zone, one-cell black border ring, inner
// cells from the code. `side` covers border + code and must be divisible by
// grid + 2 so cell edges are exact.
Frame render_marker(const MarkerDictionary& d, int id, int side, int quiet_zone);

// Phase one: adaptive threshold, border-following contours, 4-vertex
// polygon approximation, then size/form/proximity filters.
std::vector<Quad> find_candidates(const Frame& f, const DetectorParams& params = {});

// Phase two: rectify the quad with a homography, binarize cells against an
// Otsu threshold, demand a black border ring, then match the inner bits
// against every id under all four rotations.
DecodeResult decode_candidate(const Frame& f, const Quad& quad, const MarkerDictionary& d,
                              const DetectorParams& params = {});

// Full two-phase detection; at most one observation per id (lowest Hamming
// correction count wins).
std::vector<MarkerObservation> detect_markers(const Frame& f, const MarkerDictionary& d,
                                              const DetectorParams& params = {});

} // namespace boomtrack
