#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace boomtrack {

// Raster image, row-major 8-bit samples, 1 (gray) or 3 (RGB) channels.
// Immutable by convention once built: every transform returns a new Frame.
struct Frame {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> pixels;
    double timestamp = 0.0; // seconds; 0 unless a sidecar supplied one

    std::uint8_t at(int x, int y, int c = 0) const {
        return pixels[static_cast<std::size_t>((y * width + x) * channels + c)];
    }
    std::uint8_t& at(int x, int y, int c = 0) {
        return pixels[static_cast<std::size_t>((y * width + x) * channels + c)];
    }
};

// Uniform gray frame constructor used by renderers and tests.
Frame make_frame(int width, int height, int channels, std::uint8_t fill = 0);

struct ReductionFactor {
    int factor = 1;
};

// Reads a binary PGM (P5) or PPM (P6), maxval 255. A sidecar `<path>.meta`
// with a `timestamp=<seconds>` line sets the timestamp when present.
// Distinct errors: IoError (missing file), FormatError (bad header),
// TruncatedError (short pixel payload).
Frame load_image(const std::filesystem::path& path);

// Writes P5 for 1-channel frames, P6 for 3-channel. A nonzero timestamp is
// persisted to the `<path>.meta` sidecar so load_image(save_image(f)) == f.
void save_image(const Frame& f, const std::filesystem::path& path);

// BT.601 luma: round(0.299 R + 0.587 G + 0.114 B). Identity on gray input.
Frame to_grayscale(const Frame& f);

// Block-mean reduction: output is floor(w/r) x floor(h/r), each sample the
// rounded mean of its r x r source block. Factor 1 is the identity.
Frame downscale(const Frame& f, ReductionFactor r);

} // namespace boomtrack
