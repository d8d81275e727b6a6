#include "boomtrack/frame.hpp"

#include "boomtrack/errors.hpp"
#include "boomtrack/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace boomtrack {

Frame make_frame(int width, int height, int channels, std::uint8_t fill) {
    if (width <= 0 || height <= 0 || (channels != 1 && channels != 3)) {
        throw ValueError("invalid frame geometry");
    }
    Frame f;
    f.width = width;
    f.height = height;
    f.channels = channels;
    f.pixels.assign(static_cast<std::size_t>(width) * height * channels, fill);
    return f;
}

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c) && c != '#') {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    if (c != EOF) in.unget(); // the terminator is not part of the token
    return tok;
}

int parse_header_int(std::istream& in, const char* what) {
    const std::string tok = next_token(in);
    if (tok.empty()) {
        throw FormatError(std::string("missing ") + what + " in image header");
    }
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (end != tok.c_str() + tok.size() || v <= 0) {
        throw FormatError(std::string("bad ") + what + " in image header: '" + tok + "'");
    }
    return static_cast<int>(v);
}

double read_sidecar_timestamp(const std::filesystem::path& image_path) {
    const std::filesystem::path meta = image_path.string() + ".meta";
    std::ifstream in(meta);
    if (!in) return 0.0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw FormatError("bad sidecar line in " + meta.string(), lineno);
        }
        if (line.substr(0, eq) == "timestamp") {
            char* end = nullptr;
            const std::string val = line.substr(eq + 1);
            const double t = std::strtod(val.c_str(), &end);
            if (end != val.c_str() + val.size() || t < 0.0) {
                throw FormatError("bad timestamp in " + meta.string(), lineno);
            }
            return t;
        }
    }
    return 0.0;
}

} // namespace

Frame load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("no such image file: " + path.string());
    }
    const std::string magic = next_token(in);
    int channels = 0;
    if (magic == "P5") {
        channels = 1;
    } else if (magic == "P6") {
        channels = 3;
    } else {
        throw FormatError("unsupported image magic '" + magic + "' in " + path.string());
    }
    const int width = parse_header_int(in, "width");
    const int height = parse_header_int(in, "height");
    const int maxval = parse_header_int(in, "maxval");
    if (maxval != 255) {
        throw FormatError("unsupported maxval " + std::to_string(maxval) + " in " + path.string());
    }
    // Exactly one whitespace byte separates the header from the payload.
    const int sep = in.get();
    if (sep == EOF || !std::isspace(sep)) {
        throw FormatError("missing header/payload separator in " + path.string());
    }

    Frame f = make_frame(width, height, channels);
    in.read(reinterpret_cast<char*>(f.pixels.data()),
            static_cast<std::streamsize>(f.pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != f.pixels.size()) {
        throw TruncatedError("truncated pixel data in " + path.string() + ": expected " +
                             std::to_string(f.pixels.size()) + " bytes, got " +
                             std::to_string(in.gcount()));
    }
    f.timestamp = read_sidecar_timestamp(path);
    return f;
}

void save_image(const Frame& f, const std::filesystem::path& path) {
    if (f.width <= 0 || f.height <= 0 || (f.channels != 1 && f.channels != 3) ||
        f.pixels.size() != static_cast<std::size_t>(f.width) * f.height * f.channels) {
        throw ValueError("refusing to save malformed frame");
    }
    atomic_write(path, [&](std::ostream& out) {
        out << (f.channels == 1 ? "P5" : "P6") << "\n"
            << f.width << " " << f.height << "\n255\n";
        out.write(reinterpret_cast<const char*>(f.pixels.data()),
                  static_cast<std::streamsize>(f.pixels.size()));
    });
    if (f.timestamp != 0.0) {
        atomic_write(path.string() + ".meta", [&](std::ostream& out) {
            out << "timestamp=" << fmt_exact(f.timestamp) << "\n";
        });
    } else {
        // a stale sidecar from an earlier save would resurrect its timestamp
        std::error_code ec;
        std::filesystem::remove(path.string() + ".meta", ec);
    }
}

Frame to_grayscale(const Frame& f) {
    if (f.channels == 1) {
        return f;
    }
    if (f.channels != 3) {
        throw ValueError("to_grayscale expects 1 or 3 channels");
    }
    Frame g = make_frame(f.width, f.height, 1);
    g.timestamp = f.timestamp;
    const std::size_t n = static_cast<std::size_t>(f.width) * f.height;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = f.pixels[3 * i];
        const double gg = f.pixels[3 * i + 1];
        const double b = f.pixels[3 * i + 2];
        g.pixels[i] = static_cast<std::uint8_t>(std::lround(0.299 * r + 0.587 * gg + 0.114 * b));
    }
    return g;
}

Frame downscale(const Frame& f, ReductionFactor r) {
    if (r.factor < 1) {
        throw ValueError("reduction factor must be >= 1");
    }
    if (r.factor == 1) {
        return f;
    }
    if (r.factor > f.width || r.factor > f.height) {
        throw ValueError("reduction factor " + std::to_string(r.factor) +
                         " exceeds frame dimensions");
    }
    const int ow = f.width / r.factor;
    const int oh = f.height / r.factor;
    Frame out = make_frame(ow, oh, f.channels);
    out.timestamp = f.timestamp;
    const unsigned block = static_cast<unsigned>(r.factor) * static_cast<unsigned>(r.factor);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            for (int c = 0; c < f.channels; ++c) {
                unsigned sum = 0;
                for (int dy = 0; dy < r.factor; ++dy) {
                    for (int dx = 0; dx < r.factor; ++dx) {
                        sum += f.at(x * r.factor + dx, y * r.factor + dy, c);
                    }
                }
                out.at(x, y, c) = static_cast<std::uint8_t>((sum + block / 2) / block);
            }
        }
    }
    return out;
}

} // namespace boomtrack
