#include "boomtrack/fiducial.hpp"

#include "boomtrack/errors.hpp"
#include "boomtrack/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <string>

namespace boomtrack {

// ---------------------------------------------------------------------------
// Bit-matrix helpers

std::vector<std::uint8_t> rotate_code(const std::vector<std::uint8_t>& code, int grid) {
    std::vector<std::uint8_t> out(code.size());
    for (int r = 0; r < grid; ++r) {
        for (int c = 0; c < grid; ++c) {
            out[static_cast<std::size_t>(r) * grid + c] =
                code[static_cast<std::size_t>(grid - 1 - c) * grid + r];
        }
    }
    return out;
}

int hamming_distance(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d += a[i] != b[i];
    }
    return d;
}

namespace {

// Min Hamming distance between two codes over the four relative rotations.
int rotated_distance(const std::vector<std::uint8_t>& a, std::vector<std::uint8_t> b, int grid) {
    int best = hamming_distance(a, b);
    for (int r = 1; r < 4; ++r) {
        b = rotate_code(b, grid);
        best = std::min(best, hamming_distance(a, b));
    }
    return best;
}

int pairwise_min_hamming(const std::vector<std::vector<std::uint8_t>>& codes, int grid) {
    if (codes.size() < 2) {
        return grid * grid;
    }
    int best = grid * grid;
    for (std::size_t i = 0; i < codes.size(); ++i) {
        for (std::size_t j = i + 1; j < codes.size(); ++j) {
            best = std::min(best, rotated_distance(codes[i], codes[j], grid));
        }
    }
    return best;
}

} // namespace

// ---------------------------------------------------------------------------
// Dictionary generation and exchange

MarkerDictionary generate_dictionary(int grid, int count, int min_hamming, std::uint64_t seed) {
    if (grid < 1) throw ValueError("grid must be at least 1");
    if (count < 1) throw ValueError("count must be at least 1");
    if (min_hamming < 1) throw ValueError("min_hamming must be at least 1");
    const int bits = grid * grid;
    if (count > 1 && min_hamming > bits) {
        throw ValueError("infeasible dictionary: min_hamming exceeds code length");
    }
    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::uint8_t>> codes;
    codes.reserve(static_cast<std::size_t>(count));
    const long long max_attempts = 20000LL * count + 100000LL;
    long long attempts = 0;
    while (static_cast<int>(codes.size()) < count) {
        if (++attempts > max_attempts) {
            throw ValueError("infeasible dictionary: cannot place " + std::to_string(count) +
                             " codes at distance " + std::to_string(min_hamming) +
                             " for grid " + std::to_string(grid));
        }
        std::vector<std::uint8_t> candidate(static_cast<std::size_t>(bits));
        for (auto& bit : candidate) {
            bit = static_cast<std::uint8_t>(rng() & 1u);
        }
        bool ok = true;
        for (const auto& existing : codes) {
            if (rotated_distance(existing, candidate, grid) < min_hamming) {
                ok = false;
                break;
            }
        }
        if (ok) {
            codes.push_back(std::move(candidate));
        }
    }
    MarkerDictionary d;
    d.grid = grid;
    d.codes = std::move(codes);
    d.min_hamming = pairwise_min_hamming(d.codes, grid);
    return d;
}

void save_dictionary(const MarkerDictionary& d, const std::filesystem::path& path) {
    atomic_write(path, [&](std::ostream& out) {
        for (const auto& code : d.codes) {
            for (const std::uint8_t bit : code) {
                out << (bit ? '1' : '0');
            }
            out << "\n";
        }
    });
}

MarkerDictionary load_dictionary(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("no such dictionary file: " + path.string());
    }
    MarkerDictionary d;
    std::string line;
    std::size_t lineno = 0;
    std::size_t expected_len = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (expected_len == 0) {
            expected_len = line.size();
            const int g = static_cast<int>(std::lround(std::sqrt(static_cast<double>(expected_len))));
            if (static_cast<std::size_t>(g) * g != expected_len) {
                throw FormatError("code length is not a perfect square", lineno);
            }
            d.grid = g;
        } else if (line.size() != expected_len) {
            throw FormatError("inconsistent code length", lineno);
        }
        std::vector<std::uint8_t> code(expected_len);
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '0') {
                code[i] = 0;
            } else if (line[i] == '1') {
                code[i] = 1;
            } else {
                throw FormatError("dictionary codes must be 0/1", lineno);
            }
        }
        d.codes.push_back(std::move(code));
    }
    if (d.codes.empty()) {
        throw FormatError("empty dictionary file " + path.string());
    }
    d.min_hamming = pairwise_min_hamming(d.codes, d.grid);
    if (d.min_hamming == 0) {
        throw FormatError("dictionary contains duplicate codes (under rotation)");
    }
    return d;
}

// ---------------------------------------------------------------------------
// Rendering

Frame render_marker(const MarkerDictionary& d, int id, int side, int quiet_zone) {
    if (id < 0 || id >= d.count()) {
        throw ValueError("marker id " + std::to_string(id) + " out of range");
    }
    const int k = d.grid + 2;
    if (side <= 0 || side % k != 0) {
        throw ValueError("side " + std::to_string(side) + " not divisible by " +
                         std::to_string(k));
    }
    if (quiet_zone < 0) {
        throw ValueError("quiet zone must be non-negative");
    }
    const int cell = side / k;
    const int total = side + 2 * quiet_zone;
    Frame f = make_frame(total, total, 1, 255);
    const auto& code = d.codes[static_cast<std::size_t>(id)];
    for (int cy = 0; cy < k; ++cy) {
        for (int cx = 0; cx < k; ++cx) {
            bool white;
            if (cx == 0 || cy == 0 || cx == k - 1 || cy == k - 1) {
                white = false; // border ring
            } else {
                white = code[static_cast<std::size_t>(cy - 1) * d.grid + (cx - 1)] != 0;
            }
            if (white) continue;
            for (int y = 0; y < cell; ++y) {
                for (int x = 0; x < cell; ++x) {
                    f.at(quiet_zone + cx * cell + x, quiet_zone + cy * cell + y) = 0;
                }
            }
        }
    }
    return f;
}

// ---------------------------------------------------------------------------
// Phase one: candidate extraction

namespace {

struct Pt {
    int x = 0;
    int y = 0;
    bool operator==(const Pt& o) const { return x == o.x && y == o.y; }
};

// Moore neighborhood, clockwise on screen starting east (y grows downward).
constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

int direction_index(Pt from, Pt to) {
    for (int d = 0; d < 8; ++d) {
        if (from.x + kDx[d] == to.x && from.y + kDy[d] == to.y) {
            return d;
        }
    }
    return 0;
}

// Foreground = darker than the local window mean by at least `offset`.
std::vector<std::uint8_t> adaptive_threshold(const Frame& gray, int window, int offset) {
    const int w = gray.width;
    const int h = gray.height;
    std::vector<std::uint64_t> integral(static_cast<std::size_t>(w + 1) * (h + 1), 0);
    for (int y = 0; y < h; ++y) {
        std::uint64_t row = 0;
        for (int x = 0; x < w; ++x) {
            row += gray.at(x, y);
            integral[static_cast<std::size_t>(y + 1) * (w + 1) + (x + 1)] =
                integral[static_cast<std::size_t>(y) * (w + 1) + (x + 1)] + row;
        }
    }
    auto window_sum = [&](int x0, int y0, int x1, int y1) {
        return integral[static_cast<std::size_t>(y1 + 1) * (w + 1) + (x1 + 1)] -
               integral[static_cast<std::size_t>(y0) * (w + 1) + (x1 + 1)] -
               integral[static_cast<std::size_t>(y1 + 1) * (w + 1) + x0] +
               integral[static_cast<std::size_t>(y0) * (w + 1) + x0];
    };
    const int r = window / 2;
    std::vector<std::uint8_t> fg(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y) {
        const int y0 = std::max(0, y - r);
        const int y1 = std::min(h - 1, y + r);
        for (int x = 0; x < w; ++x) {
            const int x0 = std::max(0, x - r);
            const int x1 = std::min(w - 1, x + r);
            const std::uint64_t sum = window_sum(x0, y0, x1, y1);
            const std::uint64_t area = static_cast<std::uint64_t>(x1 - x0 + 1) * (y1 - y0 + 1);
            const std::uint64_t lhs = (static_cast<std::uint64_t>(gray.at(x, y)) + offset) * area;
            if (lhs < sum) {
                fg[static_cast<std::size_t>(y) * w + x] = 1;
            }
        }
    }
    return fg;
}

// Outer boundary of the component containing `start` (its raster-first
// pixel), traced clockwise with Jacob's stopping criterion.
std::vector<Pt> trace_boundary(const std::vector<std::uint8_t>& fg, int w, int h, Pt start,
                               long long step_limit) {
    auto is_fg = [&](int x, int y) {
        return x >= 0 && x < w && y >= 0 && y < h && fg[static_cast<std::size_t>(y) * w + x] != 0;
    };
    std::vector<Pt> contour{start};
    Pt backtrack{start.x - 1, start.y};
    const Pt b0 = backtrack;
    Pt current = start;
    long long steps = 0;
    while (steps++ < step_limit) {
        const int from = direction_index(current, backtrack);
        bool moved = false;
        for (int i = 1; i <= 8; ++i) {
            const int d = (from + i) % 8;
            const Pt n{current.x + kDx[d], current.y + kDy[d]};
            if (is_fg(n.x, n.y)) {
                backtrack = {current.x + kDx[(d + 7) % 8], current.y + kDy[(d + 7) % 8]};
                current = n;
                moved = true;
                break;
            }
        }
        if (!moved) {
            break; // isolated pixel
        }
        if (current == start && backtrack == b0) {
            break;
        }
        contour.push_back(current);
    }
    return contour;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 <= 1e-12) {
        return distance(p, a);
    }
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return distance(p, a + ab * t);
}

void douglas_peucker(const std::vector<Vec2>& pts, std::size_t i0, std::size_t i1, double eps,
                     std::vector<std::size_t>& keep) {
    double dmax = -1.0;
    std::size_t imax = i0;
    for (std::size_t i = i0 + 1; i < i1; ++i) {
        const double d = point_segment_distance(pts[i], pts[i0], pts[i1]);
        if (d > dmax) {
            dmax = d;
            imax = i;
        }
    }
    if (dmax > eps) {
        douglas_peucker(pts, i0, imax, eps, keep);
        keep.push_back(imax);
        douglas_peucker(pts, imax, i1, eps, keep);
    }
}

// Approximates a closed contour with a polygon; returns indices into the
// contour, in traversal order.
std::vector<std::size_t> approx_polygon(const std::vector<Vec2>& contour, double eps) {
    const std::size_t n = contour.size();
    auto farthest_from = [&](std::size_t i) {
        std::size_t best = i;
        double best_d = -1.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = distance(contour[i], contour[j]);
            if (d > best_d) {
                best_d = d;
                best = j;
            }
        }
        return best;
    };
    const std::size_t a = farthest_from(0);
    const std::size_t b = farthest_from(a);
    // Unroll the closed contour into two open chains a..b and b..a.
    std::vector<Vec2> chain1, chain2;
    std::vector<std::size_t> map1, map2;
    for (std::size_t i = a;; i = (i + 1) % n) {
        chain1.push_back(contour[i]);
        map1.push_back(i);
        if (i == b) break;
    }
    for (std::size_t i = b;; i = (i + 1) % n) {
        chain2.push_back(contour[i]);
        map2.push_back(i);
        if (i == a) break;
    }
    std::vector<std::size_t> keep1, keep2;
    if (chain1.size() >= 2) douglas_peucker(chain1, 0, chain1.size() - 1, eps, keep1);
    if (chain2.size() >= 2) douglas_peucker(chain2, 0, chain2.size() - 1, eps, keep2);
    std::vector<std::size_t> poly;
    poly.push_back(a);
    for (const std::size_t i : keep1) poly.push_back(map1[i]);
    poly.push_back(b);
    for (const std::size_t i : keep2) poly.push_back(map2[i]);
    return poly;
}

struct FittedLine {
    Vec2 point{};
    Vec2 dir{};
    bool valid = false;
};

// Orthogonal least-squares line through a point run.
FittedLine fit_line(const std::vector<Vec2>& pts) {
    FittedLine line;
    if (pts.size() < 4) {
        return line;
    }
    double mx = 0.0, my = 0.0;
    for (const Vec2& p : pts) {
        mx += p.x;
        my += p.y;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const Vec2& p : pts) {
        const double dx = p.x - mx;
        const double dy = p.y - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    const double angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    line.point = {mx, my};
    line.dir = {std::cos(angle), std::sin(angle)};
    line.valid = true;
    return line;
}

bool intersect_lines(const FittedLine& a, const FittedLine& b, Vec2& out) {
    const double denom = cross(a.dir, b.dir);
    if (std::abs(denom) < 1e-9) {
        return false;
    }
    const double t = cross(b.point - a.point, b.dir) / denom;
    out = a.point + a.dir * t;
    return true;
}

// Sharpen the four DP corners by intersecting least-squares lines fitted to
// the contour runs between them. Falls back to the DP corner when a fit is
// unavailable or the intersection drifts.
std::array<Vec2, 4> refine_corners(const std::vector<Vec2>& contour,
                                   const std::vector<std::size_t>& corner_idx) {
    const std::size_t n = contour.size();
    std::array<FittedLine, 4> lines;
    for (int e = 0; e < 4; ++e) {
        const std::size_t i0 = corner_idx[static_cast<std::size_t>(e)];
        const std::size_t i1 = corner_idx[static_cast<std::size_t>((e + 1) % 4)];
        const std::size_t len = (i1 + n - i0) % n;
        if (len < 8) {
            continue;
        }
        const std::size_t trim = std::max<std::size_t>(2, len / 6);
        std::vector<Vec2> run;
        for (std::size_t s = trim; s + trim <= len; ++s) {
            run.push_back(contour[(i0 + s) % n]);
        }
        lines[static_cast<std::size_t>(e)] = fit_line(run);
    }
    std::array<Vec2, 4> corners;
    for (int c = 0; c < 4; ++c) {
        const Vec2 fallback = contour[corner_idx[static_cast<std::size_t>(c)]];
        corners[static_cast<std::size_t>(c)] = fallback;
        const FittedLine& incoming = lines[static_cast<std::size_t>((c + 3) % 4)];
        const FittedLine& outgoing = lines[static_cast<std::size_t>(c)];
        if (!incoming.valid || !outgoing.valid) {
            continue;
        }
        Vec2 refined;
        if (intersect_lines(incoming, outgoing, refined) && distance(refined, fallback) <= 3.0) {
            corners[static_cast<std::size_t>(c)] = refined;
        }
    }
    return corners;
}

bool is_convex(const std::array<Vec2, 4>& q) {
    int sign = 0;
    for (int i = 0; i < 4; ++i) {
        const Vec2 e1 = q[static_cast<std::size_t>((i + 1) % 4)] - q[static_cast<std::size_t>(i)];
        const Vec2 e2 = q[static_cast<std::size_t>((i + 2) % 4)] - q[static_cast<std::size_t>((i + 1) % 4)];
        const double c = cross(e1, e2);
        if (std::abs(c) < 1e-9) {
            return false;
        }
        const int s = c > 0 ? 1 : -1;
        if (sign == 0) {
            sign = s;
        } else if (s != sign) {
            return false;
        }
    }
    return true;
}

double quad_perimeter(const std::array<Vec2, 4>& q) {
    double p = 0.0;
    for (int i = 0; i < 4; ++i) {
        p += distance(q[static_cast<std::size_t>(i)], q[static_cast<std::size_t>((i + 1) % 4)]);
    }
    return p;
}

// Mean corner distance under the best cyclic alignment; both quads are
// clockwise so no reflection is needed.
double quad_proximity(const Quad& a, const Quad& b) {
    double best = std::numeric_limits<double>::max();
    for (int shift = 0; shift < 4; ++shift) {
        double total = 0.0;
        for (int i = 0; i < 4; ++i) {
            total += distance(a.corners[static_cast<std::size_t>(i)],
                              b.corners[static_cast<std::size_t>((i + shift) % 4)]);
        }
        best = std::min(best, total / 4.0);
    }
    return best;
}

} // namespace

std::vector<Quad> find_candidates(const Frame& f, const DetectorParams& params) {
    const Frame gray = to_grayscale(f);
    const int w = gray.width;
    const int h = gray.height;
    const std::vector<std::uint8_t> fg =
        adaptive_threshold(gray, params.threshold_window, params.threshold_offset);

    std::vector<Quad> quads;
    std::vector<std::uint8_t> visited(fg.size(), 0);
    std::vector<Pt> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * w + x;
            if (!fg[idx] || visited[idx]) {
                continue;
            }
            // Flood-fill the component; (x, y) is its raster-first pixel.
            long long area = 0;
            stack.clear();
            stack.push_back({x, y});
            visited[idx] = 1;
            while (!stack.empty()) {
                const Pt p = stack.back();
                stack.pop_back();
                ++area;
                for (int d = 0; d < 8; ++d) {
                    const int nx = p.x + kDx[d];
                    const int ny = p.y + kDy[d];
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
                    if (fg[nidx] && !visited[nidx]) {
                        visited[nidx] = 1;
                        stack.push_back({nx, ny});
                    }
                }
            }
            if (area < 12) {
                continue;
            }
            const std::vector<Pt> boundary =
                trace_boundary(fg, w, h, {x, y}, 10 * area + 100);
            if (boundary.size() < 8) {
                continue;
            }
            std::vector<Vec2> contour;
            contour.reserve(boundary.size());
            for (const Pt& p : boundary) {
                contour.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
            }
            double perimeter = 0.0;
            for (std::size_t i = 0; i < contour.size(); ++i) {
                perimeter += distance(contour[i], contour[(i + 1) % contour.size()]);
            }
            if (perimeter < params.min_perimeter) {
                continue;
            }
            const std::vector<std::size_t> poly =
                approx_polygon(contour, params.approx_eps_rel * perimeter);
            if (poly.size() != 4) {
                continue;
            }
            std::array<Vec2, 4> corners = refine_corners(contour, poly);
            if (signed_area(corners) < 0.0) {
                std::reverse(corners.begin() + 1, corners.end());
            }
            if (!is_convex(corners)) {
                continue;
            }
            double min_side = std::numeric_limits<double>::max();
            double max_side = 0.0;
            for (int i = 0; i < 4; ++i) {
                const double s = distance(corners[static_cast<std::size_t>(i)],
                                          corners[static_cast<std::size_t>((i + 1) % 4)]);
                min_side = std::min(min_side, s);
                max_side = std::max(max_side, s);
            }
            if (min_side < params.min_corner_dist || max_side / min_side > params.max_aspect) {
                continue;
            }
            quads.push_back({corners, quad_perimeter(corners)});
        }
    }

    // Near-duplicate candidates (e.g. the inner edge of a thick border)
    // collapse to the larger quad.
    std::vector<std::uint8_t> drop(quads.size(), 0);
    for (std::size_t i = 0; i < quads.size(); ++i) {
        for (std::size_t j = i + 1; j < quads.size(); ++j) {
            if (drop[i] || drop[j]) continue;
            if (quad_proximity(quads[i], quads[j]) < params.min_corner_dist) {
                if (quads[i].perimeter >= quads[j].perimeter) {
                    drop[j] = 1;
                } else {
                    drop[i] = 1;
                }
            }
        }
    }
    std::vector<Quad> out;
    for (std::size_t i = 0; i < quads.size(); ++i) {
        if (!drop[i]) {
            out.push_back(quads[i]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Phase two: rectification and decoding

namespace {

// Homography mapping canonical cell coordinates (u, v) in [0, K]^2 to image
// points, from the four corner correspondences (direct linear method).
struct Homography {
    double h[8] = {0};
    bool valid = false;

    Vec2 map(double u, double v) const {
        const double den = h[6] * u + h[7] * v + 1.0;
        return {(h[0] * u + h[1] * v + h[2]) / den, (h[3] * u + h[4] * v + h[5]) / den};
    }
};

Homography solve_homography(double k, const std::array<Vec2, 4>& quad) {
    const double src[4][2] = {{0, 0}, {k, 0}, {k, k}, {0, k}};
    double m[8][9] = {};
    for (int i = 0; i < 4; ++i) {
        const double u = src[i][0];
        const double v = src[i][1];
        const double x = quad[static_cast<std::size_t>(i)].x;
        const double y = quad[static_cast<std::size_t>(i)].y;
        double* r1 = m[2 * i];
        double* r2 = m[2 * i + 1];
        r1[0] = u; r1[1] = v; r1[2] = 1; r1[6] = -u * x; r1[7] = -v * x; r1[8] = x;
        r2[3] = u; r2[4] = v; r2[5] = 1; r2[6] = -u * y; r2[7] = -v * y; r2[8] = y;
    }
    // Gaussian elimination with partial pivoting.
    Homography out;
    for (int col = 0; col < 8; ++col) {
        int pivot = col;
        for (int row = col + 1; row < 8; ++row) {
            if (std::abs(m[row][col]) > std::abs(m[pivot][col])) {
                pivot = row;
            }
        }
        if (std::abs(m[pivot][col]) < 1e-9) {
            return out;
        }
        if (pivot != col) {
            std::swap_ranges(m[pivot], m[pivot] + 9, m[col]);
        }
        for (int row = col + 1; row < 8; ++row) {
            const double f = m[row][col] / m[col][col];
            for (int c = col; c < 9; ++c) {
                m[row][c] -= f * m[col][c];
            }
        }
    }
    for (int row = 7; row >= 0; --row) {
        double acc = m[row][8];
        for (int c = row + 1; c < 8; ++c) {
            acc -= m[row][c] * out.h[c];
        }
        out.h[row] = acc / m[row][row];
    }
    out.valid = true;
    return out;
}

double bilinear_sample(const Frame& gray, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(gray.width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(gray.height - 1));
    const int x0 = static_cast<int>(x);
    const int y0 = static_cast<int>(y);
    const int x1 = std::min(x0 + 1, gray.width - 1);
    const int y1 = std::min(y0 + 1, gray.height - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = gray.at(x0, y0) * (1 - fx) + gray.at(x1, y0) * fx;
    const double bot = gray.at(x0, y1) * (1 - fx) + gray.at(x1, y1) * fx;
    return top * (1 - fy) + bot * fy;
}

int otsu_threshold(const std::vector<int>& histogram, long long total) {
    long long sum = 0;
    for (int i = 0; i < 256; ++i) {
        sum += static_cast<long long>(i) * histogram[i];
    }
    long long sum_b = 0;
    long long w_b = 0;
    double best_var = -1.0;
    int threshold = 0;
    for (int t = 0; t < 256; ++t) {
        w_b += histogram[t];
        if (w_b == 0) continue;
        const long long w_f = total - w_b;
        if (w_f == 0) break;
        sum_b += static_cast<long long>(t) * histogram[t];
        const double m_b = static_cast<double>(sum_b) / static_cast<double>(w_b);
        const double m_f = static_cast<double>(sum - sum_b) / static_cast<double>(w_f);
        const double var = static_cast<double>(w_b) * static_cast<double>(w_f) *
                           (m_b - m_f) * (m_b - m_f);
        if (var > best_var) {
            best_var = var;
            threshold = t;
        }
    }
    return threshold;
}

} // namespace

DecodeResult decode_candidate(const Frame& f, const Quad& quad, const MarkerDictionary& d,
                              const DetectorParams& params) {
    DecodeResult result;
    const Frame gray = to_grayscale(f);
    const int k = d.grid + 2;

    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            if (distance(quad.corners[static_cast<std::size_t>(i)],
                         quad.corners[static_cast<std::size_t>(j)]) < 2.0) {
                result.failure = DecodeFailure::degenerate_homography;
                return result;
            }
        }
    }
    if (std::abs(signed_area(quad.corners)) < 4.0) {
        result.failure = DecodeFailure::degenerate_homography;
        return result;
    }
    const Homography h = solve_homography(static_cast<double>(k), quad.corners);
    if (!h.valid) {
        result.failure = DecodeFailure::degenerate_homography;
        return result;
    }

    // Sample the central half of every cell; vote against a global Otsu
    // threshold so blur and exposure shifts move black and white together.
    const int m = std::max(2, params.cell_samples);
    const double margin = 0.25;
    const double span = 1.0 - 2.0 * margin;
    std::vector<int> histogram(256, 0);
    std::vector<std::vector<std::uint8_t>> samples(
        static_cast<std::size_t>(k) * k, std::vector<std::uint8_t>());
    for (int row = 0; row < k; ++row) {
        for (int col = 0; col < k; ++col) {
            auto& cell = samples[static_cast<std::size_t>(row) * k + col];
            cell.reserve(static_cast<std::size_t>(m) * m);
            for (int sy = 0; sy < m; ++sy) {
                for (int sx = 0; sx < m; ++sx) {
                    const double u = col + margin + span * (sx + 0.5) / m;
                    const double v = row + margin + span * (sy + 0.5) / m;
                    const Vec2 p = h.map(u, v);
                    const int value =
                        static_cast<int>(std::lround(bilinear_sample(gray, p.x, p.y)));
                    const std::uint8_t clamped =
                        static_cast<std::uint8_t>(std::clamp(value, 0, 255));
                    cell.push_back(clamped);
                    ++histogram[clamped];
                }
            }
        }
    }
    int lo = 255, hi = 0;
    for (int v = 0; v < 256; ++v) {
        if (histogram[v] > 0) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (hi - lo < 30) {
        result.failure = DecodeFailure::border; // no black/white structure at all
        return result;
    }
    const long long total = static_cast<long long>(k) * k * m * m;
    const int threshold = otsu_threshold(histogram, total);

    auto cell_black = [&](int row, int col) {
        const auto& cell = samples[static_cast<std::size_t>(row) * k + col];
        int black = 0;
        for (const std::uint8_t v : cell) {
            black += v <= threshold;
        }
        return black * 2 > static_cast<int>(cell.size());
    };

    int border_black = 0;
    int border_cells = 0;
    for (int row = 0; row < k; ++row) {
        for (int col = 0; col < k; ++col) {
            if (row == 0 || col == 0 || row == k - 1 || col == k - 1) {
                ++border_cells;
                border_black += cell_black(row, col) ? 1 : 0;
            }
        }
    }
    if (border_black < params.border_black_min * border_cells) {
        result.failure = DecodeFailure::border;
        return result;
    }

    std::vector<std::uint8_t> bits(static_cast<std::size_t>(d.grid) * d.grid);
    for (int row = 0; row < d.grid; ++row) {
        for (int col = 0; col < d.grid; ++col) {
            bits[static_cast<std::size_t>(row) * d.grid + col] =
                cell_black(row + 1, col + 1) ? 0 : 1;
        }
    }

    int best_d = d.grid * d.grid + 1;
    int best_id = -1;
    int best_rot = 0;
    std::vector<std::uint8_t> rotated = bits;
    for (int rot = 0; rot < 4; ++rot) {
        if (rot > 0) {
            rotated = rotate_code(rotated, d.grid);
        }
        for (int id = 0; id < d.count(); ++id) {
            const int dist = hamming_distance(rotated, d.codes[static_cast<std::size_t>(id)]);
            if (dist < best_d) {
                best_d = dist;
                best_id = id;
                best_rot = rot;
            }
        }
    }
    if (best_id < 0 || best_d > d.correction_radius()) {
        result.failure = DecodeFailure::no_match;
        return result;
    }

    MarkerObservation obs;
    obs.id = best_id;
    obs.hamming_corrections = best_d;
    // Rotating the sampled bits `best_rot` times clockwise matched the
    // stored code, so the decoded top-left sits at quad corner (4 - rot) % 4.
    for (int j = 0; j < 4; ++j) {
        obs.corners[static_cast<std::size_t>(j)] =
            quad.corners[static_cast<std::size_t>((j + 4 - best_rot) % 4)];
    }
    obs.center = (obs.corners[0] + obs.corners[1] + obs.corners[2] + obs.corners[3]) * 0.25;
    result.observation = obs;
    return result;
}

std::vector<MarkerObservation> detect_markers(const Frame& f, const MarkerDictionary& d,
                                              const DetectorParams& params) {
    const Frame gray = to_grayscale(f);
    const std::vector<Quad> candidates = find_candidates(gray, params);
    std::vector<MarkerObservation> out;
    for (const Quad& quad : candidates) {
        const DecodeResult r = decode_candidate(gray, quad, d, params);
        if (!r.observation) {
            continue;
        }
        bool replaced = false;
        bool duplicate = false;
        for (MarkerObservation& existing : out) {
            if (existing.id == r.observation->id) {
                duplicate = true;
                if (r.observation->hamming_corrections < existing.hamming_corrections) {
                    existing = *r.observation;
                    replaced = true;
                }
                break;
            }
        }
        if (!duplicate && !replaced) {
            out.push_back(*r.observation);
        }
    }
    return out;
}

} // namespace boomtrack
