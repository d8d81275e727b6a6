#include "boomtrack/frame.hpp"

#include "boomtrack/errors.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <fstream>
#include <random>

using namespace boomtrack;

namespace {

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Frame random_frame(std::mt19937_64& rng, int max_dim = 24) {
    const int w = 1 + static_cast<int>(rng() % max_dim);
    const int h = 1 + static_cast<int>(rng() % max_dim);
    const int c = (rng() & 1) ? 3 : 1;
    Frame f = make_frame(w, h, c);
    for (auto& px : f.pixels) px = static_cast<std::uint8_t>(rng() & 0xff);
    return f;
}

} // namespace

TEST_CASE("load_image parses a 2x2 P5 byte for byte") {
    const auto dir = test_scratch_dir("pgm");
    const std::string bytes = std::string("P5\n2 2\n255\n") +
                              std::string("\x00\xff\x80\x40", 4);
    write_bytes(dir / "a.pgm", bytes);
    const Frame f = load_image(dir / "a.pgm");
    CHECK(f.width == 2);
    CHECK(f.height == 2);
    CHECK(f.channels == 1);
    CHECK(f.timestamp == 0.0);
    CHECK(f.pixels == std::vector<std::uint8_t>{0, 255, 128, 64});
}

TEST_CASE("load_image distinct failure modes") {
    const auto dir = test_scratch_dir("pgm_err");
    CHECK_THROWS_AS(load_image(dir / "missing.pgm"), IoError);

    write_bytes(dir / "magic.pgm", "P9\n2 2\n255\n....");
    CHECK_THROWS_AS(load_image(dir / "magic.pgm"), FormatError);

    write_bytes(dir / "dims.pgm", "P5\n-2 2\n255\n....");
    CHECK_THROWS_AS(load_image(dir / "dims.pgm"), FormatError);

    // header claims 4x4 but only 8 payload bytes follow
    write_bytes(dir / "short.pgm", std::string("P5\n4 4\n255\n") + std::string(8, 'x'));
    CHECK_THROWS_AS(load_image(dir / "short.pgm"), TruncatedError);
}

TEST_CASE("header comments and odd whitespace are tolerated") {
    const auto dir = test_scratch_dir("pgm_comment");
    write_bytes(dir / "c.pgm", std::string("P5 # magic\n# full comment line\n 2\t2 # dims\n255\n") +
                                   std::string(4, '\x10'));
    const Frame f = load_image(dir / "c.pgm");
    CHECK(f.width == 2);
    CHECK(f.pixels.size() == 4);
}

TEST_CASE("save then load is the identity, P5 and P6 magics chosen by channels") {
    const auto dir = test_scratch_dir("roundtrip");
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
        Frame f = random_frame(rng);
        f.timestamp = (i % 3 == 0) ? 0.0 : static_cast<double>(rng() % 1000) / 64.0;
        const auto path = dir / ("f" + std::to_string(i) + (f.channels == 1 ? ".pgm" : ".ppm"));
        save_image(f, path);
        std::ifstream in(path, std::ios::binary);
        char magic[2];
        in.read(magic, 2);
        CHECK(magic[0] == 'P');
        CHECK(magic[1] == (f.channels == 1 ? '5' : '6'));
        const Frame g = load_image(path);
        CHECK(g.width == f.width);
        CHECK(g.height == f.height);
        CHECK(g.channels == f.channels);
        CHECK(g.pixels == f.pixels);
        CHECK(g.timestamp == f.timestamp);
    }
}

TEST_CASE("sidecar metadata supplies the timestamp") {
    const auto dir = test_scratch_dir("meta");
    Frame f = make_frame(2, 2, 1, 9);
    save_image(f, dir / "t.pgm");
    write_bytes(dir / "t.pgm.meta", "timestamp=1.5\n");
    CHECK(load_image(dir / "t.pgm").timestamp == 1.5);

    write_bytes(dir / "t.pgm.meta", "timestamp=oops\n");
    CHECK_THROWS_AS(load_image(dir / "t.pgm"), FormatError);

    // overwriting with a zero-timestamp frame retires the stale sidecar
    save_image(f, dir / "t.pgm");
    CHECK(!std::filesystem::exists(dir / "t.pgm.meta"));
    CHECK(load_image(dir / "t.pgm").timestamp == 0.0);
}

TEST_CASE("to_grayscale uses BT.601 luma and is idempotent") {
    Frame rgb = make_frame(3, 1, 3);
    const std::uint8_t px[3][3] = {{255, 255, 255}, {255, 0, 0}, {0, 255, 0}};
    for (int x = 0; x < 3; ++x)
        for (int c = 0; c < 3; ++c) rgb.at(x, 0, c) = px[x][c];
    const Frame g = to_grayscale(rgb);
    CHECK(g.channels == 1);
    CHECK(g.at(0, 0) == 255);
    CHECK(g.at(1, 0) == 76); // round(0.299 * 255)
    CHECK(g.at(2, 0) == 150);

    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const Frame f = random_frame(rng);
        const Frame once = to_grayscale(f);
        const Frame twice = to_grayscale(once);
        CHECK(once.pixels == twice.pixels);
        if (f.channels == 1) {
            CHECK(once.pixels == f.pixels); // identity on gray input
        }
    }
}

TEST_CASE("downscale dimensions, rounding, and identity") {
    Frame big = make_frame(1920, 1200, 1, 50);
    const Frame quarter = downscale(big, {4});
    CHECK(quarter.width == 480); // 1920/4; the printed 450x300 is a typo
    CHECK(quarter.height == 300);

    Frame block = make_frame(2, 2, 1);
    block.pixels = {0, 0, 255, 255};
    CHECK(downscale(block, {2}).pixels == std::vector<std::uint8_t>{128}); // round-half-up

    std::mt19937_64 rng(13);
    for (int i = 0; i < 100; ++i) {
        const Frame f = random_frame(rng);
        const Frame same = downscale(f, {1});
        CHECK(same.pixels == f.pixels);
    }

    CHECK_THROWS_AS(downscale(block, {3}), ValueError);
    CHECK_THROWS_AS(downscale(block, {0}), ValueError);
}

TEST_CASE("downscale block means match an independent recomputation") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 100; ++i) {
        Frame f = make_frame(2 + static_cast<int>(rng() % 20), 2 + static_cast<int>(rng() % 20), 1);
        for (auto& px : f.pixels) px = static_cast<std::uint8_t>(rng() & 0xff);
        const int factor = 2 + static_cast<int>(rng() % 2);
        if (factor > f.width || factor > f.height) continue;
        const Frame d = downscale(f, {factor});
        for (int y = 0; y < d.height; ++y) {
            for (int x = 0; x < d.width; ++x) {
                unsigned sum = 0;
                for (int dy = 0; dy < factor; ++dy)
                    for (int dx = 0; dx < factor; ++dx)
                        sum += f.at(x * factor + dx, y * factor + dy);
                const unsigned n = static_cast<unsigned>(factor * factor);
                CHECK(d.at(x, y) == (sum + n / 2) / n);
            }
        }
    }
}

TEST_CASE("downscale preserves the mean of uniform images") {
    for (const std::uint8_t v : {0, 37, 128, 255}) {
        Frame f = make_frame(16, 12, 1, v);
        const Frame d = downscale(f, {4});
        for (const auto px : d.pixels) CHECK(px == v);
    }
}
