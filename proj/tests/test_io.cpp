#include "boomtrack/io.hpp"

#include "boomtrack/errors.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <random>

using namespace boomtrack;

TEST_CASE("atomic_write cleans up after a throwing body and replaces atomically") {
    const auto dir = test_scratch_dir("io");
    const auto path = dir / "out.txt";
    CHECK_THROWS_AS(atomic_write(path,
                                 [](std::ostream& out) {
                                     out << "partial";
                                     throw ValueError("interrupted");
                                 }),
                    ValueError);
    CHECK(!std::filesystem::exists(path));
    CHECK(!std::filesystem::exists(dir / "out.txt.tmp"));

    atomic_write(path, [](std::ostream& out) { out << "v1"; });
    atomic_write(path, [](std::ostream& out) { out << "v2"; });
    std::ifstream in(path);
    std::string content;
    in >> content;
    CHECK(content == "v2");
    CHECK(!std::filesystem::exists(dir / "out.txt.tmp"));
}

TEST_CASE("fmt_fixed never prints negative zero") {
    CHECK(fmt_fixed(-0.0, 6) == "0.000000");
    CHECK(fmt_fixed(-1e-9, 6) == "0.000000");
    CHECK(fmt_fixed(-1e-9, 12) == "-0.000000001000");
    CHECK(fmt_fixed(-0.5, 2) == "-0.50");
}

TEST_CASE("fmt_exact round-trips doubles and quantize rounds half away") {
    CHECK(quantize(127.5 / 255.0 * 255.0, 0) == 128.0);
    CHECK(quantize(0.1234564, 6) == 0.123456);
    CHECK(quantize(0.1234565, 6) == doctest::Approx(0.123457).epsilon(1e-12));
    std::mt19937_64 rng(211);
    for (int i = 0; i < 1000; ++i) {
        const double v = (uniform01(rng) - 0.5) * 1e6;
        CHECK(std::strtod(fmt_exact(v).c_str(), nullptr) == v);
    }
}
