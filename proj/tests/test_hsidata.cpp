#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <cstring>
#include <random>
#include <set>

#include "common/rng.hpp"
#include "hsidata/cube.hpp"

using namespace hsie;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("hsie_hsidata_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

HsiCube random_cube(int h, int w, int b, std::uint64_t seed) {
    Rng rng(seed);
    HsiCube c(h, w, b);
    for (float& v : c.values()) v = static_cast<float>(rng.uniform());
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

// Window plus centre must be k+1 contiguous in-range bands, as balanced as the edges allow.
std::vector<int> window_oracle(int b, int total, int k) {
    int best_s = -1, best_gap = 1 << 30;
    for (int s = 0; s + k <= total - 1; ++s) {
        if (b < s || b > s + k) continue;
        const int gap = std::abs((b - s) - (s + k - b));
        if (gap <= best_gap) {  // ties resolve to the later start
            best_gap = gap;
            best_s = s;
        }
    }
    std::vector<int> out;
    for (int i = best_s; i <= best_s + k; ++i)
        if (i != b) out.push_back(i);
    return out;
}

}  // namespace

TEST_CASE("cube file round trip is bit exact") {
    TempDir dir;
    const HsiCube c = random_cube(8, 8, 4, 1);
    write_cube(c, dir.path / "cube");
    CHECK(read_cube(dir.path / "cube") == c);
    CHECK(read_cube(dir.path / "cube.hdr") == c);
    CHECK(read_cube(dir.path / "cube.raw") == c);
    CHECK(fs::file_size(dir.path / "cube.raw") == 8 * 8 * 4 * 4);
    const std::string hdr = slurp(dir.path / "cube.hdr");
    CHECK(hdr.find("interleave = bsq") != std::string::npos);
    CHECK(hdr.find("data type = 4") != std::string::npos);
    CHECK(hdr.find("byte order = 0") != std::string::npos);

    // Band-sequential payload: first float is band 0, row 0, col 0; second plane starts at 64.
    const std::string raw = slurp(dir.path / "cube.raw");
    float f0 = 0, f64 = 0;
    std::memcpy(&f0, raw.data(), 4);
    std::memcpy(&f64, raw.data() + 64 * 4, 4);
    CHECK(f0 == c.at(0, 0, 0));
    CHECK(f64 == c.at(1, 0, 0));
}

TEST_CASE("cube reader rejects inconsistent files") {
    TempDir dir;
    write_cube(random_cube(4, 4, 3, 2), dir.path / "c");
    auto rewrite_header = [&](const std::string& from, const std::string& to) {
        std::string h = slurp(dir.path / "c.hdr");
        h.replace(h.find(from), from.size(), to);
        std::ofstream(dir.path / "c.hdr", std::ios::trunc) << h;
    };

    rewrite_header("bands = 3", "bands = 4");
    CHECK_THROWS_AS(read_cube(dir.path / "c"), IoError);
    rewrite_header("bands = 4", "bands = 3");
    CHECK_NOTHROW(read_cube(dir.path / "c"));

    rewrite_header("byte order = 0", "byte order = 1");
    CHECK_THROWS_WITH_AS(read_cube(dir.path / "c"), doctest::Contains("unsupported format"), IoError);
    rewrite_header("byte order = 1", "byte order = 0");

    rewrite_header("data type = 4", "data type = 12");
    CHECK_THROWS_AS(read_cube(dir.path / "c"), IoError);
    rewrite_header("data type = 12", "data type = 4");

    rewrite_header("samples = 4\n", "");
    CHECK_THROWS_WITH_AS(read_cube(dir.path / "c"), doctest::Contains("samples"), IoError);

    CHECK_THROWS_AS(read_cube(dir.path / "missing"), IoError);

    HsiCube bad(2, 2, 1);
    bad.values()[0] = NAN;
    CHECK_THROWS_AS(write_cube(bad, dir.path / "bad"), IoError);
}

TEST_CASE("select_bands") {
    CHECK(select_bands(HsiCube(2, 2, 224), 20, 12, 3).bands() == 64);
    CHECK(select_bands(HsiCube(2, 2, 204), 6, 6, 3).bands() == 64);
    const HsiCube c = random_cube(3, 3, 10, 4);
    CHECK(select_bands(c, 0, 0, 1) == c);
    for (int front = 0; front < 4; ++front)
        for (int back = 0; back < 4; ++back)
            for (int stride = 1; stride <= 4; ++stride) {
                const HsiCube s = select_bands(c, front, back, stride);
                CHECK(s.bands() == (10 - front - back + stride - 1) / stride);
                for (int b = 0; b < s.bands(); ++b) CHECK(s.at(b, 1, 1) == c.at(front + b * stride, 1, 1));
            }
    CHECK_THROWS_AS(select_bands(c, 5, 5, 1), ValidationError);
    CHECK_THROWS_AS(select_bands(c, 0, 0, 0), ValidationError);
}

TEST_CASE("normalize") {
    HsiCube c(1, 6, 1, std::vector<float>{0.2f, 0.3f, 0.4f, 0.5f, 0.6f, 0.7f});
    const HsiCube n = normalize(c);
    CHECK(*std::min_element(n.values().begin(), n.values().end()) == 0.0f);
    CHECK(*std::max_element(n.values().begin(), n.values().end()) == 1.0f);
    HsiCube spanning(1, 3, 1, std::vector<float>{0.0f, 0.25f, 1.0f});
    CHECK(normalize(spanning) == spanning);
    const HsiCube flat = normalize(HsiCube(2, 2, 2, 0.3f));
    for (float v : flat.values()) CHECK(v == 0.0f);
    HsiCube inf(1, 2, 1, std::vector<float>{0.0f, INFINITY});
    CHECK_THROWS_AS(normalize(inf), ValidationError);
}

TEST_CASE("adjacent_window") {
    auto w30 = adjacent_window(30, 64, 24);
    std::vector<int> expect;
    for (int i = 18; i <= 42; ++i)
        if (i != 30) expect.push_back(i);
    CHECK(w30 == expect);
    expect.clear();
    for (int i = 1; i <= 24; ++i) expect.push_back(i);
    CHECK(adjacent_window(0, 64, 24) == expect);
    expect.clear();
    for (int i = 39; i <= 62; ++i) expect.push_back(i);
    CHECK(adjacent_window(63, 64, 24) == expect);

    for (int total : {5, 9, 32, 64})
        for (int k = 0; k < total; ++k)
            for (int b = 0; b < total; ++b) {
                const auto w = adjacent_window(b, total, k);
                REQUIRE(static_cast<int>(w.size()) == k);
                CHECK(std::is_sorted(w.begin(), w.end()));
                CHECK(std::set<int>(w.begin(), w.end()).size() == w.size());
                CHECK(std::find(w.begin(), w.end(), b) == w.end());
                CHECK(w == window_oracle(b, total, k));
            }
    CHECK_THROWS_AS(adjacent_window(0, 24, 24), ValidationError);
}

TEST_CASE("extract_patches") {
    HsiCube big(390, 512, 1);
    CHECK(extract_patches(big, big, 64, 0).size() == 48);
    HsiCube sq(64, 64, 2);
    CHECK(extract_patches(sq, sq, 64, 1).size() == 2);
    HsiCube odd(100, 100, 1);
    CHECK(extract_patches(odd, odd, 64, 0).size() == 1);
    CHECK_THROWS_AS(extract_patches(sq, sq, 65, 1), ValidationError);

    const HsiCube low = random_cube(20, 24, 6, 7), label = random_cube(20, 24, 6, 8);
    const auto samples = extract_patches(low, label, 8, 3);
    CHECK(samples.size() == 6u * 2 * 3);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        CHECK(s.band_index == static_cast<int>(i / 6));  // band-major, then row-major tiles
        CHECK(s.window == adjacent_window(s.band_index, 6, 3));
        CHECK(s.cube_patch.shape() == nn::Shape{3, 8, 8});
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) {
                CHECK(s.label_patch.at(0, y, x) == label.at(s.band_index, s.row + y, s.col + x));
                CHECK(s.band_patch.at(0, y, x) == low.at(s.band_index, s.row + y, s.col + x));
                for (int j = 0; j < 3; ++j) CHECK(s.cube_patch.at(j, y, x) == low.at(s.window[static_cast<std::size_t>(j)], s.row + y, s.col + x));
            }
    }
    CHECK(samples[1].col == 8);
    CHECK(samples[3].row == 8);
}

TEST_CASE("synth_scene") {
    const HsiCube a = synth_scene(64, 64, 32, 5);
    CHECK(a == synth_scene(64, 64, 32, 5));
    CHECK_FALSE(a == synth_scene(64, 64, 32, 6));
    for (float v : a.values()) {
        CHECK(v >= 0.05f);
        CHECK(v <= 0.95f);
    }
    double corr = 0;
    for (int b = 0; b + 1 < a.bands(); ++b) {
        auto x = a.band(b), y = a.band(b + 1);
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            mx += x[i];
            my += y[i];
        }
        mx /= static_cast<double>(x.size());
        my /= static_cast<double>(y.size());
        double sxy = 0, sxx = 0, syy = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sxy += (x[i] - mx) * (y[i] - my);
            sxx += (x[i] - mx) * (x[i] - mx);
            syy += (y[i] - my) * (y[i] - my);
        }
        corr += sxy / std::sqrt(sxx * syy);
    }
    CHECK(corr / (a.bands() - 1) > 0.9);
    CHECK_THROWS_AS(synth_scene(63, 64, 4, 1), ValidationError);
    CHECK_THROWS_AS(synth_scene(64, 64, 1, 1), ValidationError);
}

TEST_CASE("degrade") {
    const HsiCube clean = synth_scene(64, 64, 32, 9);
    CHECK(degrade(clean, DegradeConfig::identity()) == clean);

    DegradeConfig dark = DegradeConfig::identity();
    dark.gain = 0.2f;
    const HsiCube d = degrade(clean, dark);
    for (std::size_t i = 0; i < clean.size(); ++i) CHECK(d.values()[i] == static_cast<float>(0.2f * static_cast<double>(clean.values()[i])));

    const DegradeConfig full;
    const HsiCube low = degrade(clean, full);
    CHECK(low == degrade(clean, full));
    for (float v : low.values()) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }

    // Each noise type in isolation, measured against its configured strength.
    auto residual = [&](const DegradeConfig& cfg) {
        const HsiCube out = degrade(clean, cfg);
        std::vector<double> r(clean.size());
        for (std::size_t i = 0; i < r.size(); ++i)
            r[i] = static_cast<double>(out.values()[i]) - static_cast<double>(cfg.gain) * clean.values()[i];
        return std::pair{out, r};
    };
    DegradeConfig only = DegradeConfig::identity();  // full gain keeps offsets clear of the clamp

    only.impulse_fraction = 0.01f;
    {
        auto [out, r] = residual(only);
        std::size_t hits = 0;
        for (float v : out.values()) hits += (v == 0.0f || v == 1.0f);
        const double frac = static_cast<double>(hits) / static_cast<double>(out.size());
        CHECK(std::abs(frac / 0.01 - 1.0) < 0.2);
    }
    only.impulse_fraction = 0;

    only.gaussian_sigma = 0.02f;
    {
        auto [out, r] = residual(only);
        double ss = 0;
        for (double v : r) ss += v * v;
        CHECK(std::abs(std::sqrt(ss / static_cast<double>(r.size())) / 0.02 - 1.0) < 0.2);
    }
    only.gaussian_sigma = 0;

    only.stripe_fraction = 0.05f;
    only.stripe_amplitude = 0.05f;
    {
        auto [out, r] = residual(only);
        int striped = 0;
        const int W = clean.width(), H = clean.height();
        for (int b = 0; b < clean.bands(); ++b)
            for (int x = 0; x < W; ++x) {
                const double off = r[static_cast<std::size_t>(b) * clean.plane() + static_cast<std::size_t>(x)];
                bool constant = true;
                for (int y = 1; y < H; ++y)
                    constant &= std::abs(r[(static_cast<std::size_t>(b) * H + y) * W + x] - off) < 1e-6;
                CHECK(constant);
                CHECK(std::abs(off) <= 0.05 + 1e-6);
                striped += std::abs(off) > 1e-7;
            }
        const double frac = static_cast<double>(striped) / (clean.bands() * W);
        CHECK(std::abs(frac / 0.05 - 1.0) < 0.2);
    }

    DegradeConfig bad;
    bad.gain = 0;
    CHECK_THROWS_AS(degrade(clean, bad), ValidationError);
}
