#include "invt/adapter.hpp"
#include "invt/error.hpp"
#include "invt/metrics.hpp"
#include "invt/png_io.hpp"
#include "invt/ssim.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>

using namespace invt;
using namespace std::chrono_literals;

namespace {

const std::string kStub = INVT_STUB_ADAPTER;

struct Files {
    std::filesystem::path dir;
    std::vector<PathPair> pairs;
    std::vector<ImageBuffer> refs, dists;
};

Files write_pairs(const std::string& name, std::size_t n) {
    Files f{testutil::tmp_dir(name), {}, {}, {}};
    for (std::size_t i = 0; i < n; ++i) {
        ImageBuffer a = quantize8(testutil::random_image(16, 16, 3, i));
        ImageBuffer b = quantize8(testutil::random_image(16, 16, 3, i + 50));
        const auto pa = f.dir / ("a" + std::to_string(i) + ".png");
        const auto pb = f.dir / ("b" + std::to_string(i) + ".png");
        save_image(a, pa);
        save_image(b, pb);
        f.pairs.push_back({pa.string(), pb.string()});
        f.refs.push_back(load_image(pa));
        f.dists.push_back(load_image(pb));
    }
    return f;
}

std::string catch_transcript(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const MetricError& e) {
        return e.transcript();
    }
    FAIL("expected MetricError");
    return {};
}

}  // namespace

TEST_CASE("echo adapter values come back bit-exact and in order") {
    const auto dir = testutil::tmp_dir("adapter_echo");
    const std::vector<double> values{0.1, 1.0 / 3.0, 2.718281828459045, 1e-17, 12345.678901234567};
    {
        std::ofstream out(dir / "values.txt");
        char buf[64];
        for (double v : values) {
            std::snprintf(buf, sizeof buf, "%.17g\n", v);
            out << buf;
        }
    }
    auto m = make_metric(external_metric("echo", {kStub, "echo", (dir / "values.txt").string()}), dir);
    std::vector<PathPair> pairs(values.size(), PathPair{"x.png", "y.png"});
    const auto got = batch_distances(*m, pairs);
    REQUIRE(got.size() == values.size());
    for (std::size_t i = 0; i < values.size(); ++i) CHECK(got[i] == values[i]);
}

TEST_CASE("stub rmse adapter agrees with the builtin on 8-bit images") {
    const Files f = write_pairs("adapter_rmse", 4);
    auto ext = make_metric(external_metric("stub", {kStub, "rmse"}), f.dir);
    RmseMetric builtin;
    const auto got = batch_distances(*ext, f.pairs);
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got[i] == doctest::Approx(builtin.distance(f.refs[i], f.dists[i])).epsilon(1e-12));

    // In-memory pairs go through scratch PNGs.
    std::vector<ImagePair> mem;
    for (std::size_t i = 0; i < f.refs.size(); ++i) mem.push_back({&f.refs[i], &f.dists[i]});
    const auto again = ext->distances(std::span<const ImagePair>(mem));
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(again[i] == doctest::Approx(got[i]).epsilon(1e-12));
}

TEST_CASE("similarity adapters are converted to distances") {
    const Files f = write_pairs("adapter_sim", 3);
    auto ext = make_metric(external_metric("sim", {kStub, "ssim-similarity"}), f.dir);
    SsimMetric builtin;
    const auto got = batch_distances(*ext, f.pairs);
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got[i] == doctest::Approx(1.0 - ssim(f.refs[i], f.dists[i])).epsilon(1e-12));
}

TEST_CASE("declared polarity must match the adapter") {
    const Files f = write_pairs("adapter_pol", 1);
    MetricHandle h = external_metric("sim", {kStub, "ssim-similarity"});
    h.polarity = Polarity::distance;
    auto ext = make_metric(h, f.dir);
    CHECK_THROWS_AS(batch_distances(*ext, f.pairs), MetricError);
}

TEST_CASE("session reports name and polarity and closes cleanly") {
    AdapterSession s({kStub, "rmse"}, 10s);
    CHECK(s.metric_name() == "stub-rmse");
    CHECK_FALSE(s.similarity());
    s.close();
    CHECK(s.transcript().find("> HELLO 1") != std::string::npos);
    CHECK(s.transcript().find("> BYE") != std::string::npos);
    CHECK_THROWS_AS(s.query("a", "b"), MetricError);
}

TEST_CASE("protocol violations carry the transcript") {
    const Files f = write_pairs("adapter_bad", 1);
    const std::string bad_ready = catch_transcript([&] { AdapterSession s({kStub, "bad-ready"}, 10s); });
    CHECK(bad_ready.find("< HI there") != std::string::npos);

    const std::string garbage = catch_transcript([&] {
        AdapterSession s({kStub, "garbage"}, 10s);
        s.query(f.pairs[0].reference, f.pairs[0].distorted);
    });
    CHECK(garbage.find("< VALUE 0.5") != std::string::npos);
    CHECK(garbage.find("> PAIR ") != std::string::npos);

    const std::string crash = catch_transcript([&] {
        AdapterSession s({kStub, "crash"}, 10s);
        s.query(f.pairs[0].reference, f.pairs[0].distorted);
    });
    CHECK(crash.find("READY stub-crash") != std::string::npos);
}

TEST_CASE("a hanging adapter times out") {
    const Files f = write_pairs("adapter_hang", 1);
    const auto start = std::chrono::steady_clock::now();
    const std::string t = catch_transcript([&] {
        AdapterSession s({kStub, "hang"}, 300ms);
        s.query(f.pairs[0].reference, f.pairs[0].distorted);
    });
    CHECK(std::chrono::steady_clock::now() - start < 5s);
    CHECK(t.find("> PAIR ") != std::string::npos);
}

TEST_CASE("pair failures name the pair index") {
    const Files f = write_pairs("adapter_idx", 1);
    auto ext = make_metric(external_metric("g", {kStub, "garbage"}), f.dir);
    try {
        batch_distances(*ext, f.pairs);
        FAIL("expected MetricError");
    } catch (const MetricError& e) {
        CHECK(std::string(e.what()).find("pair 0") != std::string::npos);
        CHECK_FALSE(e.transcript().empty());
    }
}

TEST_CASE("missing executable and unsafe paths") {
    CHECK_THROWS_AS(AdapterSession({"/nonexistent/adapter"}, 1s), MetricError);
    AdapterSession s({kStub, "rmse"}, 10s);
    CHECK_THROWS_AS(s.query("has space.png", "b.png"), MetricError);
}
