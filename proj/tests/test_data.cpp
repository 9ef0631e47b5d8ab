#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bdrn/data.hpp"
#include "bdrn/rng.hpp"

using namespace bdrn;
using namespace bdrn::data;

TEST_CASE("parse_channel_file") {
    SUBCASE("dataset-style lines") {
        std::istringstream in("1303132929 295.0\n1303132930 297.5\n");
        RawSeries s = parse_channel_file(in);
        REQUIRE(s.size() == 2);
        CHECK(s.watts[0] == 295.0);
        CHECK(s.watts[1] == 297.5);
        CHECK(s.timestamps[0] == 1303132929);
    }
    SUBCASE("empty stream") {
        std::istringstream in("");
        CHECK_THROWS_WITH_AS(parse_channel_file(in), doctest::Contains("empty"),
                             std::runtime_error);
    }
    SUBCASE("malformed line reports the line number") {
        std::istringstream in("abc 5\n");
        CHECK_THROWS_WITH_AS(parse_channel_file(in), doctest::Contains("line 1"),
                             std::runtime_error);
    }
    SUBCASE("non-monotonic timestamps") {
        std::istringstream in("10 1.0\n10 2.0\n");
        CHECK_THROWS_WITH_AS(parse_channel_file(in), doctest::Contains("non-monotonic"),
                             std::runtime_error);
    }
    SUBCASE("negative watts clamp to zero and are counted") {
        std::istringstream in("1 -3.5\n2 4.0\n");
        RawSeries s = parse_channel_file(in);
        CHECK(s.watts[0] == 0.0);
        CHECK(s.clamped_negative == 1);
    }
    SUBCASE("re-serializing reproduces the numeric content") {
        std::istringstream in("5 0.30000000000000004\n9 12345.6789\n12 0\n");
        RawSeries s = parse_channel_file(in);
        std::ostringstream out;
        write_channel_file(s, out);
        std::istringstream in2(out.str());
        RawSeries s2 = parse_channel_file(in2);
        CHECK(s.timestamps == s2.timestamps);
        CHECK(s.watts == s2.watts);
    }
}

TEST_CASE("parse_labels") {
    SUBCASE("basic mapping") {
        std::istringstream in("1 mains\n5 fridge\n");
        auto m = parse_labels(in);
        CHECK(m.size() == 2);
        CHECK(m.at(1) == "mains");
        CHECK(m.at(5) == "fridge");
    }
    SUBCASE("empty stream gives empty mapping") {
        std::istringstream in("");
        CHECK(parse_labels(in).empty());
    }
    SUBCASE("duplicate channel") {
        std::istringstream in("1 mains\n1 kettle\n");
        CHECK_THROWS_WITH_AS(parse_labels(in), doctest::Contains("duplicate"),
                             std::runtime_error);
    }
    SUBCASE("multi-word names survive") {
        std::istringstream in("3 washing machine\n");
        CHECK(parse_labels(in).at(3) == "washing machine");
    }
}

TEST_CASE("align_series") {
    SUBCASE("hand-traced forward fill") {
        RawSeries mains, app;
        for (int64_t t = 0; t < 12; ++t) {
            mains.timestamps.push_back(t);
            mains.watts.push_back(static_cast<double>(t));
        }
        for (int64_t t : {0, 3, 6, 9}) {
            app.timestamps.push_back(t);
            app.watts.push_back(static_cast<double>(10 * t));
        }
        AlignedPair p = align_series(mains, app, 6, 3);
        REQUIRE(p.size() == 2);
        CHECK(p.aggregate == std::vector<double>{0.0, 6.0});
        CHECK(p.appliance == std::vector<double>{0.0, 60.0});
        CHECK(p.start == 0);
    }
    SUBCASE("identical native-period series align as a no-op") {
        RawSeries s;
        for (int64_t t = 0; t < 10; ++t) {
            s.timestamps.push_back(100 + 6 * t);
            s.watts.push_back(static_cast<double>(t * t));
        }
        AlignedPair p = align_series(s, s, 6, 3);
        CHECK(p.aggregate == s.watts);
        CHECK(p.appliance == s.watts);
        CHECK(p.breaks.empty());
        for (uint8_t g : p.gap_mask) CHECK(g == 0);
    }
    SUBCASE("disjoint ranges") {
        RawSeries a, b;
        a.timestamps = {0, 1};
        a.watts = {1, 1};
        b.timestamps = {100, 101};
        b.watts = {1, 1};
        CHECK_THROWS_WITH_AS(align_series(a, b, 1, 3), doctest::Contains("overlap"),
                             std::runtime_error);
    }
    SUBCASE("long gaps are excised and recorded as breaks") {
        RawSeries m, a;
        for (int64_t t : {0, 1, 2, 3, 50, 51, 52, 53}) {
            m.timestamps.push_back(t);
            m.watts.push_back(1.0);
            a.timestamps.push_back(t);
            a.watts.push_back(2.0);
        }
        AlignedPair p = align_series(m, a, 1, 3);
        CHECK(p.size() == 8);  // 4 + 4 kept, 42 grid points excised
        REQUIRE(p.breaks.size() == 1);
        CHECK(p.breaks[0] == 4);
        CHECK(p.timestamps[4] == 50);
    }
}

TEST_CASE("normalize/denormalize") {
    CHECK(normalize(1700.0, {700.0, 1000.0}) == doctest::Approx(1.0));
    CHECK(normalize(200.0, {200.0, 400.0}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(normalize(1.0, {0.0, 0.0}), std::invalid_argument);
    for (uint64_t i = 0; i < 100; ++i) {
        const double x = rng::uniform_sym(7, i, 5000.0);
        const NormStats s{rng::uniform_sym(8, i, 300.0), 1.0 + rng::uniform01(9, i) * 900.0};
        const double back = denormalize(normalize(x, s), s);
        CHECK(back == doctest::Approx(x).epsilon(1e-5));
    }
}

namespace {

AlignedPair flat_pair(size_t n) {
    AlignedPair p;
    p.period = 6;
    for (size_t i = 0; i < n; ++i) {
        p.timestamps.push_back(static_cast<int64_t>(6 * i));
        p.aggregate.push_back(static_cast<double>(i));
        p.appliance.push_back(static_cast<double>(2 * i));
        p.gap_mask.push_back(0);
    }
    return p;
}

}  // namespace

TEST_CASE("make_windows") {
    const NormStats si{0.0, 1.0}, st{0.0, 1.0};
    SUBCASE("599-long series gives exactly one window targeting index 299") {
        WindowedDataset ds = make_windows(flat_pair(599), si, st, 599, 1, WindowPad::None);
        REQUIRE(ds.rows == 1);
        CHECK(ds.provenance[0].second == 299);
        CHECK(ds.targets[0] == doctest::Approx(2.0 * 299));
    }
    SUBCASE("N - W + 1 counting") {
        WindowedDataset ds = make_windows(flat_pair(1000), si, st, 599, 1, WindowPad::None);
        CHECK(ds.rows == 402);
    }
    SUBCASE("half-window padding keeps every position") {
        WindowedDataset ds =
            make_windows(flat_pair(1000), si, st, 599, 1, WindowPad::ZeroHalfWindow);
        CHECK(ds.rows == 1000);
        CHECK(ds.provenance.front().second == 0);
        CHECK(ds.provenance.back().second == 999);
    }
    SUBCASE("short series with no padding is an error") {
        CHECK_THROWS_AS(make_windows(flat_pair(9), si, st, 11, 1, WindowPad::None),
                        std::runtime_error);
    }
    SUBCASE("windows never span excised gaps") {
        AlignedPair p = flat_pair(40);
        p.breaks.push_back(20);
        WindowedDataset ds = make_windows(p, si, st, 11, 1, WindowPad::None);
        // windows starting in [10, 19] would span the break
        CHECK(ds.rows == 40 - 11 + 1 - 10);
        for (const auto& [src, target] : ds.provenance) {
            const int64_t a = target - 5;
            CHECK((a + 11 <= 20 || a >= 20));
        }
    }
    SUBCASE("window/target alignment: denormalized target equals the source value") {
        const NormStats st2{50.0, 7.0};
        AlignedPair p = flat_pair(300);
        WindowedDataset ds = make_windows(p, {10.0, 3.0}, st2, 99, 7, WindowPad::None);
        for (size_t r = 0; r < ds.rows; ++r) {
            const int64_t idx = ds.provenance[r].second;
            CHECK(denormalize(ds.targets[r], st2) ==
                  doctest::Approx(p.appliance[idx]).epsilon(1e-5));
        }
    }
}

TEST_CASE("split_dataset") {
    const NormStats s{0.0, 1.0};
    WindowedDataset ds = make_windows(flat_pair(100), s, s, 11, 1, WindowPad::None);  // 90 rows
    SUBCASE("floor split") {
        auto [train, test] = split_dataset(ds, 0.8);
        CHECK(train.rows == 72);
        CHECK(test.rows == 18);
        // chronological: last train provenance precedes first test provenance
        CHECK(train.provenance.back().second < test.provenance.front().second);
    }
    SUBCASE("10 rows, 0.8 gives 8/2; 5 rows gives 4/1") {
        WindowedDataset ten = make_windows(flat_pair(20), s, s, 11, 1, WindowPad::None);
        REQUIRE(ten.rows == 10);
        auto [a, b] = split_dataset(ten, 0.8);
        CHECK(a.rows == 8);
        CHECK(b.rows == 2);
        WindowedDataset five = make_windows(flat_pair(15), s, s, 11, 1, WindowPad::None);
        REQUIRE(five.rows == 5);
        auto [c, d] = split_dataset(five, 0.8);
        CHECK(c.rows == 4);
        CHECK(d.rows == 1);
    }
    SUBCASE("degenerate split") {
        WindowedDataset one = make_windows(flat_pair(11), s, s, 11, 1, WindowPad::None);
        REQUIRE(one.rows == 1);
        CHECK_THROWS_AS(split_dataset(one, 0.8), std::runtime_error);
    }
}

TEST_CASE("synth_generate") {
    SUBCASE("two constant profiles with zero noise") {
        // rectangular pulses that cover the whole span act as constants
        ApplianceProfile a{"a", SignatureKind::RectangularPulse, 5.0, 0.0, 1000, 1, 1000.0, 0};
        ApplianceProfile b{"b", SignatureKind::RectangularPulse, 7.0, 0.0, 1000, 1, 1000.0, 1};
        SynthScene s = synth_generate({a, b}, 200, 0.0, 42);
        for (double w : s.aggregate.watts) CHECK(w == 12.0);
    }
    SUBCASE("additivity is exact (sigma = 0)") {
        ApplianceProfile a{"a", SignatureKind::RectangularPulse, 100.0, 0.0, 7, 1, 30.0, 0};
        ApplianceProfile b{"b", SignatureKind::TwoLevelCycle, 80.0, 20.0, 12, 3, 20.0, 1};
        ApplianceProfile c{"c", SignatureKind::Ramp, 60.0, 0.0, 9, 1, 25.0, 2};
        SynthScene s = synth_generate({a, b, c}, 5000, 0.0, 7);
        for (size_t i = 0; i < 5000; ++i) {
            double sum = 0;
            for (const auto& [name, series] : s.appliances) sum += series.watts[i];
            CHECK(s.aggregate.watts[i] == sum);
        }
    }
    SUBCASE("recorded noise reconstructs the aggregate bitwise") {
        ApplianceProfile a{"a", SignatureKind::RectangularPulse, 300.0, 0.0, 15, 1, 10.0, 0};
        SynthScene s = synth_generate({a}, 20000, 10.0, 99);
        for (size_t i = 0; i < 20000; ++i) {
            double sum = s.appliances[0].second.watts[i] + s.noise[i];
            if (s.clamped[i]) {
                CHECK(sum < 0.0);
                CHECK(s.aggregate.watts[i] == 0.0);
            } else {
                CHECK(s.aggregate.watts[i] == sum);
            }
        }
    }
    SUBCASE("noise sigma moment matching on unclamped samples") {
        // always-on baseline keeps the aggregate far from the clamp at 0
        ApplianceProfile a{"a", SignatureKind::RectangularPulse, 500.0, 0.0, 100000, 1, 1000.0, 0};
        SynthScene s = synth_generate({a}, 100000, 10.0, 3);
        double mean = 0;
        size_t n = 0;
        for (size_t i = 0; i < s.noise.size(); ++i)
            if (!s.clamped[i]) {
                mean += s.aggregate.watts[i] - s.appliances[0].second.watts[i];
                ++n;
            }
        mean /= static_cast<double>(n);
        double var = 0;
        for (size_t i = 0; i < s.noise.size(); ++i)
            if (!s.clamped[i]) {
                const double d = s.aggregate.watts[i] - s.appliances[0].second.watts[i] - mean;
                var += d * d;
            }
        const double stddev = std::sqrt(var / static_cast<double>(n));
        CHECK(stddev > 9.8);
        CHECK(stddev < 10.2);
    }
    SUBCASE("deterministic in seed; appliances nonnegative") {
        ApplianceProfile a{"a", SignatureKind::Ramp, 40.0, 0.0, 13, 1, 15.0, 0};
        SynthScene s1 = synth_generate({a}, 3000, 5.0, 77);
        SynthScene s2 = synth_generate({a}, 3000, 5.0, 77);
        CHECK(s1.aggregate.watts == s2.aggregate.watts);
        CHECK(s1.noise == s2.noise);
        for (double w : s1.appliances[0].second.watts) CHECK(w >= 0.0);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(synth_generate({}, 10, 0.0, 1), std::invalid_argument);
        ApplianceProfile a{"a", SignatureKind::RectangularPulse, 10.0, 0.0, 5, 1, 5.0, 0};
        CHECK_THROWS_AS(synth_generate({a}, 0, 0.0, 1), std::invalid_argument);
        CHECK_THROWS_AS(synth_generate({a}, 10, -1.0, 1), std::invalid_argument);
    }
}

TEST_CASE("appliance_default_stats carries the standard table") {
    CHECK(appliance_default_stats("kettle")->mean == 700.0);
    CHECK(appliance_default_stats("kettle")->std == 1000.0);
    CHECK(appliance_default_stats("microwave")->std == 800.0);
    CHECK(appliance_default_stats("fridge")->mean == 200.0);
    CHECK(appliance_default_stats("dish washer")->std == 1000.0);
    CHECK(appliance_default_stats("washing machine")->mean == 400.0);
    CHECK(!appliance_default_stats("toaster").has_value());
}
