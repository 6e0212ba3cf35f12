#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "doctest.h"
#include "pcslink/channel.hpp"
#include "pcslink/metrics.hpp"

using namespace pcslink;

namespace {

struct Moments {
    double mean = 0.0, var = 0.0;
};

Moments moments(const std::vector<double>& v) {
    Moments m;
    for (double x : v) m.mean += x / v.size();
    for (double x : v) m.var += (x - m.mean) * (x - m.mean) / (v.size() - 1);
    return m;
}

std::vector<double> snrs(const SnrTrace& t, std::optional<Weather> w = std::nullopt) {
    std::vector<double> v;
    for (const auto& e : t.entries) {
        if (!w || e.weather == *w) v.push_back(e.snr_db);
    }
    return v;
}

std::string temp_path(const char* name) { return (std::filesystem::temp_directory_path() / name).string(); }

} // namespace

TEST_CASE("degenerate noise gives a constant trace") {
    RainModelConfig c;
    c.clear_std_db = 0.0;
    c.rain_std_db = 0.0;
    c.rain_intervals.clear();
    const auto t = gen_trace(c, 1000.0);
    REQUIRE(t.size() == 40);
    for (const auto& e : t.entries) {
        CHECK(e.snr_db == c.clear_mean_db);
        CHECK(e.weather == Weather::Clear);
    }
}

TEST_CASE("rain everywhere shifts the mean by the drop") {
    RainModelConfig c;
    c.rain_intervals = {{0.0, 1e12}};
    c.clear_std_db = 0.0;
    c.rain_std_db = 0.0;
    for (const auto& e : gen_trace(c, 500.0).entries) {
        CHECK(e.snr_db == c.clear_mean_db - c.rain_mean_drop_db);
        CHECK(e.weather == Weather::Rain);
    }
    c.clear_std_db = 0.3;
    c.rain_std_db = 0.8;
    const auto m = moments(snrs(gen_trace(c, 25.0 * 20000)));
    CHECK(std::abs(m.mean - (c.clear_mean_db - c.rain_mean_drop_db)) < 0.05);
}

TEST_CASE("default three-hour trace") {
    const RainModelConfig c;
    const auto t = gen_trace(c, 10800.0);
    CHECK(t.size() == 432);
    CHECK(t.sampling_period_s == 25.0);
    CHECK_NOTHROW(t.validate());
    const auto rain = snrs(t, Weather::Rain);
    CHECK(static_cast<double>(rain.size()) / t.size() == doctest::Approx(0.25));
    const auto mc = moments(snrs(t, Weather::Clear));
    const auto mr = moments(rain);
    CHECK(std::abs(mc.mean - c.clear_mean_db) < 0.2);
    CHECK(std::abs(mr.mean - (c.clear_mean_db - c.rain_mean_drop_db)) < 0.4);
    CHECK(mr.var > mc.var);
    CHECK(gen_trace(c, 10800.0).entries == t.entries);
}

TEST_CASE("AR(1) lag-1 autocorrelation") {
    for (double rho : {0.0, 0.5, 0.7, 0.9}) {
        RainModelConfig c;
        c.rain_intervals.clear();
        c.ar1_rho = rho;
        const auto v = snrs(gen_trace(c, 25.0 * 10000));
        const auto m = moments(v);
        double acc = 0.0;
        for (std::size_t k = 1; k < v.size(); ++k) acc += (v[k] - m.mean) * (v[k - 1] - m.mean);
        const double r1 = acc / ((v.size() - 1) * m.var);
        CHECK(std::abs(r1 - rho) < 0.05);
        CHECK(std::sqrt(m.var) == doctest::Approx(c.clear_std_db).epsilon(0.1));
    }
}

TEST_CASE("regime variance ordering") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        RainModelConfig c;
        c.seed = rng();
        c.clear_std_db = std::uniform_real_distribution<double>(0.1, 0.6)(rng);
        c.rain_std_db = c.clear_std_db + std::uniform_real_distribution<double>(0.2, 1.0)(rng);
        c.rain_intervals = {{25.0 * 2000, 25.0 * 4000}};
        const auto t = gen_trace(c, 25.0 * 6000);
        CHECK(moments(snrs(t, Weather::Rain)).var >= moments(snrs(t, Weather::Clear)).var);
    }
}

TEST_CASE("rain model validation and JSON") {
    RainModelConfig c;
    c.ar1_rho = 1.0;
    CHECK_THROWS(c.validate());
    c = {};
    c.rain_std_db = 0.1;
    CHECK_THROWS(c.validate());
    c = {};
    c.rain_intervals = {{100.0, 50.0}};
    CHECK_THROWS(c.validate());
    c = {};
    c.rain_intervals = {{0.0, 100.0}, {50.0, 150.0}};
    CHECK_THROWS(c.validate());
    c = {};
    const auto d = rain_config_from_json(to_json(c));
    CHECK(d.clear_mean_db == c.clear_mean_db);
    CHECK(d.rain_intervals == c.rain_intervals);
    CHECK(d.seed == c.seed);
    CHECK(rain_config_from_json(nlohmann::json::parse(R"({"clear_mean_db": 18})")).clear_mean_db == 18.0);
    CHECK_THROWS(rain_config_from_json(nlohmann::json::parse(R"({"ar1_rho": -0.2})")));
    CHECK_THROWS(gen_trace(RainModelConfig{}, 0.0));
}

TEST_CASE("trace CSV round trip") {
    const auto t = gen_trace(RainModelConfig{}, 10800.0);
    const auto path = temp_path("pcslink_trace_test.csv");
    save_trace(t, path);
    const auto u = load_trace(path);
    std::remove(path.c_str());
    CHECK(u.entries == t.entries);
    CHECK(u.sampling_period_s == t.sampling_period_s);
}

TEST_CASE("trace CSV errors") {
    SUBCASE("NaN row names its line") {
        try {
            parse_trace_csv("t_s,snr_db,weather\n0,15,clear\n25,NaN,clear\n");
            FAIL("expected an error");
        } catch (const TraceError& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }
    SUBCASE("empty file") {
        const auto path = temp_path("pcslink_empty_trace.csv");
        std::ofstream(path).close();
        try {
            load_trace(path);
            FAIL("expected an error");
        } catch (const TraceError& e) {
            CHECK(std::string(e.what()).find("empty trace") != std::string::npos);
        }
        std::remove(path.c_str());
        CHECK_THROWS_WITH(parse_trace_csv("t_s,snr_db,weather\n"), "empty trace");
    }
    CHECK_THROWS_AS(parse_trace_csv("time,snr,weather\n0,15,clear\n"), TraceError);
    CHECK_THROWS_AS(parse_trace_csv("t_s,snr_db,weather\n0,15,fog\n"), TraceError);
    CHECK_THROWS_AS(parse_trace_csv("t_s,snr_db,weather\n0,15\n"), TraceError);
    CHECK_THROWS_AS(parse_trace_csv("t_s,snr_db,weather\n25,15,clear\n0,15,clear\n"), TraceError);
    CHECK_THROWS_AS(parse_trace_csv("t_s,snr_db,weather\n0,15,clear\n25,inf,rain\n"), TraceError);
    CHECK_THROWS(load_trace(temp_path("pcslink_no_such_trace.csv")));
    const auto t = parse_trace_csv("t_s,snr_db,weather\r\n0,15.5,clear\r\n10,13,rain\r\n");
    CHECK(t.size() == 2);
    CHECK(t.sampling_period_s == 10.0);
    CHECK(t.entries[1].weather == Weather::Rain);
}

TEST_CASE("awgn_transmit") {
    std::vector<cdouble> x(100000, cdouble(0.6, -0.8));
    SUBCASE("noiseless limit") {
        const auto y = awgn_transmit(x, 200.0, 1);
        for (std::size_t k = 0; k < x.size(); ++k) CHECK(std::abs(y[k] - x[k]) < 1e-9);
    }
    SUBCASE("unit noise power at 0 dB") {
        const auto y = awgn_transmit(x, 0.0, 2);
        double p = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) p += std::norm(y[k] - x[k]) / x.size();
        CHECK(std::abs(p - 1.0) < 0.02);
    }
    SUBCASE("deterministic per seed") {
        CHECK(awgn_transmit(x, 10.0, 3) == awgn_transmit(x, 10.0, 3));
        CHECK(awgn_transmit(x, 10.0, 3) != awgn_transmit(x, 10.0, 4));
    }
}

TEST_CASE("AWGN calibration through the EVM") {
    const auto d = mb_for_entropy(4.5, square_qam(64));
    std::mt19937_64 rng(12);
    std::vector<cdouble> x;
    for (auto i : sample_symbols(d, 100000, rng)) x.push_back(d.constellation()[i]);
    for (double s = 5.0; s <= 25.0; s += 2.5) {
        CHECK(std::abs(snr_from_evm(evm_percent(awgn_transmit(x, s, 13), x)) - s) < 0.3);
    }
}

TEST_CASE("impairments") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    DualPol s;
    for (int k = 0; k < 4096; ++k) {
        s.x.push_back({g(rng), g(rng)});
        s.y.push_back({g(rng), g(rng)});
    }
    const double fs = 128e9;
    SUBCASE("zero configuration is the identity") {
        const auto o = apply_impairments(s, ImpairmentConfig::none(), fs);
        CHECK(o.x == s.x);
        CHECK(o.y == s.y);
        auto c = ImpairmentConfig::none();
        c.seed = 77;
        CHECK(apply_impairments(s, c, fs).x == s.x);
    }
    SUBCASE("rotation by pi/2 swaps the polarizations") {
        auto c = ImpairmentConfig::none();
        c.pol_rotation_rad = kPi / 2;
        const auto o = apply_impairments(s, c, fs);
        for (std::size_t k = 0; k < s.size(); ++k) {
            CHECK(std::abs(o.x[k] + s.y[k]) < 1e-12);
            CHECK(std::abs(o.y[k] - s.x[k]) < 1e-12);
        }
    }
    SUBCASE("frequency offset is a linear phase ramp") {
        auto c = ImpairmentConfig::none();
        c.freq_offset_hz = 1e9;
        const auto o = apply_impairments(s, c, fs);
        for (std::size_t k : {1ul, 100ul, 4000ul}) {
            const double expect = std::remainder(2 * kPi * 1e9 * k / fs, 2 * kPi);
            CHECK(std::abs(std::arg(o.x[k] / s.x[k]) - expect) < 1e-9);
        }
    }
    SUBCASE("IQ imbalance acts on the quadrature rail") {
        auto c = ImpairmentConfig::none();
        c.iq_amplitude_imbalance = 0.05;
        const auto o = apply_impairments(s, c, fs);
        for (std::size_t k = 0; k < 10; ++k) {
            CHECK(o.x[k].real() == s.x[k].real());
            CHECK(o.x[k].imag() == doctest::Approx(1.05 * s.x[k].imag()));
        }
    }
}

TEST_CASE("Wiener phase noise variance") {
    const double fs = 128e9, lw = 200e3;
    const std::size_t n = 1000;
    DualPol s;
    s.x.assign(n + 1, cdouble(1, 0));
    s.y.assign(n + 1, cdouble(1, 0));
    std::vector<double> d;
    for (std::uint64_t seed = 0; seed < 2000; ++seed) {
        auto c = ImpairmentConfig::none();
        c.combined_linewidth_hz = lw;
        c.seed = seed;
        const auto o = apply_impairments(s, c, fs);
        d.push_back(std::arg(o.x[n] / o.x[0]));
    }
    double v = 0.0;
    for (double x : d) v += x * x / d.size();
    const double expect = 2 * kPi * lw * n / fs;
    CHECK(std::abs(v - expect) < 0.1 * expect);
}

TEST_CASE("fractional delay") {
    std::vector<double> v(200);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::sin(0.05 * k);
    CHECK(fractional_delay(v, 0.0) == v);
    const auto one = fractional_delay(v, 1.0);
    for (std::size_t k = 1; k < v.size(); ++k) CHECK(one[k] == v[k - 1]);
    const auto half = fractional_delay(v, 0.5);
    for (std::size_t k = 40; k < 160; ++k) CHECK(half[k] == doctest::Approx(std::sin(0.05 * (k - 0.5))).epsilon(1e-4));
}
