#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "pcslink/airlut.hpp"
#include "pcslink/metrics.hpp"

using namespace pcslink;

namespace {

AirTable small_table() {
    AirTable t;
    t.snr_grid_db = {0.0, 10.0, 20.0, 30.0};
    t.air_values = {0.0, 8.0, 11.0, 12.0};
    return t;
}

} // namespace

TEST_CASE("parse_grid") {
    const auto g = parse_grid("0:30:0.25");
    REQUIRE(g.size() == 121);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 30.0);
    CHECK(g[37] == 9.25);
    CHECK(parse_grid("-10:30:1").size() == 41);
    CHECK_THROWS(parse_grid("0:30"));
    CHECK_THROWS(parse_grid("0:x:1"));
    CHECK_THROWS(parse_grid("5:0:1"));
    CHECK_THROWS(parse_grid("0:5:0"));
}

TEST_CASE("rate law is exact") {
    const RatePlan plan;
    CHECK(plan.net_symbol_rate() == Rational(50'000'000'000LL));
    CHECK(net_bit_rate(12.0, plan) == 600e9);
    CHECK(net_bit_rate(8.0, plan) == 400e9);
    CHECK(net_bit_rate(10.0, plan) == 500e9);
    CHECK(net_bit_rate(0.0, plan) == 0.0);
    CHECK(net_bit_rate(9.3, plan) == doctest::Approx(465e9).epsilon(1e-15));
    CHECK(air_for_rate(400e9, plan) == 8.0);
    CHECK(air_for_rate(500e9, plan) == 10.0);
    CHECK(air_for_rate(600e9, plan) == 12.0);
    CHECK(plan.max_air(64) == 12.0);
    CHECK_THROWS(net_bit_rate(12.5, plan));
    CHECK_THROWS(net_bit_rate(-1.0, plan));
    CHECK_THROWS(air_for_rate(700e9, plan));
}

TEST_CASE("rate law round trip") {
    const RatePlan plan;
    for (int k = 0; k <= 1200; ++k) {
        const double a = k * 0.01;
        CHECK(std::abs(air_for_rate(net_bit_rate(a, plan), plan) - a) < 1e-12);
    }
}

TEST_CASE("lookup_air") {
    const auto t = small_table();
    CHECK(lookup_air(t, 10.0) == 8.0);
    CHECK(lookup_air(t, 20.0) == 11.0);
    CHECK(lookup_air(t, 15.0) == 9.5);
    CHECK(lookup_air(t, 25.0) == 11.5);
    CHECK(lookup_air(t, -5.0) == 0.0);
    CHECK(lookup_air(t, 45.0) == 12.0);
    double prev = 0.0;
    for (double s = -5.0; s <= 35.0; s += 0.1) {
        const double a = lookup_air(t, s);
        CHECK(a >= prev);
        prev = a;
    }
}

TEST_CASE("table validation") {
    auto t = small_table();
    CHECK_NOTHROW(t.validate());
    t.air_values[2] = 7.0;
    CHECK_THROWS(t.validate());
    t = small_table();
    t.air_values[3] = 12.5;
    CHECK_THROWS(t.validate());
    t = small_table();
    t.snr_grid_db[2] = 10.0;
    CHECK_THROWS(t.validate());
    t.snr_grid_db = {1.0};
    t.air_values = {1.0};
    CHECK_THROWS(t.validate());
}

TEST_CASE("table end points") {
    McConfig mc;
    mc.symbols = 20000;
    const auto t = build_air_table(0.9, square_qam(64), {-10.0, 30.0}, mc);
    CHECK(t.air_values[0] == 0.0);
    CHECK(t.air_values[1] == 12.0);
    const auto uni = mb_distribution(0.0, square_qam(64));
    CHECK(simulate_awgn(uni, 30.0, 20000, 77).ngmi >= 0.9);
    const auto floor = mb_for_entropy(2.0, square_qam(64));
    CHECK(simulate_awgn(floor, -10.0, 20000, 78).ngmi < 0.9);
}

TEST_CASE("table is monotone, bounded and deterministic") {
    McConfig mc;
    mc.symbols = 10000;
    mc.seed = 5;
    const auto grid = parse_grid("6:16:2");
    const auto a = build_air_table(0.9, square_qam(64), grid, mc);
    const auto b = build_air_table(0.9, square_qam(64), grid, mc);
    CHECK(a.air_values == b.air_values);
    CHECK_NOTHROW(a.validate());
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(a.air_values[i] >= a.air_values[i - 1]);
    CHECK(a.air_values.front() > 4.0);
    CHECK(a.air_values.back() < 12.0);
    mc.seed = 6;
    CHECK(build_air_table(0.9, square_qam(64), grid, mc).air_values != a.air_values);
}

TEST_CASE("threshold consistency at one grid point") {
    const auto tmpl = square_qam(64);
    McConfig mc;
    mc.symbols = 50000;
    const double h = max_entropy_for_threshold(14.0, 0.9, tmpl, mc.symbols, 3, mc.entropy_resolution);
    REQUIRE(h > 2.0);
    REQUIRE(h < 6.0);
    CHECK(simulate_awgn(mb_for_entropy(h, tmpl), 14.0, 50000, 901).ngmi >= 0.89);
    CHECK(simulate_awgn(mb_for_entropy(h + 0.1, tmpl), 14.0, 50000, 902).ngmi < 0.91);
}

TEST_CASE("table JSON round trip") {
    auto t = small_table();
    t.mc_symbols = 1234;
    t.seed = 99;
    const auto j = to_json(t);
    CHECK(j.at("ngmi_th") == 0.9);
    CHECK(j.at("M") == 64);
    const auto path = (std::filesystem::temp_directory_path() / "pcslink_lut_test.json").string();
    save_air_table(t, path);
    const auto u = load_air_table(path);
    std::remove(path.c_str());
    CHECK(u.snr_grid_db == t.snr_grid_db);
    CHECK(u.air_values == t.air_values);
    CHECK(u.mc_symbols == 1234);
    CHECK(u.seed == 99);
    CHECK_THROWS(load_air_table(path));
    auto bad = j;
    bad["air"] = {0.0, 9.0, 8.0, 12.0};
    CHECK_THROWS(air_table_from_json(bad));
}
