#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pcslink/channel.hpp"
#include "pcslink/metrics.hpp"

using namespace pcslink;

namespace {

std::vector<cdouble> points_of(const ShapedDistribution& d, std::span<const std::uint32_t> idx) {
    std::vector<cdouble> v;
    for (auto i : idx) v.push_back(d.constellation()[i]);
    return v;
}

} // namespace

TEST_CASE("ngmi") {
    CHECK(ngmi(4.5, 4.5, 6) == 1.0);
    CHECK(ngmi(5.4, 6.0, 6) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(ngmi(3.4, 4.0, 6) == doctest::Approx(0.9).epsilon(1e-15));
    // affine in gmi with slope 1/m
    for (double g : {0.0, 1.0, 2.5, 3.75}) {
        CHECK(ngmi(g + 1.5, 4.0, 6) - ngmi(g, 4.0, 6) == doctest::Approx(1.5 / 6).epsilon(1e-15));
    }
}

TEST_CASE("evm_percent") {
    const auto d = mb_distribution(0.0, square_qam(64));
    std::mt19937_64 rng(1);
    const auto tx = points_of(d, sample_symbols(d, 1000, rng));
    CHECK(evm_percent(tx, tx) == 0.0);
    std::vector<cdouble> rx;
    for (auto z : tx) rx.push_back(z + cdouble(0, 1) * z);
    CHECK(evm_percent(rx, tx) == doctest::Approx(100.0).epsilon(1e-12));
    CHECK_THROWS(evm_percent(std::span(rx).first(10), tx));
    std::vector<cdouble> zeros(tx.size());
    CHECK_THROWS(evm_percent(rx, zeros));
}

TEST_CASE("evm at 20 dB is 10 percent") {
    const auto d = mb_distribution(0.0, square_qam(64));
    std::mt19937_64 rng(2);
    const auto tx = points_of(d, sample_symbols(d, 100000, rng));
    const auto rx = awgn_transmit(tx, 20.0, 3);
    CHECK(std::abs(evm_percent(rx, tx) - 10.0) < 0.2);
}

TEST_CASE("snr_from_evm") {
    CHECK(snr_from_evm(100.0) == 0.0);
    CHECK(snr_from_evm(10.0) == doctest::Approx(20.0).epsilon(1e-15));
    CHECK(snr_from_evm(1.0) == doctest::Approx(40.0).epsilon(1e-15));
    CHECK_THROWS(snr_from_evm(0.0));
    CHECK_THROWS(snr_from_evm(-3.0));
}

TEST_CASE("LLR signs follow the label in the noiseless limit") {
    for (double h : {6.0, 4.0}) {
        const auto d = mb_for_entropy(h, square_qam(64));
        const auto llr = bitwise_llrs(d.constellation(), d, 1e-4);
        for (std::size_t i = 0; i < 64; ++i) {
            for (int j = 0; j < 6; ++j) {
                const int b = (d.tmpl().labels[i] >> (5 - j)) & 1;
                CHECK((llr[i * 6 + j] > 0) == (b == 0));
            }
        }
    }
}

TEST_CASE("LLR vanishes at points equidistant from both label sets") {
    const auto d = mb_distribution(0.0, square_qam(64));
    // bit 0 selects the sign of the in-phase level, bit 3 the sign of the quadrature level
    const std::vector<cdouble> rx{{0.0, 0.3}, {0.0, -0.7}, {0.2, 0.0}, {-0.9, 0.0}};
    const auto llr = bitwise_llrs(rx, d, 0.05);
    CHECK(std::abs(llr[0 * 6 + 0]) < 1e-12);
    CHECK(std::abs(llr[1 * 6 + 0]) < 1e-12);
    CHECK(std::abs(llr[2 * 6 + 3]) < 1e-12);
    CHECK(std::abs(llr[3 * 6 + 3]) < 1e-12);
}

TEST_CASE("LLR on a four-point template matches the definition") {
    const auto t = make_template({{1, 0}, {0, 1}, {-1, 0}, {0, -1}}, {0, 1, 3, 2});
    const std::vector<double> p{0.4, 0.3, 0.2, 0.1};
    const ShapedDistribution d(t, p, 0.0);
    const double n0 = 0.3;
    const std::vector<cdouble> rx{{0.3, 0.1}, {-1.2, 0.4}, {0.0, 0.0}, {0.5, -0.9}};
    const auto llr = bitwise_llrs(rx, d, n0);
    const auto llr_joint = bitwise_llrs_joint(rx, d, n0);
    for (std::size_t k = 0; k < rx.size(); ++k) {
        for (int j = 0; j < 2; ++j) {
            double s0 = 0.0, s1 = 0.0;
            for (std::size_t i = 0; i < 4; ++i) {
                const double w = p[i] * std::exp(-std::norm(rx[k] - d.constellation()[i]) / n0);
                (((t->labels[i] >> (1 - j)) & 1) ? s1 : s0) += w;
            }
            CHECK(std::abs(llr[k * 2 + j] - std::log(s0 / s1)) < 1e-9);
            CHECK(std::abs(llr_joint[k * 2 + j] - std::log(s0 / s1)) < 1e-9);
        }
    }
}

TEST_CASE("separable and joint LLRs agree") {
    const auto d = mb_for_entropy(4.5, square_qam(64));
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 0.8);
    std::vector<cdouble> rx(500);
    for (auto& z : rx) z = {g(rng), g(rng)};
    for (double n0 : {1e-3, 0.02, 0.5, 5.0}) {
        const auto a = bitwise_llrs(rx, d, n0);
        const auto b = bitwise_llrs_joint(rx, d, n0);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-9 * std::max(1.0, std::abs(b[i])));
    }
}

TEST_CASE("LLRs stay finite from -20 to 60 dB") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g(0.0, 3.0);
    for (double h : {2.0, 3.3, 6.0}) {
        const auto d = mb_for_entropy(h, square_qam(64));
        for (double snr = -20.0; snr <= 60.0; snr += 5.0) {
            std::vector<cdouble> rx(200);
            for (auto& z : rx) z = {g(rng), g(rng)};
            rx.push_back({1e3, -1e3});
            for (auto v : bitwise_llrs(rx, d, db_to_linear(-snr))) REQUIRE(std::isfinite(v));
            std::vector<std::uint32_t> tx(rx.size(), 0);
            REQUIRE(std::isfinite(gmi_from_samples(tx, rx, d, db_to_linear(-snr))));
        }
    }
}

TEST_CASE("noiseless GMI equals the entropy") {
    for (double h : {6.0, 5.0, 3.0}) {
        const auto d = mb_for_entropy(h, square_qam(64));
        std::mt19937_64 rng(9);
        const auto tx = sample_symbols(d, 20000, rng);
        const auto rx = points_of(d, tx);
        CHECK(std::abs(gmi_from_samples(tx, rx, d, 1e-6) - d.entropy_bits()) < 1e-6);
    }
}

TEST_CASE("quadrature oracle reproduces the frozen reference values") {
    CHECK(std::abs(oracle::uniform_qam_gmi(64, 10.0) - 3.16852010979) < 1e-6);
    CHECK(std::abs(oracle::uniform_qam_gmi(64, 20.0) - 5.80146178601) < 1e-6);
    CHECK(std::abs(oracle::uniform_qam_gmi(64, -10.0) - 0.107288099959) < 1e-6);
}

TEST_CASE("uniform 64QAM GMI against the integration oracle") {
    const auto d = mb_distribution(0.0, square_qam(64));
    CHECK(std::abs(simulate_awgn(d, 20.0, 100000, 1).gmi_bits - oracle::uniform_qam_gmi(64, 20.0)) < 0.05);
    CHECK(simulate_awgn(d, -10.0, 100000, 2).gmi_bits < 0.5);
    CHECK(simulate_awgn(d, 30.0, 100000, 3).gmi_bits >= 5.99);
}

TEST_CASE("GMI is non-decreasing in SNR") {
    const auto d = mb_for_entropy(5.0, square_qam(64));
    double prev = 0.0;
    for (double snr = 0.0; snr <= 30.0; snr += 2.0) {
        const auto r = simulate_awgn(d, snr, 20000, 17);
        CHECK(r.gmi_bits >= prev - 0.05);
        CHECK(r.gmi_bits <= d.entropy_bits() + 1e-6);
        CHECK(r.ngmi <= 1.0 + 1e-9);
        CHECK(r.ngmi >= 0.0);
        prev = r.gmi_bits;
    }
}

TEST_CASE("AWGN loop-back recovers the SNR through the EVM") {
    const auto d = mb_for_entropy(5.0, square_qam(64));
    for (double snr = 5.0; snr <= 25.0; snr += 5.0) {
        const auto r = simulate_awgn(d, snr, 100000, 23);
        CHECK(std::abs(r.snr_db - snr) < 0.3);
        CHECK(r.n_symbols == 100000);
    }
}

TEST_CASE("evaluate_block and report JSON") {
    const auto d = mb_for_entropy(4.0, square_qam(64));
    std::mt19937_64 rng(5);
    const auto tx = sample_symbols(d, 5000, rng);
    const auto rx = awgn_transmit(points_of(d, tx), 15.0, 6);
    const auto r = evaluate_block(tx, rx, d, db_to_linear(-15.0));
    CHECK(r.ngmi > 0.9);
    const auto j = to_json(r);
    CHECK(j.at("gmi_bits") == r.gmi_bits);
    CHECK(j.at("n_symbols") == 5000);
    CHECK_THROWS(evaluate_block(std::span(tx).first(10), rx, d, 0.1));
    CHECK_THROWS(bitwise_llrs(rx, d, 0.0));
}
