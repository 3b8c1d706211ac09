#include "mprd/photonic_frontend.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace mprd;

namespace {

constexpr double kPi = std::numbers::pi;

Waveform constant_wave(const TimeGrid& grid, double value, const char* unit) {
    return Waveform{grid, Eigen::VectorXd::Constant(grid.n_samples, value), unit};
}

struct ChainFixture {
    TimeGrid grid = make_time_grid(10e9, 20000);
    ChipSequence chips = generate_chip_sequence(0x7FFF, 1000, 500e6);
    Waveform chip_wave;  // exact +/-1, chip-aligned

    ChainFixture() { chip_wave = chips_to_waveform(chips, grid, 1.0); }

    Waveform tones(double total_depth_rad) const {
        const double a = total_depth_rad / 4.0;
        return synthesize_multitone(
            {{20e6, a, 0.0}, {45e6, a, 0.0}, {70e6, a, 0.0}, {100e6, a, 0.0}}, grid);
    }
};

}  // namespace

TEST_SUITE("photonic_frontend") {

TEST_CASE("mzm transfer curve landmark points") {
    const TimeGrid grid = make_time_grid(1.0, 4);
    const Waveform zero_signal = constant_wave(grid, 0.0, "radians");
    const ModulatorParams params{3.5, 3.5, 1.75};

    // v_dc + prbs = 0: maximum transmission
    Waveform prbs = constant_wave(grid, -3.5, "volts");
    CHECK(mzm_output(prbs, zero_signal, params).samples[0] == doctest::Approx(1.0).epsilon(1e-12));

    // v_dc = v_pi, prbs = 0: minimum transmission point
    prbs = constant_wave(grid, 0.0, "volts");
    CHECK(std::abs(mzm_output(prbs, zero_signal, params).samples[0]) <= 1e-12);

    // v_dc = v_pi, prbs = +v_pi/2: quadrature
    prbs = constant_wave(grid, 1.75, "volts");
    CHECK(mzm_output(prbs, zero_signal, params).samples[0] ==
          doctest::Approx(0.5).epsilon(1e-12));

    const Waveform wrong_grid = constant_wave(make_time_grid(1.0, 5), 0.0, "radians");
    CHECK_THROWS_AS(mzm_output(prbs, wrong_grid, params), std::invalid_argument);
}

TEST_CASE("mzm output stays inside [0, 1] for arbitrary drives") {
    const TimeGrid grid = make_time_grid(1e9, 503);
    const ModulatorParams params{3.5, 3.5, 1.75};
    for (std::uint32_t seed : {11u, 12u, 13u, 14u}) {
        const Waveform prbs = mprd::test::random_waveform(grid, seed, 10.0);
        const Waveform signal = mprd::test::random_waveform(grid, seed + 100, 3.0);
        const Waveform out = mzm_output(prbs, signal, params);
        CHECK(out.samples.minCoeff() >= 0.0);
        CHECK(out.samples.maxCoeff() <= 1.0);
    }
}

TEST_CASE("small-signal model plug-in values") {
    const TimeGrid grid = make_time_grid(1.0, 4);
    const ModulatorParams quadrature{3.5, 3.5, 1.75};  // alpha = pi/2

    SUBCASE("alpha = pi/2 reduces to the ideal mixing form") {
        const Waveform s = constant_wave(grid, 1.0, "chips");
        const Waveform x = constant_wave(grid, 0.1, "radians");
        CHECK(mzm_small_signal(s, x, quadrature).samples[0] ==
              doctest::Approx(0.55).epsilon(1e-14));
    }

    SUBCASE("signal off leaves the bias baseline (1 - cos a)/2") {
        const ModulatorParams low = ModulatorParams::at_ratio(3.5, 0.243);
        const Waveform s = constant_wave(grid, -1.0, "chips");
        const Waveform x = constant_wave(grid, 0.0, "radians");
        const double expected = 0.5 * (1.0 - std::cos(low.alpha()));
        CHECK(mzm_small_signal(s, x, low).samples[0] == doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("ideal mixing identity at the quadrature drive") {
    // With exact chips at v_code = v_pi/2 and bias v_pi the exact transfer
    // collapses to E = 1/2 + (1/2) s sin(x), within |x|^3/6 of the linear
    // mixing form.
    const ChainFixture fx;
    const ModulatorParams params = ModulatorParams::at_ratio(3.5, 0.5);
    const Waveform x = fx.tones(0.2);
    const Waveform prbs = chips_to_waveform(fx.chips, fx.grid, params.v_code);
    const Waveform exact = mzm_output(prbs, x, params);

    for (Eigen::Index i = 0; i < exact.samples.size(); ++i) {
        const double s = fx.chip_wave.samples[i];
        const double xi = x.samples[i];
        REQUIRE(std::abs(exact.samples[i] - (0.5 + 0.5 * s * std::sin(xi))) <= 1e-12);
        REQUIRE(std::abs(exact.samples[i] - (0.5 + 0.5 * s * xi)) <=
                std::abs(xi * xi * xi) / 6.0 + 1e-12);
    }
}

TEST_CASE("small-signal expansion error is third order in the drive depth") {
    const ChainFixture fx;
    for (double ratio : {0.5, 0.432, 0.243}) {
        const ModulatorParams params = ModulatorParams::at_ratio(3.5, ratio);
        const Waveform prbs = chips_to_waveform(fx.chips, fx.grid, params.v_code);

        auto max_deviation = [&](double depth) {
            const Waveform x = fx.tones(depth);
            const Waveform exact = mzm_output(prbs, x, params);
            const Waveform model = mzm_small_signal(fx.chip_wave, x, params);
            return (exact.samples - model.samples).lpNorm<Eigen::Infinity>();
        };

        const double dev_02 = max_deviation(0.2);
        const double dev_01 = max_deviation(0.1);
        CHECK(dev_02 <= 0.2 * 0.2 * 0.2);
        CHECK(dev_02 / dev_01 >= 6.0);  // ideal cubic scaling gives 8
    }
}

TEST_CASE("negating the chips flips only the mixed term") {
    const ChainFixture fx;
    const ModulatorParams params = ModulatorParams::at_ratio(3.5, 0.35);
    const Waveform x = fx.tones(0.2);
    Waveform negated = fx.chip_wave;
    negated.samples = -negated.samples;

    const Waveform plus = mzm_small_signal(fx.chip_wave, x, params);
    const Waveform minus = mzm_small_signal(negated, x, params);
    const double cos_a = std::cos(params.alpha());
    for (Eigen::Index i = 0; i < plus.samples.size(); ++i) {
        const double xi = x.samples[i];
        const double even_part = 2.0 * (0.25 * cos_a * xi * xi - 0.5 * cos_a + 0.5);
        REQUIRE(std::abs(plus.samples[i] + minus.samples[i] - even_part) <= 1e-14);
    }
}

TEST_CASE("bias-point coefficients move monotonically with v_code") {
    double previous_gain = 0.0;
    double previous_harmonic = 1.0;
    for (double ratio : {0.1, 0.2, 0.3, 0.4, 0.5}) {
        const ModulatorParams params = ModulatorParams::at_ratio(3.5, ratio);
        const double gain = 0.5 * std::sin(params.alpha());
        const double harmonic = 0.25 * std::cos(params.alpha());
        CHECK(gain > previous_gain);
        CHECK(harmonic < previous_harmonic);
        previous_gain = gain;
        previous_harmonic = harmonic;
    }
    CHECK(0.25 * std::cos(ModulatorParams::at_ratio(3.5, 0.5).alpha()) ==
          doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("drive-varying small-signal form matches the fixed-alpha form on exact chips") {
    const ChainFixture fx;
    const ModulatorParams params = ModulatorParams::at_ratio(3.5, 0.243);
    const Waveform x = fx.tones(0.2);
    const Waveform drive = chips_to_waveform(fx.chips, fx.grid, params.v_code);

    const Waveform fixed = mzm_small_signal(fx.chip_wave, x, params);
    const Waveform varying = mzm_small_signal_drive(drive, x, params);
    CHECK((fixed.samples - varying.samples).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("photodetect DC removal and determinism") {
    const TimeGrid grid = make_time_grid(10e9, 20000);
    const PdParams pd{2.0, true};
    const NoiseSpec noiseless;

    SUBCASE("constant optical input maps to zero") {
        const Waveform constant = constant_wave(grid, 0.7, "normalized intensity");
        const Waveform out = photodetect(constant, pd, noiseless);
        CHECK(out.samples.lpNorm<Eigen::Infinity>() <= 1e-12);
    }

    SUBCASE("noiseless AC-coupled output has zero mean and is deterministic") {
        const Waveform optical = mprd::test::random_waveform(grid, 77u, 0.5);
        const Waveform a = photodetect(optical, pd, noiseless);
        const Waveform b = photodetect(optical, pd, noiseless);
        CHECK(a.samples == b.samples);
        CHECK(std::abs(a.samples.mean()) <= 1e-13);
    }

    SUBCASE("dc-coupled keeps the mean") {
        const Waveform constant = constant_wave(grid, 0.5, "normalized intensity");
        const Waveform out = photodetect(constant, PdParams{2.0, false}, noiseless);
        CHECK(out.samples[0] == doctest::Approx(1.0));
    }
}

TEST_CASE("thermal noise hits the configured variance") {
    const TimeGrid grid = make_time_grid(10e9, 20000);
    const PdParams pd{1.0, true};
    const Waveform optical = constant_wave(grid, 0.5, "normalized intensity");

    const double target_sigma = 3e-3;
    NoiseSpec noise;
    noise.c_thermal = target_sigma * target_sigma;
    noise.seed = 2024;

    const Waveform noiseless_out = photodetect(optical, pd, NoiseSpec{});
    const Waveform noisy_out = photodetect(optical, pd, noise);
    const Eigen::VectorXd delta = noisy_out.samples - noiseless_out.samples;
    const double sample_variance =
        (delta.array() - delta.mean()).square().sum() / static_cast<double>(delta.size() - 1);
    CHECK(sample_variance == doctest::Approx(noise.c_thermal).epsilon(0.10));

    SUBCASE("same seed reproduces the draw, different seed does not") {
        const Waveform again = photodetect(optical, pd, noise);
        CHECK(again.samples == noisy_out.samples);
        NoiseSpec other = noise;
        other.seed = 2025;
        CHECK(photodetect(optical, pd, other).samples != noisy_out.samples);
    }

    SUBCASE("negative coefficients are rejected") {
        NoiseSpec bad;
        bad.c_shot = -1.0;
        CHECK_THROWS_AS(photodetect(optical, pd, bad), std::invalid_argument);
    }
}

}  // TEST_SUITE
