#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace mprd {

/// Uniform sampling grid shared by every waveform in a simulation run.
struct TimeGrid {
    double sample_rate = 0.0;  // samples per second
    std::size_t n_samples = 0;

    double duration() const { return static_cast<double>(n_samples) / sample_rate; }
    double dt() const { return 1.0 / sample_rate; }
    double nyquist() const { return 0.5 * sample_rate; }
    /// Discrete frequency resolution of the record, 1 / duration.
    double delta_f() const { return sample_rate / static_cast<double>(n_samples); }

    bool operator==(const TimeGrid&) const = default;
};

TimeGrid make_time_grid(double sample_rate, std::size_t n_samples);

/// Real-valued uniformly sampled time series. The unit label is free text
/// ("volts", "radians", "normalized intensity") and names the stage the
/// waveform belongs to; it never affects the numerics.
struct Waveform {
    TimeGrid grid;
    Eigen::VectorXd samples;
    std::string unit_label;

    double energy() const { return samples.squaredNorm(); }
};

/// +/-1 chip stream with its rate and the seed it was generated from.
struct ChipSequence {
    std::vector<int> chips;  // every entry is +1 or -1
    double chip_rate = 0.0;  // chips per second
    std::uint32_t seed = 0;
};

/// Deterministic PRBS-15 chip generator (LFSR x^15 + x^14 + 1, nonzero
/// 15-bit seed). Output bit b maps to chip 2b - 1. The same seed always
/// reproduces the same sequence bit-for-bit.
ChipSequence generate_chip_sequence(std::uint32_t seed, std::size_t n_chips, double chip_rate);

struct ToneSpec {
    double frequency_hz = 0.0;
    double amplitude_rad = 0.0;  // peak phase deviation contributed by this tone
    double phase_rad = 0.0;
};

enum class FilterKind {
    brickwall_fft,      // exact mask on the discrete spectrum (circular)
    windowed_sinc_fir,  // Hamming-windowed sinc, applied circularly (zero phase)
};

struct FilterSpec {
    FilterKind kind = FilterKind::brickwall_fft;
    double cutoff_hz = 0.0;
    std::size_t taps = 201;  // FIR only, must be odd
};

/// Non-return-to-zero drive: sample i takes amplitude_volts * chips[i / spc]
/// where spc = sample_rate / chip_rate must be an integer and the chips must
/// span the grid exactly.
Waveform chips_to_waveform(const ChipSequence& chips, const TimeGrid& grid, double amplitude_volts);

/// Low-pass filters a waveform in place of an analog bandwidth limit.
/// Brickwall zeroes every discrete-frequency bin strictly above the cutoff;
/// bins at or below the cutoff pass untouched. The FIR variant attenuates
/// per its window design. Output is real-valued on the same grid.
Waveform bandlimit(const Waveform& waveform, const FilterSpec& spec);

/// samples_i = sum_k amplitude_k * cos(2 pi f_k t_i + phase_k), in radians of
/// phase deviation. All frequencies must be on-grid and distinct.
Waveform synthesize_multitone(const std::vector<ToneSpec>& tones, const TimeGrid& grid);

/// True when frequency_hz is an integer multiple of the record's 1/duration.
bool is_on_grid(double frequency_hz, const TimeGrid& grid);

}  // namespace mprd
