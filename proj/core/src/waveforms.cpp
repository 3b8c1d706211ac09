#include "mprd/waveforms.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mprd {

namespace {

constexpr double kPi = std::numbers::pi;

// PRBS-15 Fibonacci LFSR, polynomial x^15 + x^14 + 1. The next output bit is
// the XOR of the two top register bits; the register shifts left with the new
// bit entering at the bottom. Period 2^15 - 1 with any nonzero seed.
class Prbs15 {
  public:
    explicit Prbs15(std::uint32_t seed) : state_(seed & 0x7FFF) {
        if (state_ == 0)
            throw std::invalid_argument("generate_chip_sequence: seed must be nonzero mod 2^15");
    }

    int next_bit() {
        const std::uint32_t bit = ((state_ >> 14) ^ (state_ >> 13)) & 1u;
        state_ = ((state_ << 1) | bit) & 0x7FFF;
        return static_cast<int>(bit);
    }

  private:
    std::uint32_t state_;
};

}  // namespace

TimeGrid make_time_grid(double sample_rate, std::size_t n_samples) {
    if (!(sample_rate > 0.0))
        throw std::invalid_argument("make_time_grid: sample_rate must be positive");
    if (n_samples == 0)
        throw std::invalid_argument("make_time_grid: n_samples must be positive");
    return TimeGrid{sample_rate, n_samples};
}

ChipSequence generate_chip_sequence(std::uint32_t seed, std::size_t n_chips, double chip_rate) {
    if (n_chips == 0)
        throw std::invalid_argument("generate_chip_sequence: n_chips must be positive");
    if (!(chip_rate > 0.0))
        throw std::invalid_argument("generate_chip_sequence: chip_rate must be positive");

    Prbs15 lfsr(seed);
    ChipSequence seq;
    seq.chips.resize(n_chips);
    seq.chip_rate = chip_rate;
    seq.seed = seed;
    for (std::size_t i = 0; i < n_chips; ++i)
        seq.chips[i] = 2 * lfsr.next_bit() - 1;
    return seq;
}

Waveform chips_to_waveform(const ChipSequence& chips, const TimeGrid& grid,
                           double amplitude_volts) {
    const double spc_real = grid.sample_rate / chips.chip_rate;
    const double spc_rounded = std::round(spc_real);
    if (spc_rounded < 1.0 || std::abs(spc_real - spc_rounded) > 1e-9 * spc_rounded)
        throw std::invalid_argument(
            "chips_to_waveform: sample_rate must be an integer multiple of chip_rate");
    const std::size_t spc = static_cast<std::size_t>(spc_rounded);
    if (chips.chips.size() * spc != grid.n_samples)
        throw std::invalid_argument("chips_to_waveform: chips do not span the grid duration");

    Waveform w{grid, Eigen::VectorXd(grid.n_samples), "volts"};
    for (std::size_t i = 0; i < grid.n_samples; ++i)
        w.samples[static_cast<Eigen::Index>(i)] =
            amplitude_volts * static_cast<double>(chips.chips[i / spc]);
    return w;
}

namespace {

Eigen::VectorXcd spectrum_of(const Eigen::VectorXd& x) {
    Eigen::FFT<double> fft;
    Eigen::VectorXcd spectrum;
    fft.fwd(spectrum, x);
    return spectrum;
}

Eigen::VectorXd real_inverse(const Eigen::VectorXcd& spectrum) {
    Eigen::FFT<double> fft;
    Eigen::VectorXcd time;
    fft.inv(time, spectrum);
    return time.real();
}

Waveform apply_brickwall(const Waveform& w, double cutoff_hz) {
    const std::size_t n = w.grid.n_samples;
    const double df = w.grid.delta_f();
    // Keep bins whose |frequency| = min(k, n-k) * df is at or below the
    // cutoff; zero everything above, symmetrically, on the circular record.
    const std::size_t k_cut = static_cast<std::size_t>(std::floor(cutoff_hz / df + 1e-9));

    Eigen::VectorXcd spectrum = spectrum_of(w.samples);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t k_abs = std::min(k, n - k);
        if (k_abs > k_cut)
            spectrum[static_cast<Eigen::Index>(k)] = 0.0;
    }
    return Waveform{w.grid, real_inverse(spectrum), w.unit_label};
}

Waveform apply_windowed_sinc(const Waveform& w, double cutoff_hz, std::size_t taps) {
    if (taps % 2 == 0 || taps < 3)
        throw std::invalid_argument("filter: FIR taps must be odd and >= 3");
    const std::size_t n = w.grid.n_samples;
    if (taps > n)
        throw std::invalid_argument("filter: FIR taps exceed record length");

    // Hamming-windowed sinc, zero-centered on the circular record so the
    // filter is zero-phase; DC gain normalized to 1.
    const double fc = cutoff_hz / w.grid.sample_rate;  // cycles per sample
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(taps / 2);
    Eigen::VectorXd kernel = Eigen::VectorXd::Zero(n);
    double sum = 0.0;
    for (std::ptrdiff_t m = -half; m <= half; ++m) {
        const double window =
            0.54 + 0.46 * std::cos(kPi * static_cast<double>(m) / static_cast<double>(half));
        const double x = 2.0 * kPi * fc * static_cast<double>(m);
        const double sinc = (m == 0) ? 2.0 * fc : std::sin(x) / (kPi * static_cast<double>(m));
        const double h = sinc * window;
        kernel[static_cast<Eigen::Index>((m + static_cast<std::ptrdiff_t>(n)) % n)] = h;
        sum += h;
    }
    kernel /= sum;

    Eigen::VectorXcd spectrum = spectrum_of(w.samples);
    const Eigen::VectorXcd kernel_spectrum = spectrum_of(kernel);
    spectrum.array() *= kernel_spectrum.array();
    return Waveform{w.grid, real_inverse(spectrum), w.unit_label};
}

Waveform apply_filter(const Waveform& w, const FilterSpec& spec, const char* op_name) {
    if (!(spec.cutoff_hz > 0.0) || spec.cutoff_hz >= w.grid.nyquist())
        throw std::invalid_argument(std::string(op_name) +
                                    ": cutoff must lie in (0, Nyquist) of the waveform");
    switch (spec.kind) {
        case FilterKind::brickwall_fft:
            return apply_brickwall(w, spec.cutoff_hz);
        case FilterKind::windowed_sinc_fir:
            return apply_windowed_sinc(w, spec.cutoff_hz, spec.taps);
    }
    throw std::invalid_argument(std::string(op_name) + ": unknown filter kind");
}

}  // namespace

Waveform bandlimit(const Waveform& waveform, const FilterSpec& spec) {
    return apply_filter(waveform, spec, "bandlimit");
}

// digitizer.cpp delegates here so both stages share one filter definition.
Waveform detail_apply_filter(const Waveform& waveform, const FilterSpec& spec,
                             const char* op_name) {
    return apply_filter(waveform, spec, op_name);
}

bool is_on_grid(double frequency_hz, const TimeGrid& grid) {
    const double cycles = frequency_hz * grid.duration();
    return std::abs(cycles - std::round(cycles)) <= 1e-6 * std::max(1.0, std::abs(cycles));
}

Waveform synthesize_multitone(const std::vector<ToneSpec>& tones, const TimeGrid& grid) {
    for (std::size_t a = 0; a < tones.size(); ++a) {
        if (!is_on_grid(tones[a].frequency_hz, grid))
            throw std::invalid_argument("synthesize_multitone: tone " + std::to_string(a) +
                                        " frequency " + std::to_string(tones[a].frequency_hz) +
                                        " Hz is not a multiple of 1/duration");
        for (std::size_t b = a + 1; b < tones.size(); ++b)
            if (tones[a].frequency_hz == tones[b].frequency_hz)
                throw std::invalid_argument("synthesize_multitone: duplicate frequency " +
                                            std::to_string(tones[a].frequency_hz) + " Hz (tones " +
                                            std::to_string(a) + ", " + std::to_string(b) + ")");
    }

    Waveform w{grid, Eigen::VectorXd::Zero(grid.n_samples), "radians"};
    const double dt = grid.dt();
    for (const ToneSpec& tone : tones) {
        const double omega = 2.0 * kPi * tone.frequency_hz;
        for (std::size_t i = 0; i < grid.n_samples; ++i)
            w.samples[static_cast<Eigen::Index>(i)] +=
                tone.amplitude_rad * std::cos(omega * static_cast<double>(i) * dt + tone.phase_rad);
    }
    return w;
}

}  // namespace mprd
