#include "mprd/photonic_frontend.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace mprd {

namespace {

constexpr double kPi = std::numbers::pi;

void require_same_grid(const Waveform& a, const Waveform& b, const char* op_name) {
    if (!(a.grid == b.grid))
        throw std::invalid_argument(std::string(op_name) + ": waveforms must share one grid");
}

// Box-Muller on top of mt19937_64. std::normal_distribution's output is
// implementation-defined, which would break record-level reproducibility
// across standard libraries; this keeps noise draws bit-stable everywhere.
class GaussianDraw {
  public:
    explicit GaussianDraw(std::uint64_t seed) : engine_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        spare_ = radius * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        return radius * std::cos(2.0 * kPi * u2);
    }

  private:
    double uniform() {
        // 53-bit mantissa in [0, 1)
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace

double ModulatorParams::alpha() const { return kPi * v_code / v_pi; }

ModulatorParams ModulatorParams::at_ratio(double v_pi, double code_ratio) {
    return ModulatorParams{v_pi, v_pi, code_ratio * v_pi};
}

void validate(const ModulatorParams& params) {
    if (!(params.v_pi > 0.0))
        throw std::invalid_argument("modulator.v_pi_volts must be positive");
    if (!(params.v_code > 0.0) || params.v_code > 0.5 * params.v_pi)
        throw std::invalid_argument("modulator.v_code_volts must lie in (0, v_pi/2]");
}

void validate(const NoiseSpec& noise) {
    if (noise.c_thermal < 0.0 || noise.c_shot < 0.0 || noise.c_rin < 0.0)
        throw std::invalid_argument("noise coefficients must be non-negative");
}

Waveform mzm_output(const Waveform& prbs_drive, const Waveform& signal_drive,
                    const ModulatorParams& params) {
    require_same_grid(prbs_drive, signal_drive, "mzm_output");
    const double pi_over_vpi = kPi / params.v_pi;

    Waveform out{prbs_drive.grid, Eigen::VectorXd(prbs_drive.grid.n_samples),
                 "normalized intensity"};
    for (Eigen::Index i = 0; i < out.samples.size(); ++i)
        out.samples[i] =
            0.5 + 0.5 * std::cos(pi_over_vpi * (params.v_dc + prbs_drive.samples[i]) +
                                 signal_drive.samples[i]);
    return out;
}

Waveform mzm_small_signal(const Waveform& chip_wave, const Waveform& signal_drive,
                          const ModulatorParams& params) {
    require_same_grid(chip_wave, signal_drive, "mzm_small_signal");
    const double a = params.alpha();
    const double mixed_gain = 0.5 * std::sin(a);
    const double harmonic_gain = 0.25 * std::cos(a);
    const double baseline = -0.5 * std::cos(a) + 0.5;

    Waveform out{chip_wave.grid, Eigen::VectorXd(chip_wave.grid.n_samples),
                 "normalized intensity"};
    for (Eigen::Index i = 0; i < out.samples.size(); ++i) {
        const double s = chip_wave.samples[i];
        const double x = signal_drive.samples[i];
        out.samples[i] = mixed_gain * s * x + harmonic_gain * x * x + baseline;
    }
    return out;
}

Waveform mzm_small_signal_drive(const Waveform& prbs_drive, const Waveform& signal_drive,
                                const ModulatorParams& params) {
    require_same_grid(prbs_drive, signal_drive, "mzm_small_signal_drive");
    const double pi_over_vpi = kPi / params.v_pi;

    Waveform out{prbs_drive.grid, Eigen::VectorXd(prbs_drive.grid.n_samples),
                 "normalized intensity"};
    for (Eigen::Index i = 0; i < out.samples.size(); ++i) {
        const double theta = pi_over_vpi * prbs_drive.samples[i];
        const double x = signal_drive.samples[i];
        out.samples[i] =
            0.5 * std::sin(theta) * x + 0.25 * std::cos(theta) * x * x - 0.5 * std::cos(theta) + 0.5;
    }
    return out;
}

Waveform photodetect(const Waveform& optical, const PdParams& pd, const NoiseSpec& noise) {
    validate(noise);
    const double mean_intensity = optical.samples.mean();

    Waveform out{optical.grid, Eigen::VectorXd(optical.grid.n_samples), "volts"};
    if (pd.ac_coupled)
        out.samples = pd.gain * (optical.samples.array() - mean_intensity);
    else
        out.samples = pd.gain * optical.samples;

    if (!noise.is_zero()) {
        const double variance = noise.c_thermal + noise.c_shot * mean_intensity +
                                noise.c_rin * mean_intensity * mean_intensity;
        const double sigma = std::sqrt(variance);
        GaussianDraw gauss(noise.seed);
        for (Eigen::Index i = 0; i < out.samples.size(); ++i)
            out.samples[i] += sigma * gauss();
    }
    return out;
}

}  // namespace mprd
