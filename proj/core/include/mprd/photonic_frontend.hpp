#pragma once

#include "mprd/waveforms.hpp"

#include <cstdint>

namespace mprd {

/// Dual-drive Mach-Zehnder modulator operating point. The static bias sits
/// at the minimum transmission point (v_dc = v_pi) and the PRBS amplitude
/// v_code sets the effective bias excursion: alpha = pi * v_code / v_pi.
struct ModulatorParams {
    double v_pi = 3.5;    // half-wave voltage, volts
    double v_dc = 3.5;    // static bias, volts (defaults to v_pi)
    double v_code = 1.75; // PRBS amplitude, volts

    double alpha() const;

    /// Bias at v_pi with v_code = ratio * v_pi (ratio 0.5 is the quadrature drive).
    static ModulatorParams at_ratio(double v_pi, double code_ratio);
};

struct PdParams {
    double gain = 1.0;       // output volts per unit normalized intensity
    bool ac_coupled = true;  // subtract the record mean (DC term dropped)
};

/// Additive Gaussian receiver noise, stationary over a record:
///   variance = c_thermal + c_shot * mean_intensity + c_rin * mean_intensity^2.
/// All-zero coefficients (the default) disable noise entirely.
struct NoiseSpec {
    double c_thermal = 0.0;
    double c_shot = 0.0;
    double c_rin = 0.0;
    std::uint64_t seed = 0;

    bool is_zero() const { return c_thermal == 0.0 && c_shot == 0.0 && c_rin == 0.0; }
};

void validate(const ModulatorParams& params);
void validate(const NoiseSpec& noise);

/// Exact normalized intensity transfer:
///   E_i = 1/2 + 1/2 cos( pi (v_dc + prbs_i) / v_pi + x_i )
/// with the PRBS drive in volts and the signal drive already in radians.
Waveform mzm_output(const Waveform& prbs_drive, const Waveform& signal_drive,
                    const ModulatorParams& params);

/// Small-signal expansion with exact +/-1 chips at fixed alpha:
///   E_i = 1/2 sin(a) s_i x_i + 1/4 cos(a) x_i^2 - 1/2 cos(a) + 1/2.
/// chip_wave must hold the +/-1 chip values sample-aligned with signal_drive.
Waveform mzm_small_signal(const Waveform& chip_wave, const Waveform& signal_drive,
                          const ModulatorParams& params);

/// Same expansion with the per-sample drive phase theta_i = pi prbs_i / v_pi
/// taken from the actual (possibly bandlimited) PRBS voltage waveform:
///   E_i = 1/2 sin(theta_i) x_i + 1/4 cos(theta_i) x_i^2 - 1/2 cos(theta_i) + 1/2.
Waveform mzm_small_signal_drive(const Waveform& prbs_drive, const Waveform& signal_drive,
                                const ModulatorParams& params);

/// Photodetection: out_i = gain * (optical_i - mean) when AC-coupled, plus
/// zero-mean Gaussian noise with the per-record variance of the NoiseSpec.
/// Noiseless output is a deterministic function of the input.
Waveform photodetect(const Waveform& optical, const PdParams& pd, const NoiseSpec& noise);

}  // namespace mprd
