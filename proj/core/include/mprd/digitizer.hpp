#pragma once

#include "mprd/waveforms.hpp"

namespace mprd {

/// Fixed-stride decimation starting at a selectable intra-chip sample.
/// Position p in [1, samples_per_chip] maps to the zero-based sample offset
/// p - 1; the same convention is used when building the sensing matrix, so
/// the choice of origin cancels between simulation and reconstruction.
struct DecimationPlan {
    std::size_t factor = 200;
    std::size_t position = 1;  // 1-based

    std::size_t offset_samples() const { return position - 1; }
};

/// Sub-Nyquist measurement record, values[k] = input[offset + k * factor].
struct MeasurementVector {
    Eigen::VectorXd values;
    double equivalent_rate = 0.0;  // samples per second after decimation
};

/// Number of decimated points a plan extracts from an n_input-sample record.
std::size_t decimated_length(std::size_t n_input, const DecimationPlan& plan);

/// Receiver low-pass filter. Same filter engine as waveforms::bandlimit so
/// the sensing-matrix construction can reuse the identical definition.
Waveform lowpass(const Waveform& waveform, const FilterSpec& spec);

MeasurementVector decimate(const Waveform& waveform, const DecimationPlan& plan);

}  // namespace mprd
