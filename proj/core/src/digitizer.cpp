#include "mprd/digitizer.hpp"

#include <stdexcept>

namespace mprd {

// shared filter engine, defined in waveforms.cpp
Waveform detail_apply_filter(const Waveform& waveform, const FilterSpec& spec,
                             const char* op_name);

Waveform lowpass(const Waveform& waveform, const FilterSpec& spec) {
    return detail_apply_filter(waveform, spec, "lowpass");
}

std::size_t decimated_length(std::size_t n_input, const DecimationPlan& plan) {
    const std::size_t offset = plan.offset_samples();
    if (offset >= n_input)
        return 0;
    return (n_input - offset - 1) / plan.factor + 1;
}

MeasurementVector decimate(const Waveform& waveform, const DecimationPlan& plan) {
    if (plan.factor == 0 || plan.position == 0)
        throw std::invalid_argument("decimate: factor and position must be >= 1");
    const std::size_t n = waveform.grid.n_samples;
    const std::size_t m = decimated_length(n, plan);
    if (m == 0)
        throw std::invalid_argument("decimate: plan offset exceeds the record length");

    MeasurementVector mv;
    mv.values.resize(static_cast<Eigen::Index>(m));
    const std::size_t offset = plan.offset_samples();
    for (std::size_t k = 0; k < m; ++k)
        mv.values[static_cast<Eigen::Index>(k)] =
            waveform.samples[static_cast<Eigen::Index>(offset + k * plan.factor)];
    mv.equivalent_rate = waveform.grid.sample_rate / static_cast<double>(plan.factor);
    return mv;
}

}  // namespace mprd
