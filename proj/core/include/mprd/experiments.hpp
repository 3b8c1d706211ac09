#pragma once

#include "mprd/digitizer.hpp"
#include "mprd/photonic_frontend.hpp"
#include "mprd/reconstruction.hpp"
#include "mprd/waveforms.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mprd {

enum class MzmModel { exact, small_signal };

struct PrbsConfig {
    std::uint32_t seed = 0x7FFF;
    double chip_rate_hz = 500e6;
    std::size_t n_chips = 1000;
    double bandwidth_hz = 500e6;  // 0 disables bandlimiting (ideal PRBS)
};

struct SolverConfig {
    std::size_t sparsity_budget = 0;  // 0: resolved to 2 * n_tones + 1 at load
    double residual_tol = 1e-6;
    bool assume_unit_gain = false;  // skip the (1/2) sin(alpha) compensation
};

/// Fully resolved description of one trial. Loading a config file fills every
/// field; nothing here carries an implicit default once resolved.
struct TrialConfig {
    std::vector<ToneSpec> tones;
    PrbsConfig prbs;
    double sample_rate_hz = 10e9;
    ModulatorParams modulator;
    PdParams pd;
    NoiseSpec noise;
    FilterSpec receiver_lpf{FilterKind::brickwall_fft, 25e6};
    DecimationPlan plan;
    double dictionary_f_max_hz = 250e6;
    SolverConfig solver;
    MzmModel model = MzmModel::exact;

    TimeGrid grid() const;
    std::size_t samples_per_chip() const;
    std::size_t resolved_budget() const;
    double amplitude_ratio() const { return modulator.v_code / modulator.v_pi; }

    /// Checks geometric consistency (rates, record length, plan bounds, tone
    /// grid) and parameter ranges. Throws std::invalid_argument with the
    /// offending field named.
    void validate() const;
};

struct TrialRecord {
    std::string config_fingerprint;  // FNV-1a of the resolved config JSON
    double amplitude_ratio = 0.0;
    std::size_t position = 1;
    bool ok = false;
    std::string failure_reason;
    double error = 0.0;
    std::vector<std::size_t> support;
    std::vector<double> spectrum_original;       // per dictionary frequency
    std::vector<double> spectrum_reconstructed;  // per dictionary frequency
    double runtime_seconds = 0.0;
};

/// Per-record l2 energies of the three small-signal terms evaluated with the
/// actual (bandlimited) PRBS drive: the desired mixed product, the second
/// harmonic of the signal, and the AC part of the signal-independent term.
struct TermEnergies {
    double mixed = 0.0;
    double second_harmonic = 0.0;
    double signal_independent = 0.0;
};

struct SweepReport {
    std::vector<double> amplitude_ratios;
    std::vector<std::size_t> positions;
    std::vector<std::vector<TrialRecord>> records;  // [amplitude][position]
    Eigen::MatrixXd error_grid;                     // NaN where a trial failed
    std::vector<double> mean_errors;                // per amplitude, over positions
    double max_reduction = 0.0;  // 1 - min(mean) / mean at the reference amplitude
};

/// Reference values measured on the laboratory demonstration this simulator
/// models. Attached to reports as annotations only, never used as pass/fail
/// thresholds: the testbed's noise floor is unknown.
struct HardwareReference {
    std::string label;
    double value;
};
const std::vector<HardwareReference>& hardware_reference_annotations();

/// End-to-end chain: generate -> bandlimit -> modulate -> photodetect ->
/// lowpass -> decimate -> sensing matrix -> OMP -> score. Deterministic
/// given the config seeds. Stage precondition failures propagate.
TrialRecord run_single_trial(const TrialConfig& config);

/// One trial per (amplitude ratio, position). Trials are independent; a
/// failed trial is recorded with its reason and the sweep continues.
/// Results are invariant to execution order and to n_threads.
SweepReport run_sweep(const TrialConfig& base, const std::vector<double>& amplitude_ratios,
                      const std::vector<std::size_t>& positions, unsigned n_threads = 1);

TermEnergies decompose_terms(const TrialConfig& config);

struct ReportFormats {
    bool csv = true;
    bool json = true;
    bool spectra = true;
    bool records = true;  // per-trial JSONs under records/
};

/// Writes errors.csv (one row per amplitude: amplitude_ratio, one column per
/// position, mean), report.json (schema-versioned full records), per-trial
/// record JSONs under records/, and spectra tables under spectra/.
void emit_report(const SweepReport& report, const TrialConfig& base,
                 const std::filesystem::path& out_dir, const ReportFormats& formats = {});

void emit_trial(const TrialRecord& record, const TrialConfig& config,
                const std::filesystem::path& out_dir);

/// Derived noise seed for trial (amplitude index, position); keeps sweep
/// trials statistically independent while reproducible in any order.
std::uint64_t trial_noise_seed(std::uint64_t base_seed, std::size_t amplitude_index,
                               std::size_t position);

}  // namespace mprd
