#include "mprd/experiments.hpp"

#include "mprd/config.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

namespace mprd {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string format_double(double value) {
    if (std::isnan(value))
        return "nan";
    char buffer[32];
    const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, result.ptr);
}

void parallel_for(std::size_t n_tasks, unsigned n_threads, const std::function<void(std::size_t)>& task) {
    if (n_threads <= 1 || n_tasks <= 1) {
        for (std::size_t i = 0; i < n_tasks; ++i)
            task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1))
            task(i);
    };
    std::vector<std::thread> pool;
    const unsigned count = std::min<unsigned>(n_threads, static_cast<unsigned>(n_tasks));
    pool.reserve(count);
    for (unsigned t = 0; t < count; ++t)
        pool.emplace_back(worker);
    for (std::thread& t : pool)
        t.join();
}

/// Stages shared by every trial of a sweep: everything that does not depend
/// on the PRBS amplitude or the decimation position.
struct SweepCache {
    TimeGrid grid;
    ChipSequence chips;
    Waveform x_true;
    Dictionary dictionary;
    std::vector<DecimationPlan> plans;
    std::vector<Eigen::MatrixXd> bases;  // unit-gain sensing columns per plan
    std::vector<double> spectrum_original;
};

SweepCache make_cache(const TrialConfig& config, const std::vector<std::size_t>& positions) {
    TimeGrid grid = config.grid();
    ChipSequence chips =
        generate_chip_sequence(config.prbs.seed, config.prbs.n_chips, config.prbs.chip_rate_hz);
    Waveform x_true = synthesize_multitone(config.tones, grid);
    Dictionary dictionary = build_dictionary(grid, config.dictionary_f_max_hz);

    std::vector<DecimationPlan> plans;
    plans.reserve(positions.size());
    for (std::size_t p : positions)
        plans.push_back(DecimationPlan{config.plan.factor, p});
    std::vector<Eigen::MatrixXd> bases =
        sensing_base_columns(dictionary, chips, config.receiver_lpf, plans);
    std::vector<double> spectrum_original = dictionary_spectrum(x_true, dictionary);

    return SweepCache{std::move(grid),       std::move(chips), std::move(x_true),
                      std::move(dictionary), std::move(plans), std::move(bases),
                      std::move(spectrum_original)};
}

/// PRBS drive and optical output for one amplitude, shared across positions.
Waveform optical_for_amplitude(const TrialConfig& config, const SweepCache& cache) {
    Waveform drive = chips_to_waveform(cache.chips, cache.grid, config.modulator.v_code);
    if (config.prbs.bandwidth_hz > 0.0)
        drive = bandlimit(drive, FilterSpec{FilterKind::brickwall_fft, config.prbs.bandwidth_hz});
    if (config.model == MzmModel::exact)
        return mzm_output(drive, cache.x_true, config.modulator);
    return mzm_small_signal_drive(drive, cache.x_true, config.modulator);
}

/// Receiver chain and scoring for one (amplitude, position) cell.
TrialRecord run_cell(const TrialConfig& config, const SweepCache& cache, const Waveform& optical,
                     std::size_t plan_index, std::uint64_t noise_seed) {
    const auto start = std::chrono::steady_clock::now();

    TrialRecord record;
    record.amplitude_ratio = config.amplitude_ratio();
    record.position = cache.plans[plan_index].position;
    record.config_fingerprint = config_fingerprint(config);

    NoiseSpec noise = config.noise;
    noise.seed = noise_seed;
    const Waveform detected = photodetect(optical, config.pd, noise);
    const Waveform filtered = lowpass(detected, config.receiver_lpf);
    const MeasurementVector y = decimate(filtered, cache.plans[plan_index]);

    // The matrix columns absorb the assumed mixing gain, so the solved
    // coefficients are already in the signal's native units and the
    // reconstruction needs no further rescale. With assume_unit_gain the
    // receiver pretends the gain is 1 and the recovered amplitudes stay at
    // the measured scale.
    SensingMatrix matrix;
    matrix.plan = cache.plans[plan_index];
    matrix.gain_model = config.solver.assume_unit_gain
                            ? 1.0
                            : 0.5 * std::sin(config.modulator.alpha()) * config.pd.gain;
    matrix.entries = matrix.gain_model * cache.bases[plan_index];

    const SparseSolution solution =
        omp(matrix, y, config.resolved_budget(), config.solver.residual_tol);
    const Waveform x_rec = reconstruct_signal(solution, cache.dictionary, 1.0);

    record.error = reconstruction_error(x_rec, cache.x_true);
    record.support = solution.support;
    record.spectrum_original = cache.spectrum_original;
    record.spectrum_reconstructed = dictionary_spectrum(x_rec, cache.dictionary);
    record.ok = true;
    record.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return record;
}

std::size_t reference_amplitude_index(const std::vector<double>& ratios) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        if (ratios[i] == 0.5)
            return i;
        if (ratios[i] > ratios[best])
            best = i;
    }
    return best;
}

}  // namespace

TimeGrid TrialConfig::grid() const {
    return make_time_grid(sample_rate_hz, prbs.n_chips * samples_per_chip());
}

std::size_t TrialConfig::samples_per_chip() const {
    const double spc = sample_rate_hz / prbs.chip_rate_hz;
    const double rounded = std::round(spc);
    if (rounded < 1.0 || std::abs(spc - rounded) > 1e-9 * rounded)
        throw std::invalid_argument(
            "config: sample_rate_hz must be an integer multiple of prbs.chip_rate_hz");
    return static_cast<std::size_t>(rounded);
}

std::size_t TrialConfig::resolved_budget() const {
    return solver.sparsity_budget != 0 ? solver.sparsity_budget : 2 * tones.size() + 1;
}

void TrialConfig::validate() const {
    if (!(sample_rate_hz > 0.0))
        throw std::invalid_argument("config: sample_rate_hz must be positive");
    if (prbs.n_chips == 0)
        throw std::invalid_argument("config: prbs.n_chips must be positive");
    if (!(prbs.chip_rate_hz > 0.0))
        throw std::invalid_argument("config: prbs.chip_rate_hz must be positive");

    const std::size_t spc = samples_per_chip();  // throws when not integral
    const TimeGrid g = grid();

    if (prbs.bandwidth_hz < 0.0 || (prbs.bandwidth_hz > 0.0 && prbs.bandwidth_hz >= g.nyquist()))
        throw std::invalid_argument("config: prbs.bandwidth_hz must be 0 (ideal) or below Nyquist");

    mprd::validate(modulator);
    mprd::validate(noise);
    if (!(pd.gain > 0.0))
        throw std::invalid_argument("config: photodetector.gain must be positive");

    double total_deviation = 0.0;
    for (std::size_t i = 0; i < tones.size(); ++i) {
        const ToneSpec& tone = tones[i];
        if (tone.amplitude_rad < 0.0)
            throw std::invalid_argument("config: tones[" + std::to_string(i) +
                                        "].amplitude_rad must be non-negative");
        if (!is_on_grid(tone.frequency_hz, g))
            throw std::invalid_argument("config: tones[" + std::to_string(i) + "] frequency " +
                                        format_double(tone.frequency_hz) +
                                        " Hz is off-grid (must be a multiple of " +
                                        format_double(g.delta_f()) + " Hz)");
        for (std::size_t j = i + 1; j < tones.size(); ++j)
            if (tones[i].frequency_hz == tones[j].frequency_hz)
                throw std::invalid_argument("config: tones[" + std::to_string(i) + "] and tones[" +
                                            std::to_string(j) + "] duplicate frequency " +
                                            format_double(tone.frequency_hz) + " Hz");
        total_deviation += tone.amplitude_rad;
    }
    if (total_deviation > 0.5)
        throw std::invalid_argument(
            "config: total peak phase deviation of the tones exceeds 0.5 rad; the small-signal "
            "regime no longer holds");

    if (!(receiver_lpf.cutoff_hz > 0.0) || receiver_lpf.cutoff_hz >= g.nyquist())
        throw std::invalid_argument("config: receiver.lpf_cutoff_hz must lie in (0, Nyquist)");
    if (receiver_lpf.kind == FilterKind::windowed_sinc_fir &&
        (receiver_lpf.taps % 2 == 0 || receiver_lpf.taps < 3))
        throw std::invalid_argument("config: receiver.lpf_taps must be odd and >= 3");

    if (plan.factor == 0)
        throw std::invalid_argument("config: receiver.decimation_factor must be >= 1");
    if (plan.position == 0 || plan.position > spc)
        throw std::invalid_argument("config: receiver.position must lie in [1, samples_per_chip=" +
                                    std::to_string(spc) + "]");
    const std::size_t m = decimated_length(g.n_samples, plan);
    if (m == 0)
        throw std::invalid_argument("config: decimation plan exceeds the record length");

    if (!(dictionary_f_max_hz >= 0.0) || dictionary_f_max_hz >= g.nyquist())
        throw std::invalid_argument("config: dictionary.f_max_hz must lie in [0, Nyquist)");
    const double cycles = dictionary_f_max_hz / g.delta_f();
    if (std::abs(cycles - std::round(cycles)) > 1e-6 * std::max(1.0, cycles))
        throw std::invalid_argument("config: dictionary.f_max_hz is off-grid");

    if (resolved_budget() > m)
        throw std::invalid_argument("config: solver.sparsity_budget exceeds the measurement count " +
                                    std::to_string(m));
    if (!(solver.residual_tol >= 0.0))
        throw std::invalid_argument("config: solver.residual_tol must be non-negative");
}

const std::vector<HardwareReference>& hardware_reference_annotations() {
    static const std::vector<HardwareReference> annotations = {
        {"max_error_reduction_percent", 85.0},
        {"four_tone_bw500mhz_pos16_error_at_0.500vpi", 0.519},
        {"four_tone_bw500mhz_pos16_error_at_0.243vpi", 0.175},
        {"five_tone_bw500mhz_pos16_error_at_0.500vpi", 0.498},
        {"five_tone_bw500mhz_pos16_error_at_0.243vpi", 0.03},
        {"four_tone_bw1ghz_mean_error_at_0.500vpi", 0.322},
        {"four_tone_bw1ghz_mean_error_best", 0.048},
        {"five_tone_bw1ghz_mean_error_at_0.500vpi", 0.342},
        {"five_tone_bw1ghz_mean_error_best", 0.052},
    };
    return annotations;
}

std::uint64_t trial_noise_seed(std::uint64_t base_seed, std::size_t amplitude_index,
                               std::size_t position) {
    // splitmix64 finalizer over the mixed identifiers
    std::uint64_t z = base_seed ^ (0x9E3779B97F4A7C15ull * (amplitude_index + 1)) ^
                      (0xBF58476D1CE4E5B9ull * (position + 1));
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

TrialRecord run_single_trial(const TrialConfig& config) {
    config.validate();
    const SweepCache cache = make_cache(config, {config.plan.position});
    const Waveform optical = optical_for_amplitude(config, cache);
    return run_cell(config, cache, optical, 0, config.noise.seed);
}

SweepReport run_sweep(const TrialConfig& base, const std::vector<double>& amplitude_ratios,
                      const std::vector<std::size_t>& positions, unsigned n_threads) {
    if (amplitude_ratios.empty() || positions.empty())
        throw std::invalid_argument("run_sweep: amplitude and position lists must be non-empty");
    base.validate();

    SweepReport report;
    report.amplitude_ratios = amplitude_ratios;
    report.positions = positions;

    const SweepCache cache = make_cache(base, positions);

    const std::size_t n_amplitudes = amplitude_ratios.size();
    const std::size_t n_positions = positions.size();

    std::vector<TrialConfig> configs(n_amplitudes, base);
    std::vector<Waveform> opticals(n_amplitudes);
    for (std::size_t i = 0; i < n_amplitudes; ++i) {
        configs[i].modulator.v_code = amplitude_ratios[i] * base.modulator.v_pi;
        mprd::validate(configs[i].modulator);
        opticals[i] = optical_for_amplitude(configs[i], cache);
    }

    report.records.assign(n_amplitudes, std::vector<TrialRecord>(n_positions));
    parallel_for(n_amplitudes * n_positions, n_threads, [&](std::size_t task) {
        const std::size_t i = task / n_positions;
        const std::size_t p = task % n_positions;
        TrialConfig cell_config = configs[i];
        cell_config.plan.position = positions[p];
        TrialRecord& record = report.records[i][p];
        try {
            record = run_cell(cell_config, cache, opticals[i], p,
                              trial_noise_seed(base.noise.seed, i, positions[p]));
        } catch (const std::exception& e) {
            record.amplitude_ratio = amplitude_ratios[i];
            record.position = positions[p];
            record.ok = false;
            record.failure_reason = e.what();
            record.error = kNan;
            record.config_fingerprint = config_fingerprint(cell_config);
        }
    });

    report.error_grid.resize(static_cast<Eigen::Index>(n_amplitudes),
                             static_cast<Eigen::Index>(n_positions));
    report.mean_errors.assign(n_amplitudes, kNan);
    for (std::size_t i = 0; i < n_amplitudes; ++i) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t p = 0; p < n_positions; ++p) {
            const TrialRecord& record = report.records[i][p];
            report.error_grid(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) =
                record.ok ? record.error : kNan;
            if (record.ok) {
                sum += record.error;
                ++count;
            }
        }
        if (count > 0)
            report.mean_errors[i] = sum / static_cast<double>(count);
    }

    const std::size_t ref = reference_amplitude_index(amplitude_ratios);
    const double ref_mean = report.mean_errors[ref];
    double min_mean = std::numeric_limits<double>::infinity();
    for (double m : report.mean_errors)
        if (std::isfinite(m))
            min_mean = std::min(min_mean, m);
    report.max_reduction = (std::isfinite(ref_mean) && ref_mean > 0.0 && std::isfinite(min_mean))
                               ? 1.0 - min_mean / ref_mean
                               : 0.0;
    return report;
}

TermEnergies decompose_terms(const TrialConfig& config) {
    config.validate();
    const TimeGrid grid = config.grid();
    const ChipSequence chips =
        generate_chip_sequence(config.prbs.seed, config.prbs.n_chips, config.prbs.chip_rate_hz);
    Waveform drive = chips_to_waveform(chips, grid, config.modulator.v_code);
    if (config.prbs.bandwidth_hz > 0.0)
        drive = bandlimit(drive, FilterSpec{FilterKind::brickwall_fft, config.prbs.bandwidth_hz});
    const Waveform x = synthesize_multitone(config.tones, grid);

    const double pi_over_vpi = std::numbers::pi / config.modulator.v_pi;
    const Eigen::ArrayXd theta = pi_over_vpi * drive.samples.array();
    const Eigen::ArrayXd sin_theta = theta.sin();
    const Eigen::ArrayXd cos_theta = theta.cos();
    const Eigen::ArrayXd xs = x.samples.array();

    const Eigen::ArrayXd mixed = 0.5 * sin_theta * xs;
    const Eigen::ArrayXd harmonic = 0.25 * cos_theta * xs.square();
    Eigen::ArrayXd independent = -0.5 * cos_theta + 0.5;
    independent -= independent.mean();  // the AC-coupled PD drops the DC part

    TermEnergies energies;
    energies.mixed = mixed.square().sum();
    energies.second_harmonic = harmonic.square().sum();
    energies.signal_independent = independent.square().sum();
    return energies;
}

namespace {

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream file(path, std::ios::binary);
    if (!file)
        throw IoError("cannot open " + path.string() + " for writing");
    file << text;
    if (!file)
        throw IoError("write failed for " + path.string());
}

std::string sweep_csv(const SweepReport& report) {
    std::ostringstream csv;
    csv << "amplitude_ratio";
    for (std::size_t p : report.positions)
        csv << ",position_" << p;
    csv << ",mean\n";
    for (std::size_t i = 0; i < report.amplitude_ratios.size(); ++i) {
        csv << format_double(report.amplitude_ratios[i]);
        for (std::size_t p = 0; p < report.positions.size(); ++p)
            csv << ','
                << format_double(report.error_grid(static_cast<Eigen::Index>(i),
                                                   static_cast<Eigen::Index>(p)));
        csv << ',' << format_double(report.mean_errors[i]) << '\n';
    }
    return csv.str();
}

std::string spectra_csv(const TrialRecord& record, const TrialConfig& config) {
    const double df = config.grid().delta_f();
    std::ostringstream csv;
    csv << "frequency_hz,original_magnitude,reconstructed_magnitude\n";
    for (std::size_t k = 0; k < record.spectrum_original.size(); ++k)
        csv << format_double(static_cast<double>(k) * df) << ','
            << format_double(record.spectrum_original[k]) << ','
            << format_double(record.spectrum_reconstructed[k]) << '\n';
    return csv.str();
}

std::string cell_stem(std::size_t amplitude_index, std::size_t position) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "trial_a%02zu_p%02zu", amplitude_index, position);
    return buffer;
}

}  // namespace

void emit_trial(const TrialRecord& record, const TrialConfig& config,
                const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_text_file(out_dir / "trial.json", trial_record_json(record, config));
    write_text_file(out_dir / "spectra.csv", spectra_csv(record, config));
}

void emit_report(const SweepReport& report, const TrialConfig& base,
                 const std::filesystem::path& out_dir, const ReportFormats& formats) {
    std::filesystem::create_directories(out_dir);

    if (formats.csv)
        write_text_file(out_dir / "errors.csv", sweep_csv(report));

    if (formats.json) {
        nlohmann::json j;
        j["schema_version"] = kSchemaVersion;
        j["tool_version"] = tool_version();
        j["base_config"] = nlohmann::json::parse(resolved_trial_json(base));
        j["amplitude_ratios"] = report.amplitude_ratios;
        j["positions"] = report.positions;
        std::vector<std::vector<double>> grid(report.amplitude_ratios.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            grid[i].resize(report.positions.size());
            for (std::size_t p = 0; p < grid[i].size(); ++p)
                grid[i][p] = report.error_grid(static_cast<Eigen::Index>(i),
                                               static_cast<Eigen::Index>(p));
        }
        j["error_grid"] = grid;
        j["mean_errors"] = report.mean_errors;
        j["max_reduction"] = report.max_reduction;
        nlohmann::json reference;
        reference["description"] =
            "measured values from the hardware demonstration this simulator models; "
            "annotations only, never pass/fail thresholds";
        for (const HardwareReference& annotation : hardware_reference_annotations())
            reference["values"][annotation.label] = annotation.value;
        j["hardware_reference"] = reference;
        nlohmann::json records = nlohmann::json::array();
        for (std::size_t i = 0; i < report.records.size(); ++i) {
            for (std::size_t p = 0; p < report.records[i].size(); ++p) {
                const TrialRecord& record = report.records[i][p];
                nlohmann::json r;
                r["amplitude_ratio"] = record.amplitude_ratio;
                r["position"] = record.position;
                r["ok"] = record.ok;
                if (!record.ok)
                    r["failure_reason"] = record.failure_reason;
                r["error"] = record.error;
                r["support"] = record.support;
                r["config_fingerprint"] = record.config_fingerprint;
                r["runtime_seconds"] = record.runtime_seconds;
                records.push_back(std::move(r));
            }
        }
        j["records"] = records;
        write_text_file(out_dir / "report.json", j.dump(2) + "\n");
    }

    if (!formats.records && !formats.spectra)
        return;

    // Per-trial records and spectra; cmd_report regenerates tables from these.
    const std::filesystem::path records_dir = out_dir / "records";
    const std::filesystem::path spectra_dir = out_dir / "spectra";
    if (formats.records)
        std::filesystem::create_directories(records_dir);
    if (formats.spectra)
        std::filesystem::create_directories(spectra_dir);
    for (std::size_t i = 0; i < report.records.size(); ++i) {
        TrialConfig cell_config = base;
        cell_config.modulator.v_code = report.amplitude_ratios[i] * base.modulator.v_pi;
        for (std::size_t p = 0; p < report.records[i].size(); ++p) {
            const TrialRecord& record = report.records[i][p];
            cell_config.plan.position = record.position;
            const std::string stem = cell_stem(i, record.position);
            if (formats.records)
                write_text_file(records_dir / (stem + ".json"),
                                trial_record_json(record, cell_config));
            if (formats.spectra && record.ok)
                write_text_file(spectra_dir / (stem + ".csv"), spectra_csv(record, cell_config));
        }
    }
}

}  // namespace mprd
