#include "mprd/config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace mprd {

using nlohmann::json;

const char* tool_version() { return "1.0.0"; }

namespace {

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
    throw ConfigError("config field '" + path + "': " + what);
}

void reject_unknown_keys(const json& object, const std::string& path,
                         const std::set<std::string>& allowed) {
    for (const auto& [key, value] : object.items())
        if (!allowed.contains(key))
            throw ConfigError("config: unknown field '" + (path.empty() ? key : path + "." + key) +
                              "'");
}

template <typename T>
T get_or(const json& object, const std::string& key, const T& fallback, const std::string& path) {
    if (!object.contains(key))
        return fallback;
    try {
        return object.at(key).get<T>();
    } catch (const json::exception&) {
        field_error(path.empty() ? key : path + "." + key, "wrong type");
    }
}

FilterKind parse_filter_kind(const std::string& text, const std::string& path) {
    if (text == "brickwall_fft")
        return FilterKind::brickwall_fft;
    if (text == "windowed_sinc_fir")
        return FilterKind::windowed_sinc_fir;
    field_error(path, "expected 'brickwall_fft' or 'windowed_sinc_fir', got '" + text + "'");
}

MzmModel parse_model(const std::string& text) {
    if (text == "exact")
        return MzmModel::exact;
    if (text == "small_signal")
        return MzmModel::small_signal;
    field_error("model", "expected 'exact' or 'small_signal', got '" + text + "'");
}

std::vector<ToneSpec> default_tones() {
    // Synthetic four-tone default: equal amplitudes, zero phases, 0.2 rad
    // total peak deviation, all on the 0.5 MHz record grid.
    return {
        {20e6, 0.05, 0.0},
        {45e6, 0.05, 0.0},
        {70e6, 0.05, 0.0},
        {100e6, 0.05, 0.0},
    };
}

std::vector<ToneSpec> parse_tones(const json& root) {
    if (!root.contains("tones"))
        return default_tones();
    const json& list = root.at("tones");
    if (!list.is_array())
        field_error("tones", "expected an array");
    std::vector<ToneSpec> tones;
    tones.reserve(list.size());
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string path = "tones[" + std::to_string(i) + "]";
        const json& entry = list.at(i);
        if (!entry.is_object())
            field_error(path, "expected an object");
        reject_unknown_keys(entry, path, {"frequency_hz", "amplitude_rad", "phase_rad"});
        ToneSpec tone;
        if (!entry.contains("frequency_hz"))
            field_error(path + ".frequency_hz", "required");
        tone.frequency_hz = get_or<double>(entry, "frequency_hz", 0.0, path);
        tone.amplitude_rad = get_or<double>(entry, "amplitude_rad", 0.05, path);
        tone.phase_rad = get_or<double>(entry, "phase_rad", 0.0, path);
        tones.push_back(tone);
    }
    return tones;
}

TrialConfig parse_trial(const json& root) {
    TrialConfig config;
    config.tones = parse_tones(root);
    config.sample_rate_hz = get_or<double>(root, "sample_rate_hz", 10e9, "");

    if (root.contains("prbs")) {
        const json& prbs = root.at("prbs");
        reject_unknown_keys(prbs, "prbs", {"seed", "chip_rate_hz", "n_chips", "bandwidth_hz"});
        config.prbs.seed = get_or<std::uint32_t>(prbs, "seed", 0x7FFF, "prbs");
        config.prbs.chip_rate_hz = get_or<double>(prbs, "chip_rate_hz", 500e6, "prbs");
        config.prbs.n_chips = get_or<std::size_t>(prbs, "n_chips", 1000, "prbs");
        config.prbs.bandwidth_hz = get_or<double>(prbs, "bandwidth_hz", 500e6, "prbs");
    }

    if (root.contains("modulator")) {
        const json& modulator = root.at("modulator");
        reject_unknown_keys(modulator, "modulator", {"v_pi_volts", "v_dc_volts", "v_code_volts"});
        config.modulator.v_pi = get_or<double>(modulator, "v_pi_volts", 3.5, "modulator");
        config.modulator.v_dc =
            get_or<double>(modulator, "v_dc_volts", config.modulator.v_pi, "modulator");
        config.modulator.v_code =
            get_or<double>(modulator, "v_code_volts", 0.5 * config.modulator.v_pi, "modulator");
    }

    if (root.contains("photodetector")) {
        const json& pd = root.at("photodetector");
        reject_unknown_keys(pd, "photodetector", {"gain", "ac_coupled"});
        config.pd.gain = get_or<double>(pd, "gain", 1.0, "photodetector");
        config.pd.ac_coupled = get_or<bool>(pd, "ac_coupled", true, "photodetector");
    }

    if (root.contains("noise")) {
        const json& noise = root.at("noise");
        reject_unknown_keys(noise, "noise", {"c_thermal", "c_shot", "c_rin", "seed"});
        config.noise.c_thermal = get_or<double>(noise, "c_thermal", 0.0, "noise");
        config.noise.c_shot = get_or<double>(noise, "c_shot", 0.0, "noise");
        config.noise.c_rin = get_or<double>(noise, "c_rin", 0.0, "noise");
        config.noise.seed = get_or<std::uint64_t>(noise, "seed", 1, "noise");
    }

    if (root.contains("receiver")) {
        const json& receiver = root.at("receiver");
        reject_unknown_keys(receiver, "receiver",
                            {"lpf_cutoff_hz", "lpf_kind", "lpf_taps", "decimation_factor",
                             "position"});
        config.receiver_lpf.cutoff_hz = get_or<double>(receiver, "lpf_cutoff_hz", 25e6, "receiver");
        config.receiver_lpf.kind = parse_filter_kind(
            get_or<std::string>(receiver, "lpf_kind", "brickwall_fft", "receiver"),
            "receiver.lpf_kind");
        config.receiver_lpf.taps = get_or<std::size_t>(receiver, "lpf_taps", 201, "receiver");
        config.plan.factor = get_or<std::size_t>(receiver, "decimation_factor", 200, "receiver");
        config.plan.position = get_or<std::size_t>(receiver, "position", 1, "receiver");
    }

    if (root.contains("dictionary")) {
        const json& dictionary = root.at("dictionary");
        reject_unknown_keys(dictionary, "dictionary", {"f_max_hz"});
        config.dictionary_f_max_hz = get_or<double>(dictionary, "f_max_hz", 250e6, "dictionary");
    }

    if (root.contains("solver")) {
        const json& solver = root.at("solver");
        reject_unknown_keys(solver, "solver",
                            {"sparsity_budget", "residual_tol", "assume_unit_gain"});
        config.solver.sparsity_budget =
            get_or<std::size_t>(solver, "sparsity_budget", 0, "solver");
        config.solver.residual_tol = get_or<double>(solver, "residual_tol", 1e-6, "solver");
        config.solver.assume_unit_gain =
            get_or<bool>(solver, "assume_unit_gain", false, "solver");
    }

    config.model = parse_model(get_or<std::string>(root, "model", "exact", ""));

    // Materialize the remaining defaults so persisted configs carry no
    // implicit values.
    if (config.solver.sparsity_budget == 0)
        config.solver.sparsity_budget = 2 * config.tones.size() + 1;
    return config;
}

SweepSection parse_sweep(const json& root) {
    SweepSection sweep;
    // Paper-analog defaults: the four named amplitude ratios plus four
    // interpolated points for smoother curves, all 20 intra-chip positions.
    sweep.amplitude_ratios = {0.5, 0.432, 0.35, 0.3, 0.28, 0.243, 0.21, 0.177};
    sweep.positions.resize(20);
    for (std::size_t p = 0; p < 20; ++p)
        sweep.positions[p] = p + 1;

    if (root.contains("sweep")) {
        const json& section = root.at("sweep");
        reject_unknown_keys(section, "sweep", {"amplitude_ratios", "positions"});
        if (section.contains("amplitude_ratios"))
            sweep.amplitude_ratios =
                get_or<std::vector<double>>(section, "amplitude_ratios", {}, "sweep");
        if (section.contains("positions"))
            sweep.positions =
                get_or<std::vector<std::size_t>>(section, "positions", {}, "sweep");
    }
    return sweep;
}

json trial_to_json(const TrialConfig& config) {
    json j;
    j["tones"] = json::array();
    for (const ToneSpec& tone : config.tones)
        j["tones"].push_back({{"frequency_hz", tone.frequency_hz},
                              {"amplitude_rad", tone.amplitude_rad},
                              {"phase_rad", tone.phase_rad}});
    j["sample_rate_hz"] = config.sample_rate_hz;
    j["prbs"] = {{"seed", config.prbs.seed},
                 {"chip_rate_hz", config.prbs.chip_rate_hz},
                 {"n_chips", config.prbs.n_chips},
                 {"bandwidth_hz", config.prbs.bandwidth_hz}};
    j["modulator"] = {{"v_pi_volts", config.modulator.v_pi},
                      {"v_dc_volts", config.modulator.v_dc},
                      {"v_code_volts", config.modulator.v_code}};
    j["photodetector"] = {{"gain", config.pd.gain}, {"ac_coupled", config.pd.ac_coupled}};
    j["noise"] = {{"c_thermal", config.noise.c_thermal},
                  {"c_shot", config.noise.c_shot},
                  {"c_rin", config.noise.c_rin},
                  {"seed", config.noise.seed}};
    j["receiver"] = {
        {"lpf_cutoff_hz", config.receiver_lpf.cutoff_hz},
        {"lpf_kind",
         config.receiver_lpf.kind == FilterKind::brickwall_fft ? "brickwall_fft"
                                                               : "windowed_sinc_fir"},
        {"lpf_taps", config.receiver_lpf.taps},
        {"decimation_factor", config.plan.factor},
        {"position", config.plan.position}};
    j["dictionary"] = {{"f_max_hz", config.dictionary_f_max_hz}};
    j["solver"] = {{"sparsity_budget", config.solver.sparsity_budget},
                   {"residual_tol", config.solver.residual_tol},
                   {"assume_unit_gain", config.solver.assume_unit_gain}};
    j["model"] = config.model == MzmModel::exact ? "exact" : "small_signal";
    return j;
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file)
        throw IoError("cannot read config file: " + path.string());
    std::ostringstream buffer;
    buffer << file.rdbuf();

    json root;
    try {
        root = json::parse(buffer.str(), /*cb=*/nullptr, /*allow_exceptions=*/true,
                           /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error in ") + path.string() + ": " + e.what());
    }
    if (!root.is_object())
        throw ConfigError("config: top level must be an object");

    reject_unknown_keys(root, "",
                        {"schema_version", "tones", "sample_rate_hz", "prbs", "modulator",
                         "photodetector", "noise", "receiver", "dictionary", "solver", "model",
                         "sweep"});
    const int schema = get_or<int>(root, "schema_version", kSchemaVersion, "");
    if (schema != kSchemaVersion)
        throw ConfigError("config: schema_version " + std::to_string(schema) +
                          " unsupported (expected " + std::to_string(kSchemaVersion) + ")");

    ExperimentConfig config;
    config.trial = parse_trial(root);
    config.sweep = parse_sweep(root);
    try {
        config.trial.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (config.sweep.amplitude_ratios.empty())
        throw ConfigError("config field 'sweep.amplitude_ratios': must be non-empty");
    if (config.sweep.positions.empty())
        throw ConfigError("config field 'sweep.positions': must be non-empty");
    for (double ratio : config.sweep.amplitude_ratios)
        if (!(ratio > 0.0) || ratio > 0.5)
            throw ConfigError("config field 'sweep.amplitude_ratios': ratios must lie in (0, 0.5]");
    for (std::size_t position : config.sweep.positions)
        if (position == 0 || position > config.trial.samples_per_chip())
            throw ConfigError("config field 'sweep.positions': positions must lie in [1, " +
                              std::to_string(config.trial.samples_per_chip()) + "]");
    return config;
}

std::string resolved_trial_json(const TrialConfig& trial) {
    json j = trial_to_json(trial);
    j["schema_version"] = kSchemaVersion;
    return j.dump(2);
}

std::string resolved_config_json(const ExperimentConfig& config) {
    json j = trial_to_json(config.trial);
    j["schema_version"] = kSchemaVersion;
    j["sweep"] = {{"amplitude_ratios", config.sweep.amplitude_ratios},
                  {"positions", config.sweep.positions}};
    return j.dump(2);
}

std::string config_fingerprint(const TrialConfig& trial) {
    // FNV-1a 64-bit over the canonical resolved JSON (nlohmann objects
    // serialize with sorted keys, so the text is stable).
    const std::string text = resolved_trial_json(trial);
    std::uint64_t hash = 0xCBF29CE484222325ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001B3ull;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(hash));
    return buffer;
}

std::string trial_record_json(const TrialRecord& record, const TrialConfig& config) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["tool_version"] = tool_version();
    j["config_fingerprint"] = record.config_fingerprint;
    j["amplitude_ratio"] = record.amplitude_ratio;
    j["position"] = record.position;
    j["ok"] = record.ok;
    if (!record.ok)
        j["failure_reason"] = record.failure_reason;
    j["error"] = record.error;
    j["support"] = record.support;
    j["spectrum_original"] = record.spectrum_original;
    j["spectrum_reconstructed"] = record.spectrum_reconstructed;
    j["runtime_seconds"] = record.runtime_seconds;
    j["config"] = json::parse(resolved_trial_json(config));
    return j.dump(2) + "\n";
}

}  // namespace mprd
