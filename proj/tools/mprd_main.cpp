// mprd: microwave-photonic random demodulator simulator CLI.
//
// Subcommands:
//   simulate  run one trial from a config file
//   sweep     run the amplitude x position sweep
//   report    regenerate CSV tables from prior trial records

#include <CLI11.hpp>

#include "mprd/commands.hpp"

#include <charconv>
#include <iostream>
#include <string>
#include <vector>

namespace {

// "1,5,16" or "1-20" or a mix: "1-4,16"
std::vector<std::size_t> parse_positions(const std::string& text) {
    std::vector<std::size_t> positions;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string::npos)
            end = text.size();
        const std::string token = text.substr(start, end - start);
        if (token.empty())
            throw CLI::ValidationError("--positions", "empty entry in position list");
        const std::size_t dash = token.find('-');
        auto parse_int = [&](const std::string& s) {
            std::size_t value = 0;
            const auto result = std::from_chars(s.data(), s.data() + s.size(), value);
            if (result.ec != std::errc{} || result.ptr != s.data() + s.size())
                throw CLI::ValidationError("--positions", "'" + s + "' is not a position");
            return value;
        };
        if (dash == std::string::npos) {
            positions.push_back(parse_int(token));
        } else {
            const std::size_t lo = parse_int(token.substr(0, dash));
            const std::size_t hi = parse_int(token.substr(dash + 1));
            if (lo > hi)
                throw CLI::ValidationError("--positions", "range '" + token + "' is reversed");
            for (std::size_t p = lo; p <= hi; ++p)
                positions.push_back(p);
        }
        start = end + 1;
        if (end == text.size())
            break;
    }
    return positions;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical simulator of a microwave-photonic random demodulator for "
                 "compressed sensing"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string positions_text;
    std::vector<double> amplitudes;
    unsigned seed = 0;
    unsigned threads = 1;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config)
            cmd->add_option("-c,--config", config_path, "experiment config file")->required();
        cmd->add_option("-o,--out", out_dir,
                        "output directory (default: $MPRD_OUT_DIR or ./out)");
        cmd->add_option("--seed", seed, "override the PRBS seed");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "run one trial and score it");
    add_common(simulate, true);

    CLI::App* sweep = app.add_subcommand("sweep", "run the amplitude x position sweep");
    add_common(sweep, true);
    sweep->add_option("--amplitudes", amplitudes,
                      "comma-separated v_code/v_pi ratios overriding the config sweep list")
        ->delimiter(',');
    sweep->add_option("--positions", positions_text,
                      "positions overriding the config sweep list, e.g. 1-20 or 1,8,16");
    sweep->add_option("--threads", threads, "number of worker threads for independent trials");

    std::string records_dir;
    CLI::App* report = app.add_subcommand("report", "rebuild CSV tables from trial records");
    report->add_option("records_dir", records_dir, "directory of per-trial JSON records")
        ->required();
    report->add_option("-o,--out", out_dir, "output directory (default: the records directory)");

    CLI11_PARSE(app, argc, argv);

    mprd::cli::CommandOptions options;
    options.config_path = config_path;
    if (!out_dir.empty())
        options.out_dir = out_dir;
    if (simulate->count("--seed") || sweep->count("--seed"))
        options.seed = seed;
    if (sweep->count("--amplitudes"))
        options.amplitudes = amplitudes;
    if (sweep->count("--positions")) {
        try {
            options.positions = parse_positions(positions_text);
        } catch (const CLI::Error& e) {
            std::cerr << e.what() << "\n";
            return mprd::cli::exit_config_error;
        }
    }
    options.threads = threads;

    if (simulate->parsed())
        return mprd::cli::cmd_simulate(options, std::cout, std::cerr);
    if (sweep->parsed())
        return mprd::cli::cmd_sweep(options, std::cout, std::cerr);
    if (report->parsed())
        return mprd::cli::cmd_report(records_dir, options.out_dir, std::cout, std::cerr);
    return mprd::cli::exit_failure;
}
