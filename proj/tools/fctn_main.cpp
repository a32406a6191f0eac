#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fctn/cli.hpp"
#include "fctn/errors.hpp"

namespace {

// exit codes: 0 success, 1 runtime failure, 2 configuration failure
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct CommonOpts {
    std::string config_path;
    std::string strategy;
    std::string out;
    std::string mock_script;
    long seed = -1;
};

fctn::RunConfig resolve_config(const CommonOpts& opts) {
    fctn::RunConfig config =
        opts.config_path.empty() ? fctn::RunConfig{} : fctn::load_config(opts.config_path);
    if (!opts.strategy.empty()) config.strategy = opts.strategy;
    if (!opts.out.empty()) config.output_dir = opts.out;
    if (!opts.mock_script.empty()) config.mock_script = opts.mock_script;
    if (opts.seed >= 0) {
        config.search.rng_seed = static_cast<std::uint64_t>(opts.seed);
        config.synth_seed = static_cast<std::uint64_t>(opts.seed);
    }
    return config;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON run configuration file");
    cmd->add_option("--strategy", opts.strategy, "llm | random | bayes | exhaustive");
    cmd->add_option("--seed", opts.seed, "override search and synth seeds");
    cmd->add_option("--out", opts.out, "output directory");
    cmd->add_option("--mock-script", opts.mock_script,
                    "JSON array of scripted assistant responses (llm strategy)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"FCTN rank selection: dataset ingest, iterative rank search, reporting"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::vector<std::string> runlog_paths;

    CLI::App* synth = app.add_subcommand("synth", "write a synthetic panel CSV");
    add_common(synth, opts);
    CLI::App* ingest = app.add_subcommand("ingest", "embed and split the dataset to disk");
    add_common(ingest, opts);
    CLI::App* search = app.add_subcommand("search", "run the configured rank search");
    add_common(search, opts);
    CLI::App* report = app.add_subcommand("report", "render tables and plot data from run logs");
    add_common(report, opts);
    report->add_option("logs", runlog_paths, "run-log .jsonl paths")->required();

    CLI11_PARSE(app, argc, argv);

    fctn::RunConfig config;
    try {
        config = resolve_config(opts);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    }

    try {
        if (synth->parsed()) {
            std::printf("panel written to %s\n", fctn::cmd_synth(config).c_str());
        } else if (ingest->parsed()) {
            std::printf("dataset written to %s\n", fctn::cmd_ingest(config).c_str());
        } else if (search->parsed()) {
            fctn::cmd_search(config);
        } else if (report->parsed()) {
            for (const auto& path : fctn::cmd_report(runlog_paths, config.output_dir))
                std::printf("wrote %s\n", path.c_str());
        }
    } catch (const fctn::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return kExitRuntime;
    }
    return 0;
}
