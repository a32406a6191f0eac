#pragma once

#include <string>
#include <vector>

#include "fctn/data.hpp"
#include "fctn/llm_client.hpp"
#include "fctn/llm_strategy.hpp"
#include "fctn/search.hpp"

namespace fctn {

/// One JSON config document drives every subcommand; unknown strategies or
/// missing strategy-specific fields are rejected up front. The canonical
/// serialization of the config is hashed into run-log summaries.
struct RunConfig {
    // data source
    std::string source = "synth"; // "synth" or "csv"
    std::string csv_path;
    Shape synth_base_shape = {3, 6, 3, 4};
    Index synth_steps = 146;
    std::uint64_t synth_seed = 0;
    std::string synth_structure = "mixed"; // low_rank | noise | mixed

    // embedding and split
    int window = 5;
    int stride = 1;
    double split_fraction = 0.8;
    bool non_overlapping = true;
    bool standardize = false;

    // search
    std::string strategy = "random"; // llm | random | bayes | exhaustive
    SearchConfig search;

    // llm strategy
    ClientParams client;
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::string api_key_env = "OPENAI_API_KEY";
    std::string mock_script; // path to a JSON array of scripted responses
    std::vector<std::string> mode_descriptions;
    std::string domain_label = "multivariate time-series analysis";
    std::string system_template_path;
    std::string initial_template_path;
    std::string iterative_template_path;

    std::string output_dir = "out";
};

RunConfig load_config(const std::string& path);
RunConfig config_from_json(const std::string& json_text);

/// Canonical JSON serialization (sorted keys) used for the config hash.
std::string canonical_config(const RunConfig& config);
std::string config_hash(const RunConfig& config);

SynthStructure parse_structure(const std::string& name);

/// Write a synthetic panel CSV to <output_dir>/panel.csv.
std::string cmd_synth(const RunConfig& config);

/// Build the tensor dataset (embed + split) and persist it to
/// <output_dir>/dataset/ as manifest.json plus tensors.bin. Idempotent.
std::string cmd_ingest(const RunConfig& config);

struct IngestedDataset {
    Shape shape;
    std::vector<TensorD> train;
    std::vector<TensorD> test;
};

IngestedDataset read_dataset(const std::string& dataset_dir);

/// Run the configured strategy over the ingested dataset, streaming one
/// JSON-Lines record per iteration to <output_dir>/runlog_<strategy>.jsonl.
/// Returns the log path.
std::string cmd_search(const RunConfig& config);

/// Render report.md and one plot CSV per run log into out_dir.
std::vector<std::string> cmd_report(const std::vector<std::string>& runlog_paths,
                                    const std::string& out_dir);

} // namespace fctn
