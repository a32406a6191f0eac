#include "fctn/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fctn/report.hpp"
#include "fctn/run_log_io.hpp"

namespace fctn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class T>
void read_if(const json& obj, const char* key, T& out) {
    if (obj.contains(key) && !obj.at(key).is_null()) out = obj.at(key).get<T>();
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ReportError("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

SynthStructure parse_structure(const std::string& name) {
    if (name == "low_rank") return SynthStructure::low_rank;
    if (name == "noise") return SynthStructure::noise;
    if (name == "mixed") return SynthStructure::mixed;
    throw ReportError("unknown synth structure: " + name);
}

RunConfig config_from_json(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ReportError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    if (doc.contains("data")) {
        const json& d = doc["data"];
        read_if(d, "source", c.source);
        read_if(d, "csv_path", c.csv_path);
        if (d.contains("synth")) {
            const json& s = d["synth"];
            if (s.contains("base_shape")) {
                c.synth_base_shape.clear();
                for (const auto& v : s["base_shape"]) c.synth_base_shape.push_back(v.get<Index>());
            }
            read_if(s, "steps", c.synth_steps);
            read_if(s, "seed", c.synth_seed);
            read_if(s, "structure", c.synth_structure);
        }
        read_if(d, "window", c.window);
        read_if(d, "stride", c.stride);
        read_if(d, "split_fraction", c.split_fraction);
        read_if(d, "non_overlapping", c.non_overlapping);
        read_if(d, "standardize", c.standardize);
    }
    if (doc.contains("search")) {
        const json& s = doc["search"];
        read_if(s, "strategy", c.strategy);
        read_if(s, "max_iterations", c.search.max_iterations);
        read_if(s, "patience", c.search.patience);
        read_if(s, "min_delta", c.search.min_delta);
        read_if(s, "lambda", c.search.lambda);
        read_if(s, "seed", c.search.rng_seed);
        std::string policy = "max_of_modes";
        read_if(s, "bound_policy", policy);
        if (policy == "max_of_modes")
            c.search.bound_policy = BoundPolicy::max_of_modes;
        else if (policy == "min_of_modes")
            c.search.bound_policy = BoundPolicy::min_of_modes;
        else
            throw ReportError("unknown bound_policy: " + policy);
    }
    if (doc.contains("als")) {
        const json& a = doc["als"];
        read_if(a, "max_sweeps", c.search.als.max_sweeps);
        read_if(a, "rel_tol", c.search.als.rel_tol);
        read_if(a, "ridge", c.search.als.ridge);
        read_if(a, "seed", c.search.als.seed);
        read_if(a, "restarts", c.search.als.restarts);
    }
    if (doc.contains("client")) {
        const json& l = doc["client"];
        read_if(l, "model", c.client.model_name);
        read_if(l, "endpoint", c.endpoint);
        read_if(l, "api_key_env", c.api_key_env);
        read_if(l, "max_output_tokens", c.client.max_output_tokens);
        read_if(l, "temperature", c.client.temperature);
        read_if(l, "context_window_tokens", c.client.context_window_tokens);
        read_if(l, "timeout_ms", c.client.timeout_ms);
        read_if(l, "max_retries", c.client.max_retries);
        read_if(l, "mock_script", c.mock_script);
    }
    if (doc.contains("prompts")) {
        const json& p = doc["prompts"];
        read_if(p, "system_template", c.system_template_path);
        read_if(p, "initial_template", c.initial_template_path);
        read_if(p, "iterative_template", c.iterative_template_path);
        read_if(p, "mode_descriptions", c.mode_descriptions);
        read_if(p, "domain_label", c.domain_label);
    }
    read_if(doc, "output_dir", c.output_dir);

    if (c.strategy != "llm" && c.strategy != "random" && c.strategy != "bayes" &&
        c.strategy != "exhaustive")
        throw ReportError("unknown strategy: " + c.strategy);
    if (c.source != "synth" && c.source != "csv")
        throw ReportError("unknown data source: " + c.source);
    if (c.source == "csv" && c.csv_path.empty())
        throw ReportError("csv source requires data.csv_path");
    if (c.strategy == "llm" && c.mock_script.empty() && c.endpoint.empty())
        throw ReportError("llm strategy requires client.endpoint or client.mock_script");
    parse_structure(c.synth_structure);
    return c;
}

RunConfig load_config(const std::string& path) { return config_from_json(read_text_file(path)); }

std::string canonical_config(const RunConfig& c) {
    json doc;
    doc["data"] = {{"source", c.source},
                   {"csv_path", c.csv_path},
                   {"synth",
                    {{"base_shape", c.synth_base_shape},
                     {"steps", c.synth_steps},
                     {"seed", c.synth_seed},
                     {"structure", c.synth_structure}}},
                   {"window", c.window},
                   {"stride", c.stride},
                   {"split_fraction", c.split_fraction},
                   {"non_overlapping", c.non_overlapping},
                   {"standardize", c.standardize}};
    doc["search"] = {{"strategy", c.strategy},
                     {"max_iterations", c.search.max_iterations},
                     {"patience", c.search.patience},
                     {"min_delta", c.search.min_delta},
                     {"lambda", c.search.lambda},
                     {"seed", c.search.rng_seed},
                     {"bound_policy", c.search.bound_policy == BoundPolicy::max_of_modes
                                          ? "max_of_modes"
                                          : "min_of_modes"}};
    doc["als"] = {{"max_sweeps", c.search.als.max_sweeps},
                  {"rel_tol", c.search.als.rel_tol},
                  {"ridge", c.search.als.ridge},
                  {"seed", c.search.als.seed},
                  {"restarts", c.search.als.restarts}};
    doc["client"] = {{"model", c.client.model_name},
                     {"endpoint", c.endpoint},
                     {"api_key_env", c.api_key_env},
                     {"max_output_tokens", c.client.max_output_tokens},
                     {"temperature", c.client.temperature},
                     {"context_window_tokens", c.client.context_window_tokens},
                     {"timeout_ms", c.client.timeout_ms},
                     {"max_retries", c.client.max_retries},
                     {"mock_script", c.mock_script}};
    doc["prompts"] = {{"system_template", c.system_template_path},
                      {"initial_template", c.initial_template_path},
                      {"iterative_template", c.iterative_template_path},
                      {"mode_descriptions", c.mode_descriptions},
                      {"domain_label", c.domain_label}};
    doc["output_dir"] = c.output_dir;
    return doc.dump();
}

std::string config_hash(const RunConfig& config) { return fnv1a_hex(canonical_config(config)); }

std::string cmd_synth(const RunConfig& config) {
    fs::create_directories(config.output_dir);
    const SeriesPanel panel = synth_panel(config.synth_base_shape, config.synth_steps,
                                          config.synth_seed, parse_structure(config.synth_structure));
    std::vector<std::string> coord_columns;
    for (std::size_t d = 0; d < panel.base_shape.size(); ++d)
        coord_columns.push_back("c" + std::to_string(d + 1));
    if (panel.base_shape.size() == 4)
        coord_columns = {"type", "asset", "feature", "interval"};
    const std::string path = (fs::path(config.output_dir) / "panel.csv").string();
    save_panel(panel, path, coord_columns);
    return path;
}

std::string cmd_ingest(const RunConfig& config) {
    SeriesPanel panel = config.source == "csv"
                            ? load_panel(config.csv_path)
                            : synth_panel(config.synth_base_shape, config.synth_steps,
                                          config.synth_seed,
                                          parse_structure(config.synth_structure));
    const Index count = (panel.num_steps() - config.window) / config.stride + 1;
    if (count < 1) throw SeriesTooShort("ingest: series shorter than one window");
    if (config.standardize) {
        const Index n_train =
            static_cast<Index>(std::floor(config.split_fraction * static_cast<double>(count)));
        const Index train_span = (n_train - 1) * config.stride + config.window;
        standardize_panel(panel, train_span);
    }
    const std::vector<TensorD> tensors = delay_embed(panel, config.window, config.stride);
    const DatasetSplit ds =
        split(tensors, config.split_fraction, config.window, config.non_overlapping, config.stride);

    const fs::path dir = fs::path(config.output_dir) / "dataset";
    fs::create_directories(dir);

    Shape shape = panel.base_shape;
    shape.push_back(config.window);
    json manifest;
    manifest["shape"] = shape;
    manifest["window"] = config.window;
    manifest["stride"] = config.stride;
    manifest["split_fraction"] = config.split_fraction;
    manifest["non_overlapping"] = config.non_overlapping;
    manifest["train_count"] = ds.train.size();
    manifest["test_count"] = ds.test.size();
    manifest["train_indices"] = ds.train_indices;
    manifest["test_indices"] = ds.test_indices;
    manifest["dropped_indices"] = ds.dropped_indices;
    manifest["tensor_file"] = "tensors.bin";
    manifest["scalar"] = "float64-le";
    {
        std::ofstream out(dir / "manifest.json");
        if (!out) throw ReportError("cannot write manifest");
        out << manifest.dump(2) << '\n';
    }
    {
        std::ofstream out(dir / "tensors.bin", std::ios::binary);
        if (!out) throw ReportError("cannot write tensors.bin");
        auto dump = [&](const std::vector<TensorD>& ts) {
            for (const TensorD& t : ts)
                out.write(reinterpret_cast<const char*>(t.data().data()),
                          static_cast<std::streamsize>(sizeof(double) * t.size()));
        };
        dump(ds.train);
        dump(ds.test);
    }
    return dir.string();
}

IngestedDataset read_dataset(const std::string& dataset_dir) {
    const fs::path dir(dataset_dir);
    json manifest;
    {
        std::ifstream in(dir / "manifest.json");
        if (!in) throw ReportError("dataset manifest not found in " + dataset_dir +
                                   " (run `ingest` first)");
        try {
            in >> manifest;
        } catch (const json::exception& e) {
            throw ReportError(std::string("malformed dataset manifest: ") + e.what());
        }
    }
    IngestedDataset ds;
    for (const auto& v : manifest.at("shape")) ds.shape.push_back(v.get<Index>());
    const std::size_t n_train = manifest.at("train_count").get<std::size_t>();
    const std::size_t n_test = manifest.at("test_count").get<std::size_t>();
    const Index entries = shape_size(ds.shape);

    std::ifstream in(dir / manifest.at("tensor_file").get<std::string>(), std::ios::binary);
    if (!in) throw ReportError("dataset tensor file not found in " + dataset_dir);
    auto read_one = [&]() {
        TensorD t(ds.shape);
        in.read(reinterpret_cast<char*>(t.data().data()),
                static_cast<std::streamsize>(sizeof(double) * entries));
        if (!in) throw ReportError("dataset tensor file truncated");
        return t;
    };
    for (std::size_t i = 0; i < n_train; ++i) ds.train.push_back(read_one());
    for (std::size_t i = 0; i < n_test; ++i) ds.test.push_back(read_one());
    return ds;
}

std::string cmd_search(const RunConfig& config) {
    const IngestedDataset ds = read_dataset((fs::path(config.output_dir) / "dataset").string());
    const RankAssignment bounds = rank_upper_bounds(ds.shape, config.search.bound_policy);

    SearchConfig search_cfg = config.search;
    std::unique_ptr<ChatClient> client;
    std::unique_ptr<RankProposer> proposer;
    if (config.strategy == "random") {
        proposer = std::make_unique<RandomProposer>(bounds, config.search.rng_seed);
    } else if (config.strategy == "bayes") {
        proposer = std::make_unique<SmboProposer>(bounds, config.search.rng_seed, 3);
    } else if (config.strategy == "exhaustive") {
        auto all = enumerate_assignments(bounds);
        search_cfg.max_iterations = static_cast<int>(all.size());
        search_cfg.patience = static_cast<int>(all.size());
        proposer = std::make_unique<ScriptedProposer>(std::move(all), "exhaustive");
    } else { // llm
        if (!config.mock_script.empty())
            client = std::make_unique<ScriptedChatClient>(
                ScriptedChatClient::from_file(config.mock_script));
        else
            client = std::make_unique<HttpChatClient>(config.endpoint, config.api_key_env);
        TensorMeta meta;
        meta.shape = ds.shape;
        meta.bounds = bounds;
        meta.domain_label = config.domain_label;
        meta.mode_descriptions = config.mode_descriptions;
        while (meta.mode_descriptions.size() < meta.shape.size())
            meta.mode_descriptions.push_back(
                meta.mode_descriptions.size() + 1 == meta.shape.size()
                    ? "Time points within each rolling window"
                    : "Mode " + std::to_string(meta.mode_descriptions.size() + 1));
        if (meta.mode_descriptions.size() != meta.shape.size())
            throw ReportError("prompts.mode_descriptions: need one entry per tensor mode");
        PromptTemplates templates;
        if (!config.system_template_path.empty())
            templates.system_template = read_text_file(config.system_template_path);
        if (!config.initial_template_path.empty())
            templates.initial_template = read_text_file(config.initial_template_path);
        if (!config.iterative_template_path.empty())
            templates.iterative_template = read_text_file(config.iterative_template_path);
        proposer = std::make_unique<LlmRankProposer>(std::move(meta), config.search.lambda,
                                                     *client, config.client, templates);
    }

    fs::create_directories(config.output_dir);
    const std::string log_path =
        (fs::path(config.output_dir) / ("runlog_" + config.strategy + ".jsonl")).string();
    RunLogWriter writer(log_path);
    const RunLog log = run_search(
        *proposer, ds.train, ds.test, search_cfg, [&](const IterationRecord& rec) {
            writer.write_record(rec);
            std::printf("iteration %d  train %.4f  test %.4f  log10CR %.4f\n", rec.index,
                        rec.train.loss, rec.test.loss, rec.train.log10_cr);
            std::fflush(stdout);
        });
    writer.write_summary(log, config_hash(config));
    for (const std::string& err : log.errors) std::fprintf(stderr, "warning: %s\n", err.c_str());
    std::printf("best iteration %d%s; log written to %s\n", log.best_index,
                log.stopped_early ? " (stopped early)" : "", log_path.c_str());
    return log_path;
}

std::vector<std::string> cmd_report(const std::vector<std::string>& runlog_paths,
                                    const std::string& out_dir) {
    if (runlog_paths.empty()) throw ReportError("report: no run logs given");
    std::vector<RunLog> logs;
    for (const std::string& path : runlog_paths) logs.push_back(read_run_log(path).log);
    fs::create_directories(out_dir);

    std::vector<std::string> written;
    const std::string report_path = (fs::path(out_dir) / "report.md").string();
    {
        std::ofstream out(report_path);
        if (!out) throw ReportError("cannot write " + report_path);
        out << render_report(logs);
    }
    written.push_back(report_path);
    for (std::size_t i = 0; i < logs.size(); ++i) {
        std::string stem = "plot_" + logs[i].strategy_name;
        if (logs.size() > 1) stem += "_" + std::to_string(i + 1);
        const std::string csv_path = (fs::path(out_dir) / (stem + ".csv")).string();
        std::ofstream out(csv_path);
        if (!out) throw ReportError("cannot write " + csv_path);
        out << render_plot_csv(logs[i]);
        written.push_back(csv_path);
    }
    return written;
}

} // namespace fctn
