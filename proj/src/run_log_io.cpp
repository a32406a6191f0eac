#include "fctn/run_log_io.hpp"

#include <limits>

namespace fctn {

using nlohmann::json;

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

json eval_to_json(const EvalResult& e) {
    return json{{"loss", e.loss},
                {"log10_cr", e.log10_cr},
                {"mean_error", e.mean_error},
                {"per_tensor_errors", e.per_tensor_errors}};
}

EvalResult eval_from_json(const json& obj) {
    EvalResult e;
    e.loss = obj.at("loss").get<double>();
    e.log10_cr = obj.at("log10_cr").get<double>();
    e.mean_error = obj.at("mean_error").get<double>();
    e.per_tensor_errors = obj.at("per_tensor_errors").get<std::vector<double>>();
    e.cr = std::pow(10.0, e.log10_cr);
    return e;
}

} // namespace

json iteration_to_json(const IterationRecord& rec) {
    json ranks = json::object();
    for (auto [i, j] : rec.ranks.edges())
        ranks[std::to_string(i) + "," + std::to_string(j)] = rec.ranks.at(i, j);
    json clamped = json::array();
    for (auto [i, j] : rec.clamped_edges) clamped.push_back(json::array({i, j}));
    return json{{"index", rec.index},
                {"ranks", ranks},
                {"train", eval_to_json(rec.train)},
                {"test", eval_to_json(rec.test)},
                {"reasoning", rec.reasoning ? json(*rec.reasoning) : json(nullptr)},
                {"clamped_edges", clamped},
                {"repeated", rec.repeated},
                {"wall_time_ms", rec.wall_time_ms}};
}

IterationRecord iteration_from_json(const json& obj) {
    IterationRecord rec;
    try {
        rec.index = obj.at("index").get<int>();
        const json& ranks = obj.at("ranks");
        int order = 0;
        for (const auto& [key, value] : ranks.items()) {
            const auto comma = key.find(',');
            if (comma == std::string::npos) throw ReportError("bad ranks key: " + key);
            order = std::max(order, std::stoi(key.substr(comma + 1)));
        }
        rec.ranks = RankAssignment(order);
        for (const auto& [key, value] : ranks.items()) {
            const auto comma = key.find(',');
            rec.ranks.set(std::stoi(key.substr(0, comma)), std::stoi(key.substr(comma + 1)),
                          value.get<Index>());
        }
        rec.train = eval_from_json(obj.at("train"));
        rec.test = eval_from_json(obj.at("test"));
        if (!obj.at("reasoning").is_null()) rec.reasoning = obj.at("reasoning").get<std::string>();
        for (const auto& pair : obj.at("clamped_edges"))
            rec.clamped_edges.emplace_back(pair.at(0).get<int>(), pair.at(1).get<int>());
        rec.repeated = obj.at("repeated").get<bool>();
        rec.wall_time_ms = obj.at("wall_time_ms").get<std::int64_t>();
    } catch (const json::exception& e) {
        throw ReportError("malformed run-log record" +
                          (obj.contains("index") ? " at index " + obj["index"].dump() : "") + ": " +
                          e.what());
    }
    return rec;
}

json summary_to_json(const RunLog& log, const std::string& config_hash) {
    return json{{"best_index", log.best_index},
                {"stopped_early", log.stopped_early},
                {"strategy", log.strategy_name},
                {"config_hash", config_hash}};
}

RunLogWriter::RunLogWriter(const std::string& path) : out_(path) {
    if (!out_) throw ReportError("cannot open run log for writing: " + path);
}

void RunLogWriter::write_record(const IterationRecord& rec) {
    out_ << iteration_to_json(rec).dump() << '\n';
    out_.flush();
}

void RunLogWriter::write_summary(const RunLog& log, const std::string& config_hash) {
    out_ << summary_to_json(log, config_hash).dump() << '\n';
    out_.flush();
}

LoadedRunLog read_run_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ReportError("cannot open run log: " + path);
    LoadedRunLog loaded;
    bool have_summary = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw ReportError("run log line " + std::to_string(line_no) +
                              " is not valid JSON: " + e.what());
        }
        if (obj.contains("best_index")) {
            try {
                loaded.log.best_index = obj.at("best_index").get<int>();
                loaded.log.stopped_early = obj.at("stopped_early").get<bool>();
                loaded.log.strategy_name = obj.at("strategy").get<std::string>();
                loaded.config_hash = obj.at("config_hash").get<std::string>();
            } catch (const json::exception& e) {
                throw ReportError("malformed run-log summary: " + std::string(e.what()));
            }
            have_summary = true;
        } else {
            loaded.log.iterations.push_back(iteration_from_json(obj));
        }
    }
    if (!have_summary) {
        // valid prefix of a crashed run; reconstruct the derivable fields
        double best = std::numeric_limits<double>::infinity();
        for (const auto& rec : loaded.log.iterations)
            if (rec.train.loss < best) {
                best = rec.train.loss;
                loaded.log.best_index = rec.index;
            }
    }
    return loaded;
}

} // namespace fctn
