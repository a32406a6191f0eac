#pragma once

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "fctn/search.hpp"

namespace fctn {

/// FNV-1a 64-bit hex digest, used as the reproducibility hash of the
/// canonical config document.
std::string fnv1a_hex(const std::string& text);

nlohmann::json iteration_to_json(const IterationRecord& rec);
IterationRecord iteration_from_json(const nlohmann::json& obj);

nlohmann::json summary_to_json(const RunLog& log, const std::string& config_hash);

/// Append-only JSON Lines writer: one object per iteration as it finishes,
/// then a final summary object. Every prefix of the file is itself a valid
/// log, so a crashed run leaves a usable record.
class RunLogWriter {
public:
    explicit RunLogWriter(const std::string& path);
    void write_record(const IterationRecord& rec);
    void write_summary(const RunLog& log, const std::string& config_hash);

private:
    std::ofstream out_;
};

struct LoadedRunLog {
    RunLog log;
    std::string config_hash; // empty when the summary line is absent
};

/// Read a JSON Lines run log; partial files (no summary) are accepted, with
/// best_index/stopped_early reconstructed from the records.
LoadedRunLog read_run_log(const std::string& path);

} // namespace fctn
