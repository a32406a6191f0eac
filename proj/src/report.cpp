#include "fctn/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace fctn {

std::string format_loss(double loss) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", loss);
    return buf;
}

std::string format_error_scaled(double error) {
    const double scaled = error * 1e12;
    if (scaled > 1000.0) return "---";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", scaled);
    std::string s = buf;
    if (s.size() > 2 && s.compare(s.size() - 2, 2, ".0") == 0) s.erase(s.size() - 2);
    return s;
}

namespace {

/// Mark cells whose rounded value equals the best (bold) or the distinct
/// second-best (underline) of the row, matching the published table style.
std::vector<std::string> mark_obj_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    std::set<std::string> distinct;
    for (double v : values) distinct.insert(format_loss(v));
    auto as_num = [](const std::string& s) { return std::stod(s); };
    std::string best, second;
    for (const auto& s : distinct) {
        if (best.empty() || as_num(s) < as_num(best)) {
            second = best;
            best = s;
        } else if (second.empty() || as_num(s) < as_num(second)) {
            second = s;
        }
    }
    for (double v : values) {
        const std::string s = format_loss(v);
        if (s == best && values.size() > 1)
            cells.push_back("**" + s + "**");
        else if (s == second)
            cells.push_back("<u>" + s + "</u>");
        else
            cells.push_back(s);
    }
    return cells;
}

void append_row(std::ostringstream& out, const std::string& label,
                const std::vector<std::string>& cells) {
    out << "| " << label << " |";
    for (const auto& c : cells) out << ' ' << c << " |";
    out << '\n';
}

} // namespace

std::string render_report_table(const RunLog& log) {
    if (log.iterations.empty()) throw ReportError("run log has no iterations");
    const std::size_t n = log.iterations.size();
    std::vector<double> train_loss(n), test_loss(n), train_err(n), test_err(n), log_cr(n);
    for (std::size_t i = 0; i < n; ++i) {
        const IterationRecord& r = log.iterations[i];
        train_loss[i] = r.train.loss;
        test_loss[i] = r.test.loss;
        train_err[i] = r.train.mean_error;
        test_err[i] = r.test.mean_error;
        log_cr[i] = r.train.log10_cr;
    }

    std::ostringstream out;
    out << "| Iteration |";
    for (const auto& r : log.iterations) out << ' ' << r.index << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < n; ++i) out << "---|";
    out << '\n';

    append_row(out, "Train Obj. Func.", mark_obj_row(train_loss));
    std::vector<std::string> cells;
    for (double e : train_err) cells.push_back(format_error_scaled(e));
    append_row(out, "Train Error", cells);
    append_row(out, "Test Obj. Func.", mark_obj_row(test_loss));
    cells.clear();
    for (double e : test_err) cells.push_back(format_error_scaled(e));
    append_row(out, "Test Error", cells);
    cells.clear();
    for (double c : log_cr) cells.push_back(format_loss(c));
    append_row(out, "Log CR", cells);
    return out.str();
}

std::string render_report(const std::vector<RunLog>& logs) {
    if (logs.empty()) throw ReportError("no run logs to report");
    std::ostringstream out;
    out << "# Rank search report\n\n";
    out << "Losses and Log CR rounded to two decimal places; errors scaled by 1e12"
           " (values above 1000 after scaling shown as ---).\n";
    for (const RunLog& log : logs) {
        out << "\n## " << log.strategy_name << "\n\n";
        out << render_report_table(log);
        const auto best = std::find_if(log.iterations.begin(), log.iterations.end(),
                                       [&](const IterationRecord& r) {
                                           return r.index == log.best_index;
                                       });
        if (best != log.iterations.end())
            out << "\nBest iteration: " << log.best_index << " (train loss "
                << format_loss(best->train.loss) << ", ranks " << best->ranks.to_string()
                << ")" << (log.stopped_early ? ", stopped early" : "") << ".\n";
    }
    return out.str();
}

std::string render_plot_csv(const RunLog& log) {
    std::ostringstream out;
    out << "iteration,train_loss,test_loss,log10_cr\n";
    char buf[160];
    for (const auto& r : log.iterations) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", r.index, r.train.loss,
                      r.test.loss, r.train.log10_cr);
        out << buf;
    }
    return out.str();
}

} // namespace fctn
