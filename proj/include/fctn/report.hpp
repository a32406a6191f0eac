#pragma once

#include <string>
#include <vector>

#include "fctn/search.hpp"

namespace fctn {

/// Loss / Log CR rendering: two decimal places.
std::string format_loss(double loss);

/// Approximation-error rendering: scaled by 1e12, one decimal place with a
/// trailing ".0" dropped; values above 1000 after scaling become "---".
std::string format_error_scaled(double error);

/// Markdown table for one run: rows Train Obj. Func., Train Error (x1e12),
/// Test Obj. Func., Test Error, Log CR; one column per iteration. The best
/// objective value is bold, the second best underlined.
std::string render_report_table(const RunLog& log);

/// Full report: one section per run log, in the order given (a side-by-side
/// comparison when several are passed).
std::string render_report(const std::vector<RunLog>& logs);

/// Plot data: comma-delimited, header `iteration,train_loss,test_loss,log10_cr`.
std::string render_plot_csv(const RunLog& log);

} // namespace fctn
