#pragma once

// CSV emission and parsing for traces, trial tables, sweeps and regression
// data. Comma separated, header row mandatory, numbers at 17 significant
// digits so values round-trip exactly.

#include "robreg/problem.hpp"
#include "robreg/trace.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace robreg {

inline constexpr const char* kTraceHeader = "iter,phase,stepsize,objective,rel_error";
inline constexpr const char* kTrialsHeader = "method,seed,final_error,iters,wall_ms";
inline constexpr const char* kSweepHeader = "epsilon,method,median_error";

std::string format_double(double value);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

/// Splits comma-separated lines. Blank lines are skipped; every row must have
/// as many fields as the header (ParseError with the line number otherwise).
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);

void write_trace_csv(std::ostream& out, const Trace& trace);
void write_trace_csv(const std::filesystem::path& path, const Trace& trace);
Trace parse_trace_csv(std::istream& in);

/// Regression data: column `y` first, then features. Returns a problem
/// without truth.
VectorProblem read_regression_csv(std::istream& in);
VectorProblem read_regression_csv_file(const std::filesystem::path& path);

/// Opens `path` for writing, creating parent directories; IoError with the
/// path on failure.
std::ofstream open_output(const std::filesystem::path& path);

double parse_double(const std::string& field, std::size_t line);

}  // namespace robreg
