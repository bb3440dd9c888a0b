#include "robreg/csv.hpp"

#include "robreg/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace robreg {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string strip(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    return s.substr(i);
}

std::size_t parse_count(const std::string& field, std::size_t line) {
    std::size_t value = 0;
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ParseError("expected a non-negative integer, got '" + field + "'", line);
    }
    return value;
}

}  // namespace

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

double parse_double(const std::string& field, std::size_t line) {
    const std::string s = strip(field);
    if (s.empty()) throw ParseError("empty numeric field", line);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) throw ParseError("not a number: '" + s + "'", line);
    return v;
}

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip(line);
        if (line.empty()) continue;
        auto fields = split_fields(line);
        for (auto& f : fields) f = strip(f);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw ParseError("expected " + std::to_string(table.header.size()) + " fields, got " +
                                 std::to_string(fields.size()),
                             lineno);
        }
        table.rows.push_back(std::move(fields));
        table.line_numbers.push_back(lineno);
    }
    if (!have_header) throw ParseError("missing header row", lineno == 0 ? 1 : lineno);
    return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    try {
        return read_csv(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.message(), e.line());
    }
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create directory '" + path.parent_path().string() +
                          "': " + ec.message());
        }
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
    out << kTraceHeader << '\n';
    for (const auto& r : trace) {
        out << r.iter << ',' << r.phase << ',' << format_double(r.stepsize) << ','
            << format_double(r.objective) << ',';
        if (r.rel_error) out << format_double(*r.rel_error);
        out << '\n';
    }
}

void write_trace_csv(const std::filesystem::path& path, const Trace& trace) {
    auto out = open_output(path);
    write_trace_csv(out, trace);
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Trace parse_trace_csv(std::istream& in) {
    const CsvTable table = read_csv(in);
    const std::vector<std::string> expected = split_fields(kTraceHeader);
    if (table.header != expected) {
        throw ParseError("trace header must be '" + std::string(kTraceHeader) + "'", 1);
    }
    Trace trace;
    for (std::size_t k = 0; k < table.rows.size(); ++k) {
        const auto& f = table.rows[k];
        const std::size_t line = table.line_numbers[k];
        TraceRecord r;
        r.iter = parse_count(f[0], line);
        r.phase = static_cast<int>(parse_count(f[1], line));
        r.stepsize = parse_double(f[2], line);
        r.objective = parse_double(f[3], line);
        if (!f[4].empty()) r.rel_error = parse_double(f[4], line);
        trace.push_back(r);
    }
    return trace;
}

VectorProblem read_regression_csv(std::istream& in) {
    const CsvTable table = read_csv(in);
    if (table.header.size() < 2) {
        throw ParseError("regression CSV needs a response column and at least one feature", 1);
    }
    if (table.header.front() != "y") {
        throw ParseError("first column must be named 'y', found '" + table.header.front() + "'", 1);
    }
    if (table.rows.empty()) throw ParseError("regression CSV has no data rows", 2);
    const Index n = static_cast<Index>(table.rows.size());
    const Index d = static_cast<Index>(table.header.size()) - 1;
    Matrix x(n, d);
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
        const auto& f = table.rows[static_cast<std::size_t>(i)];
        const std::size_t line = table.line_numbers[static_cast<std::size_t>(i)];
        y[i] = parse_double(f[0], line);
        for (Index j = 0; j < d; ++j) x(i, j) = parse_double(f[static_cast<std::size_t>(j + 1)], line);
        if (!std::isfinite(y[i]) || !x.row(i).allFinite()) {
            throw ParseError("non-finite value", line);
        }
    }
    return VectorProblem(std::move(x), std::move(y));
}

VectorProblem read_regression_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    try {
        return read_regression_csv(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.message(), e.line());
    }
}

}  // namespace robreg
