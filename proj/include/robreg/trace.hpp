#pragma once

#include "robreg/errors.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace robreg {

/// One solver iteration. `stepsize` is the step taken to produce the iterate;
/// `objective`, `rel_error` and `support_size` describe the iterate after the
/// step. support_size is the number of nonzeros (sparse) or the numerical rank
/// (low-rank).
struct TraceRecord {
    std::size_t iter = 0;
    int phase = 1;
    double stepsize = 0.0;
    double objective = 0.0;
    std::optional<double> rel_error;
    std::size_t support_size = 0;
};

using Trace = std::vector<TraceRecord>;

/// Raised when an iterate becomes non-finite or the objective blows up; the
/// partial trace is kept for diagnosis.
class DivergedError : public Error {
public:
    DivergedError(const std::string& what, Trace trace)
        : Error(what), trace_(std::move(trace)) {}

    const Trace& trace() const noexcept { return trace_; }

private:
    Trace trace_;
};

}  // namespace robreg
