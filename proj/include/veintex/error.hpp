#pragma once

#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace veintex {

enum class ErrorKind {
    io,
    format,
    parameter,
    size,
    data,
    degenerate_input,
    structure,
    empty_dataset,
    split,
    fit,
    training,
    convergence,
    report,
    record,
    config,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::io: return "io error";
    case ErrorKind::format: return "format error";
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::size: return "size error";
    case ErrorKind::data: return "data error";
    case ErrorKind::degenerate_input: return "degenerate-input error";
    case ErrorKind::structure: return "structure error";
    case ErrorKind::empty_dataset: return "empty-dataset error";
    case ErrorKind::split: return "split error";
    case ErrorKind::fit: return "fit error";
    case ErrorKind::training: return "training error";
    case ErrorKind::convergence: return "convergence error";
    case ErrorKind::report: return "report error";
    case ErrorKind::record: return "record error";
    case ErrorKind::config: return "config error";
    }
    return "error";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised by the SMO solver; carries the largest KKT violation seen when the
/// iteration budget ran out.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double worst_residual)
        : Error(ErrorKind::convergence, what), worst_residual_(worst_residual) {}

    double worst_residual() const noexcept { return worst_residual_; }

private:
    double worst_residual_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

// Warnings go through a replaceable sink so tests can capture them.
using WarningSink = std::function<void(std::string_view)>;

inline WarningSink& warning_sink() {
    static WarningSink sink = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
    return sink;
}

inline void warn(std::string_view msg) {
    if (warning_sink()) warning_sink()(msg);
}

} // namespace veintex
