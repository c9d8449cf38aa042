#pragma once

#include <stdexcept>
#include <string>

namespace fsel {

enum class ErrorKind {
    DimensionMismatch,
    NearSingular,
    ZeroColumn,
    DegenerateResidualizedColumn,
    DegenerateWeightedNorm,
    InvalidArgument,
    SingularDesign,
    Parse,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::DimensionMismatch: return "dimension mismatch";
    case ErrorKind::NearSingular: return "near singular";
    case ErrorKind::ZeroColumn: return "zero column";
    case ErrorKind::DegenerateResidualizedColumn: return "degenerate residualized column";
    case ErrorKind::DegenerateWeightedNorm: return "degenerate weighted norm";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::SingularDesign: return "singular design";
    case ErrorKind::Parse: return "parse error";
    }
    return "unknown";
}

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace fsel
