#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ptc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Failure categories shared by every module.
enum class ErrorCode {
    DimensionMismatch,
    NumericalBreakdown,
    NotPsd,
    ConfigInvalid,
    SingularSystem,
    TooFewSamples,
    EmptyScores,
    NoNeighbors,
    DomainError,
    ParseError,
    IoError,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::NotPsd: return "NotPsd";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::EmptyScores: return "EmptyScores";
    case ErrorCode::NoNeighbors: return "NoNeighbors";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& what) {
    if (!condition) throw Error(code, what);
}

inline void require_dims(Index got, Index expected, const char* what) {
    if (got != expected) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::string(what) + ": expected " + std::to_string(expected) + ", got " +
                        std::to_string(got));
    }
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace ptc
