#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace qfid {

// %g formatting for messages; std::to_string prints fixed 6 decimals
inline std::string num_str(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Exit-code classes used by the CLI: 2, 3, 4.
enum class ErrorClass { Validation, Accuracy, OutOfRegion };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), cls_(cls), code_(std::move(code)) {}

    ErrorClass error_class() const noexcept { return cls_; }
    // short machine tag, e.g. "invalid-size"
    const std::string& code() const noexcept { return code_; }

private:
    ErrorClass cls_;
    std::string code_;
};

class ValidationError : public Error {
public:
    ValidationError(std::string code, const std::string& what)
        : Error(ErrorClass::Validation, std::move(code), what) {}
};

class AccuracyError : public Error {
public:
    AccuracyError(std::string code, const std::string& what, double estimate = 0.0)
        : Error(ErrorClass::Accuracy, std::move(code), what), estimate_(estimate) {}
    // best value reached before giving up (quadrature), 0 otherwise
    double estimate() const noexcept { return estimate_; }

private:
    double estimate_;
};

class OutOfRegionError : public Error {
public:
    OutOfRegionError(std::string code, const std::string& what)
        : Error(ErrorClass::OutOfRegion, std::move(code), what) {}
};

inline int exit_code(ErrorClass cls) noexcept {
    switch (cls) {
    case ErrorClass::Validation: return 2;
    case ErrorClass::Accuracy: return 3;
    case ErrorClass::OutOfRegion: return 4;
    }
    return 1;
}

} // namespace qfid
