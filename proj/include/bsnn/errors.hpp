#pragma once

#include <stdexcept>
#include <string>

namespace bsnn {

// Error categories map 1:1 onto CLI exit codes.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// External or embedded solver failed (crash, timeout, garbage output).
// Never used to report a sat/unsat verdict.
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CertificateError : std::runtime_error {
    explicit CertificateError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace bsnn
