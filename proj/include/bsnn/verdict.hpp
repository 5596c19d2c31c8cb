#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace bsnn {

enum class Backend : std::uint8_t { CnfSat, SmtLia };

enum class SolveStatus : std::uint8_t { Sat, Unsat };

struct SolveStats {
    std::uint64_t decisions = 0;
    std::uint64_t conflicts = 0;
    double wall_time_ms = 0.0;
};

struct SolverVerdict {
    SolveStatus status = SolveStatus::Unsat;
    // assignment over model variables, present iff sat and requested
    std::optional<std::vector<std::uint8_t>> model;
    SolveStats stats;
};

} // namespace bsnn
