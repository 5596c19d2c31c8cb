#pragma once

#include <chrono>
#include <span>
#include <string>

#include "bsnn/causal_model.hpp"
#include "bsnn/cnf.hpp"
#include "bsnn/errors.hpp"
#include "bsnn/verdict.hpp"

namespace bsnn {

using PartialAssignment = std::vector<std::pair<int, bool>>;

struct SmtScript {
    std::string logic = "QF_LIA";
    std::string text;
};

// Distinct failure modes of the external solver; none of them is a verdict.
struct SolverTimeoutError : SolverError {
    explicit SolverTimeoutError(const std::string& msg) : SolverError(msg) {}
};
struct SolverCrashError : SolverError {
    explicit SolverCrashError(const std::string& msg) : SolverError(msg) {}
};
struct SolverOutputError : SolverError {
    explicit SolverOutputError(const std::string& msg) : SolverError(msg) {}
};

std::string smt_var_name(const CausalModel& model, int var_id);

// Declarations, {0,1} domain constraints (hyp) and the equation assertions
// for every endogenous variable, in the linear-integer form: sums over
// positive predecessors minus sums over negative ones, compared to the
// threshold, with the carried potential added on the not-fired branch.
std::string emit_smt_core(const CausalModel& model);

// Full one-shot script: core + assumption term + negated conclusion +
// (check-sat). Unsat iff the entailment holds.
SmtScript emit_smtlib(const CausalModel& model, const PartialAssignment& assumptions,
                      const BoolExpr& conclusion, bool get_values = false);

// Pipes the script into `command` (run through the shell), parses the first
// sat/unsat status token, optionally collects (get-value ...) results.
SolverVerdict run_external_solver(const SmtScript& script, const std::string& command,
                                  std::chrono::milliseconds timeout,
                                  const CausalModel* model_for_values = nullptr);

// BSNN_SMT_SOLVER if set, otherwise a liasolve binary next to the current
// executable, otherwise "liasolve" on PATH.
std::string default_smt_solver_command();

// Persistent solver process speaking incremental SMT-LIB2 (push/pop).
class SmtSolverProcess {
public:
    SmtSolverProcess(const std::string& command, std::chrono::milliseconds timeout);
    ~SmtSolverProcess();
    SmtSolverProcess(const SmtSolverProcess&) = delete;
    SmtSolverProcess& operator=(const SmtSolverProcess&) = delete;

    void send(const std::string& text);
    // sends (check-sat) and blocks for the status line
    SolveStatus check_sat();
    std::string read_line();

private:
    void kill_process();

    int to_child_ = -1;
    int from_child_ = -1;
    long pid_ = -1;
    std::chrono::milliseconds timeout_;
    std::string buffer_;
};

// Equation core sent once; each entails() call runs inside a push/pop frame.
class SmtEntailmentSession {
public:
    SmtEntailmentSession(const CausalModel& model, const BoolExpr& conclusion,
                         const std::string& command,
                         std::chrono::milliseconds timeout = std::chrono::milliseconds(600000));

    bool entails(std::span<const std::pair<int, bool>> assumptions);
    std::uint64_t queries() const { return queries_; }

private:
    const CausalModel& model_;
    SmtSolverProcess process_;
    std::uint64_t queries_ = 0;
};

} // namespace bsnn
