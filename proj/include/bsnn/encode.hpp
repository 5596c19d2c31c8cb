#pragma once

#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "bsnn/causal_model.hpp"
#include "bsnn/cnf.hpp"
#include "bsnn/sat_solver.hpp"
#include "bsnn/verdict.hpp"

namespace bsnn {

// (model variable id, value) pairs
using PartialAssignment = std::vector<std::pair<int, bool>>;

// Lowers every equation of the model to clauses: structure-preserving
// biconditional clausification with sequential-counter cardinality outputs
// for the threshold conditions. Ternary sums are rewritten to pure
// cardinality over negated literals. `fixed` adds unit clauses.
CnfFormula encode_cnf(const CausalModel& model, const PartialAssignment& fixed = {});

// One equation core, many queries under assumptions. The conclusion is
// negated and baked into the core, so entails(A) decides whether
// equations && A && !conclusion is unsatisfiable.
class CnfEntailmentSession {
public:
    CnfEntailmentSession(const CausalModel& model, const BoolExpr& conclusion);

    bool entails(std::span<const std::pair<int, bool>> assumptions);
    SolverVerdict query(std::span<const std::pair<int, bool>> assumptions, bool want_model);

    std::uint64_t queries() const { return queries_; }
    const sat::SolverStats& solver_stats() const { return solver_.stats(); }

private:
    sat::Solver solver_;
    int model_variable_count_ = 0;
    bool core_unsat_ = false;
    std::uint64_t queries_ = 0;
};

// Single-shot entailment on the chosen backend: does
// (/\ equations) && assumptions entail `conclusion`?
bool check_entailment(const CausalModel& model, const PartialAssignment& assumptions,
                      const BoolExpr& conclusion, Backend backend);

} // namespace bsnn
