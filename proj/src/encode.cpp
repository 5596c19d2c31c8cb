#include "bsnn/encode.hpp"

#include <chrono>

#include "bsnn/cardinality.hpp"
#include "bsnn/errors.hpp"
#include "bsnn/smtlib.hpp"

namespace bsnn {

namespace {

// literal for one equation branch; CardResult constants pass through
CardResult branch_literal(CnfFormula& f, const CausalModel& model, NeuronId neuron, int time,
                          const SliceCond& cond) {
    switch (cond.kind) {
    case CondKind::True: return {CardKind::True};
    case CondKind::False: return {CardKind::False};
    case CondKind::Threshold: break;
    }
    const int n = model.arch().neuron_count();
    std::vector<int> lits;
    for (const int g : model.positive_pre(neuron)) lits.push_back(time * n + g + 1);
    // x in {0,1}: -x contributes (1 - (1-x)), so count the negated literal
    for (const int g : model.negative_pre(neuron)) lits.push_back(-(time * n + g + 1));
    const int rewritten = cond.bound + static_cast<int>(model.negative_pre(neuron).size());
    return at_least(f, lits, rewritten);
}

void emit_equation(CnfFormula& f, const CausalModel& model, NeuronId neuron, int time) {
    const int p = model.var_id(neuron, time) + 1;
    if (time == 0) {
        f.add({-p}); // p_{X,0} <-> false
        return;
    }
    const Equation& eq = model.equation(neuron, time);
    const int q = model.var_id(neuron, time - 1) + 1;

    // Share one counter between the two branches when both need it.
    CardResult a0, a1;
    if (eq.carry.kind == CondKind::Threshold && eq.fresh.kind == CondKind::Threshold) {
        const int n = model.arch().neuron_count();
        std::vector<int> lits;
        for (const int g : model.positive_pre(neuron)) lits.push_back(time * n + g + 1);
        for (const int g : model.negative_pre(neuron)) lits.push_back(-(time * n + g + 1));
        const int shift = static_cast<int>(model.negative_pre(neuron).size());
        const auto results =
            at_least_multi(f, lits, {eq.carry.bound + shift, eq.fresh.bound + shift});
        a0 = results[0];
        a1 = results[1];
    } else {
        a0 = branch_literal(f, model, neuron, time, eq.carry);
        a1 = branch_literal(f, model, neuron, time, eq.fresh);
    }

    // p <-> ((q | A0) & (!q | A1)), with constants folded away:
    //   {-p, q, A0}  {-p, -q, A1}  {p, -q, -A1}  {p, q, -A0}
    auto add_folded = [&f](std::vector<int> base, const CardResult& a, bool positive) {
        if (a.kind == CardKind::Literal) {
            base.push_back(positive ? a.literal : -a.literal);
            f.add(std::move(base));
            return;
        }
        const bool lit_true = (a.kind == CardKind::True) == positive;
        if (lit_true) return; // clause satisfied
        f.add(std::move(base));
    };
    add_folded({-p, q}, a0, true);
    add_folded({-p, -q}, a1, true);
    add_folded({p, -q}, a1, false);
    add_folded({p, q}, a0, false);
}

} // namespace

CnfFormula encode_cnf(const CausalModel& model, const PartialAssignment& fixed) {
    CnfFormula f;
    f.variable_count = model.variable_count();
    f.model_variable_count = model.variable_count();
    const auto& arch = model.arch();
    for (int t = 0; t <= model.t_end(); ++t)
        for (int g = arch.input_count(); g < arch.neuron_count(); ++g)
            emit_equation(f, model, arch.neuron_at(g), t);
    for (const auto& [var, value] : fixed) {
        if (var < 0 || var >= model.variable_count())
            throw ConfigError("fixed assignment outside the model variable range");
        f.add({value ? var + 1 : -(var + 1)});
    }
    return f;
}

namespace {

void load_into_solver(sat::Solver& solver, const CnfFormula& f, bool& core_unsat) {
    while (solver.num_vars() < f.variable_count) solver.new_var();
    for (const auto& clause : f.clauses) {
        std::vector<sat::Lit> lits;
        lits.reserve(clause.size());
        for (const int l : clause) lits.push_back(sat::Lit::make(std::abs(l) - 1, l < 0));
        if (!solver.add_clause(std::move(lits))) {
            core_unsat = true;
            return;
        }
    }
}

} // namespace

CnfEntailmentSession::CnfEntailmentSession(const CausalModel& model, const BoolExpr& conclusion) {
    CnfFormula f = encode_cnf(model, {});
    model_variable_count_ = f.model_variable_count;
    cnf_assert(f, BoolExpr::negate(conclusion));
    load_into_solver(solver_, f, core_unsat_);
}

bool CnfEntailmentSession::entails(std::span<const std::pair<int, bool>> assumptions) {
    ++queries_;
    if (core_unsat_) return true;
    std::vector<sat::Lit> lits;
    lits.reserve(assumptions.size());
    for (const auto& [var, value] : assumptions) lits.push_back(sat::Lit::make(var, !value));
    return !solver_.solve(lits);
}

SolverVerdict CnfEntailmentSession::query(std::span<const std::pair<int, bool>> assumptions,
                                          bool want_model) {
    const auto before = solver_.stats();
    const auto start = std::chrono::steady_clock::now();
    const bool unsat = entails(assumptions);
    const auto end = std::chrono::steady_clock::now();

    SolverVerdict verdict;
    verdict.status = unsat ? SolveStatus::Unsat : SolveStatus::Sat;
    verdict.stats.decisions = solver_.stats().decisions - before.decisions;
    verdict.stats.conflicts = solver_.stats().conflicts - before.conflicts;
    verdict.stats.wall_time_ms = std::chrono::duration<double, std::milli>(end - start).count();
    if (!unsat && want_model) {
        std::vector<std::uint8_t> model(model_variable_count_, 0);
        for (int v = 0; v < model_variable_count_; ++v)
            model[v] = solver_.model_value(v) == sat::Value::True ? 1 : 0;
        verdict.model = std::move(model);
    }
    return verdict;
}

bool check_entailment(const CausalModel& model, const PartialAssignment& assumptions,
                      const BoolExpr& conclusion, Backend backend) {
    if (backend == Backend::CnfSat) {
        CnfEntailmentSession session(model, conclusion);
        return session.entails(assumptions);
    }
    SmtEntailmentSession session(model, conclusion, default_smt_solver_command());
    return session.entails(assumptions);
}

} // namespace bsnn
