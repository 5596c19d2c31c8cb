#include <doctest.h>

#include "bsnn/encode.hpp"
#include "test_helpers.hpp"

using namespace bsnn;
using bsnn::testing::input_from_bits;
using bsnn::testing::random_micro_arch;

namespace {

// all model-variable assignments satisfying the equations, by enumeration
std::vector<Interpretation> equation_solutions(const CausalModel& model) {
    std::vector<Interpretation> out;
    const int n = model.variable_count();
    REQUIRE(n <= 14);
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        Interpretation I(n);
        for (int v = 0; v < n; ++v) I[v] = (mask >> v) & 1;
        if (model.all_equations_hold(I)) out.push_back(std::move(I));
    }
    return out;
}

sat::Solver load(const CnfFormula& f, bool& ok) {
    sat::Solver solver;
    while (solver.num_vars() < f.variable_count) solver.new_var();
    ok = true;
    for (const auto& clause : f.clauses) {
        std::vector<sat::Lit> lits;
        for (const int l : clause) lits.push_back(sat::Lit::make(std::abs(l) - 1, l < 0));
        if (!solver.add_clause(std::move(lits))) ok = false;
    }
    return solver;
}

} // namespace

TEST_CASE("cnf encoding is equisatisfiable with the equations, projection-exact") {
    // micro models: CNF solutions projected to model variables must equal the
    // truth-table solutions of the equations, in both directions
    for (int trial = 0; trial < 25; ++trial) {
        CounterRng rng(1234 + trial);
        const auto scale = trial % 2 ? WeightScale::Ternary : WeightScale::Binary;
        const auto arch = random_micro_arch(rng, 2, 2, 1, scale);
        const int t_end = 1 + static_cast<int>(rng.next_below(2));
        if (arch.neuron_count() * (t_end + 1) > 14) continue;
        InputSequence input(arch.input_count(), t_end);
        for (int t = 1; t <= t_end; ++t)
            for (int i = 0; i < arch.input_count(); ++i)
                input.set_bit(t, i, static_cast<int>(rng.next_below(2)));
        const auto model = build_bcm(arch, simulate(arch, input));
        const auto f = encode_cnf(model);

        bool ok = true;
        auto solver = load(f, ok);
        REQUIRE(ok);

        const auto solutions = equation_solutions(model);
        // direction 1: every equation solution extends to a CNF solution
        for (const auto& I : solutions) {
            std::vector<sat::Lit> assumps;
            for (int v = 0; v < model.variable_count(); ++v)
                assumps.push_back(sat::Lit::make(v, I[v] == 0));
            CHECK(solver.solve(assumps));
        }
        // direction 2: every projected CNF solution satisfies the equations
        // (enumerate by blocking clauses on model variables)
        bool ok2 = true;
        auto enumerator = load(f, ok2);
        REQUIRE(ok2);
        int found = 0;
        while (enumerator.solve()) {
            Interpretation I(model.variable_count());
            std::vector<sat::Lit> block;
            for (int v = 0; v < model.variable_count(); ++v) {
                I[v] = enumerator.model_value(v) == sat::Value::True ? 1 : 0;
                block.push_back(sat::Lit::make(v, I[v] != 0));
            }
            CHECK(model.all_equations_hold(I));
            ++found;
            REQUIRE(found <= static_cast<int>(solutions.size()));
            if (!enumerator.add_clause(block)) break;
        }
        CHECK(found == static_cast<int>(solutions.size()));
    }
}

TEST_CASE("forced-true conditions emit no counter clauses") {
    NetworkArchitecture arch(2, 1, 1, WeightScale::Binary);
    arch.set_weight({Layer::Hidden, 0}, {Layer::Input, 0}, 1);
    arch.set_weight({Layer::Output, 0}, {Layer::Hidden, 0}, 1);
    arch.set_threshold({Layer::Hidden, 0}, 0); // tau <= 0: condition always true
    arch.set_threshold({Layer::Output, 0}, 1);
    const auto model = build_bcm(arch, simulate(arch, InputSequence(2, 1)));
    const auto f = encode_cnf(model);
    // the hidden equation at t=1 reduces to the unit clause {p}
    const int p = model.var_id({Layer::Hidden, 0}, 1) + 1;
    bool unit_found = false;
    for (const auto& clause : f.clauses)
        unit_found |= clause == std::vector<int>{p};
    CHECK(unit_found);
}

TEST_CASE("fixed assignments become unit clauses and constrain the result") {
    NetworkArchitecture arch(2, 1, 1, WeightScale::Binary);
    arch.set_weight({Layer::Hidden, 0}, {Layer::Input, 0}, 1);
    arch.set_weight({Layer::Output, 0}, {Layer::Hidden, 0}, 1);
    const auto model = build_bcm(arch, simulate(arch, InputSequence(2, 1)));

    const int input_var = model.var_id({Layer::Input, 0}, 1);
    const int hidden_var = model.var_id({Layer::Hidden, 0}, 1);
    const auto f = encode_cnf(model, {{input_var, true}, {hidden_var, false}});
    bool ok = true;
    auto solver = load(f, ok);
    // input fires and tau=1, so the hidden must fire: contradiction
    CHECK((ok && !solver.solve()) == true);
}

TEST_CASE("entailment session matches one-shot encodings and the semantics") {
    for (int trial = 0; trial < 20; ++trial) {
        CounterRng rng(777 + trial);
        const auto scale = trial % 2 ? WeightScale::Ternary : WeightScale::Binary;
        const auto arch = random_micro_arch(rng, 3, 2, 1, scale);
        const int t_end = 1;
        InputSequence input(arch.input_count(), t_end);
        for (int i = 0; i < arch.input_count(); ++i)
            input.set_bit(1, i, static_cast<int>(rng.next_below(2)));
        const auto trace = simulate(arch, input);
        const auto model = build_bcm(arch, trace);

        // conclusion: the actual output pattern at t=1
        std::vector<BoolExpr> lits;
        for (int z = 0; z < arch.output_count(); ++z) {
            const BoolExpr v = BoolExpr::var(model.var_id({Layer::Output, z}, 1));
            lits.push_back(trace.firing(1, arch.global_index({Layer::Output, z})) ? v
                                                                                  : BoolExpr::negate(v));
        }
        const BoolExpr omega0 = BoolExpr::conj(lits);

        // complete input term entails its own output
        PartialAssignment full;
        for (int t = 0; t <= t_end; ++t)
            for (int i = 0; i < arch.input_count(); ++i)
                full.emplace_back(model.var_id({Layer::Input, i}, t), input.bit(t, i) != 0);
        CHECK(check_entailment(model, full, omega0, Backend::CnfSat));

        // empty assumptions: entailed iff no input flips the output
        bool flippable = false;
        for (unsigned mask = 0; mask < (1u << arch.input_count()); ++mask) {
            auto other = input_from_bits(arch.input_count(), 1, mask);
            const auto other_trace = simulate(arch, other);
            for (int z = 0; z < arch.output_count(); ++z)
                if (other_trace.firing(1, arch.global_index({Layer::Output, z})) !=
                    trace.firing(1, arch.global_index({Layer::Output, z})))
                    flippable = true;
        }
        CHECK(check_entailment(model, {}, omega0, Backend::CnfSat) == !flippable);

        // a tautology conclusion is always entailed
        CHECK(check_entailment(model, {}, BoolExpr::yes(), Backend::CnfSat));

        // incremental session verdicts match from-scratch sessions
        CnfEntailmentSession session(model, omega0);
        for (int round = 0; round < 6; ++round) {
            PartialAssignment part;
            for (const auto& [var, value] : full)
                if (rng.next_below(2)) part.emplace_back(var, value);
            const bool incremental = session.entails(part);
            CnfEntailmentSession fresh(model, omega0);
            CHECK(incremental == fresh.entails(part));
        }
    }
}
