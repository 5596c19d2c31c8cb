#include <doctest.h>

#include <set>

#include "bsnn/causal_model.hpp"
#include "bsnn/errors.hpp"
#include "test_helpers.hpp"

using namespace bsnn;
using bsnn::testing::derive_by_equations;
using bsnn::testing::input_from_bits;
using bsnn::testing::random_micro_arch;

TEST_CASE("boolean expression evaluation follows the standard semantics") {
    std::vector<std::uint8_t> I{1, 0};
    CHECK(BoolExpr::no().eval(I) == false);
    CHECK(BoolExpr::conj({BoolExpr::var(0), BoolExpr::negate(BoolExpr::var(0))}).eval(I) == false);
    CHECK(BoolExpr::implies(BoolExpr::var(0), BoolExpr::var(1)).eval(I) == false);
    CHECK(BoolExpr::implies(BoolExpr::var(1), BoolExpr::var(0)).eval(I) == true);
    CHECK(BoolExpr::iff(BoolExpr::var(0), BoolExpr::var(1)).eval(I) == false);
    CHECK(BoolExpr::disj({}).eval(I) == false);
    CHECK(BoolExpr::conj({}).eval(I) == true);
    CHECK_THROWS_AS(BoolExpr::var(5).eval(I), ConfigError);
}

TEST_CASE("equations at time zero pin every endogenous variable to false") {
    NetworkArchitecture arch(2, 2, 1, WeightScale::Binary);
    const auto trace = simulate(arch, InputSequence(2, 2));
    const auto model = build_bcm(arch, trace);
    Interpretation I(model.variable_count(), 0);
    I[model.var_id({Layer::Hidden, 0}, 0)] = 1;
    CHECK(model.equation_holds({Layer::Hidden, 0}, 0, I) == false);
    I[model.var_id({Layer::Hidden, 0}, 0)] = 0;
    CHECK(model.equation_holds({Layer::Hidden, 0}, 0, I) == true);
}

TEST_CASE("carried potential moves the threshold between OR and AND shapes") {
    // R+(X) = {a, b}, tau = 2: with carry A=1 and no previous spike the
    // equation is p <-> (a | b); when the neuron fired previously, p <-> (a & b)
    NetworkArchitecture arch(2, 1, 1, WeightScale::Binary);
    arch.set_weight({Layer::Hidden, 0}, {Layer::Input, 0}, 1);
    arch.set_weight({Layer::Hidden, 0}, {Layer::Input, 1}, 1);
    arch.set_weight({Layer::Output, 0}, {Layer::Hidden, 0}, 1);
    arch.set_threshold({Layer::Hidden, 0}, 2);
    arch.set_threshold({Layer::Output, 0}, 1);

    // t=1: one input spike -> A(H,1) = 1, no spike; t=2 is the carry case
    InputSequence input(2, 2);
    input.set_bit(1, 0, 1);
    const auto trace = simulate(arch, input);
    REQUIRE(trace.potential(1, 0) == 1);
    REQUIRE(trace.firing(1, arch.global_index({Layer::Hidden, 0})) == 0);

    const auto model = build_bcm(arch, trace);
    const Equation& eq = model.equation({Layer::Hidden, 0}, 2);
    CHECK(eq.carried_potential == 1);
    CHECK(eq.carry.kind == CondKind::Threshold);
    CHECK(eq.carry.bound == 1); // tau - A = 1: an OR over {a,b}
    CHECK(eq.fresh.kind == CondKind::Threshold);
    CHECK(eq.fresh.bound == 2); // tau itself: an AND over {a,b}

    // exhaustive semantic check of both branches
    const int pa = model.var_id({Layer::Input, 0}, 2);
    const int pb = model.var_id({Layer::Input, 1}, 2);
    const int p = model.var_id({Layer::Hidden, 0}, 2);
    const int prev = model.var_id({Layer::Hidden, 0}, 1);
    for (int a = 0; a <= 1; ++a)
        for (int b = 0; b <= 1; ++b)
            for (int q = 0; q <= 1; ++q) {
                Interpretation I(model.variable_count(), 0);
                I[pa] = a;
                I[pb] = b;
                I[prev] = q;
                const bool expect = q ? (a && b) : (a || b);
                I[p] = expect ? 1 : 0;
                CHECK(model.equation_holds({Layer::Hidden, 0}, 2, I));
                I[p] = expect ? 0 : 1;
                CHECK(!model.equation_holds({Layer::Hidden, 0}, 2, I));
            }
}

TEST_CASE("simulator traces satisfy their own causal model") {
    for (int trial = 0; trial < 40; ++trial) {
        CounterRng rng(42 + trial);
        const auto scale = trial % 2 == 0 ? WeightScale::Binary : WeightScale::Ternary;
        const auto arch = random_micro_arch(rng, 4, 3, 2, scale);
        const int t_end = 1 + static_cast<int>(rng.next_below(2));
        InputSequence input(arch.input_count(), t_end);
        for (int t = 1; t <= t_end; ++t)
            for (int i = 0; i < arch.input_count(); ++i)
                input.set_bit(t, i, static_cast<int>(rng.next_below(2)));
        CHECK(check_compatibility(arch, simulate(arch, input)));
    }
}

TEST_CASE("flipping any firing bit breaks compatibility somewhere") {
    CounterRng rng(7);
    const auto arch = random_micro_arch(rng, 3, 2, 1);
    InputSequence input(arch.input_count(), 2);
    for (int t = 1; t <= 2; ++t)
        for (int i = 0; i < arch.input_count(); ++i)
            input.set_bit(t, i, static_cast<int>(rng.next_below(2)));
    const auto trace = simulate(arch, input);
    const auto model = build_bcm(arch, trace);

    for (int t = 0; t <= 2; ++t) {
        for (int g = arch.input_count(); g < arch.neuron_count(); ++g) {
            auto I = interpretation_from_trace(model, trace);
            I[model.var_id(arch.neuron_at(g), t)] ^= 1;
            CHECK(!model.all_equations_hold(I));
        }
    }
}

TEST_CASE("threshold equations match the literal subset expansion by truth table") {
    // fan-in <= 8: compare stored (simplified) equations against the
    // Def-3-shaped subset disjunction on every assignment of the slice
    for (int trial = 0; trial < 30; ++trial) {
        CounterRng rng(500 + trial);
        const auto scale = trial % 2 == 0 ? WeightScale::Binary : WeightScale::Ternary;
        const auto arch = random_micro_arch(rng, 4, 3, 2, scale);
        InputSequence input(arch.input_count(), 2);
        for (int t = 1; t <= 2; ++t)
            for (int i = 0; i < arch.input_count(); ++i)
                input.set_bit(t, i, static_cast<int>(rng.next_below(2)));
        const auto trace = simulate(arch, input);
        const auto model = build_bcm(arch, trace);

        for (int t = 1; t <= 2; ++t) {
            for (int g = arch.input_count(); g < arch.neuron_count(); ++g) {
                const NeuronId id = arch.neuron_at(g);
                const BoolExpr expanded = model.omega_subset_expr(id, t);
                std::set<int> vars = expanded.vars();
                vars.insert(model.var_id(id, t));
                vars.insert(model.var_id(id, t - 1));
                const int n = model.arch().neuron_count();
                // free variables: predecessors at slice t, prev, and p itself
                std::vector<int> free(vars.begin(), vars.end());
                REQUIRE(free.size() <= 12);
                for (unsigned mask = 0; mask < (1u << free.size()); ++mask) {
                    Interpretation I(model.variable_count(), 0);
                    for (std::size_t b = 0; b < free.size(); ++b)
                        I[free[b]] = (mask >> b) & 1;
                    CHECK(model.equation_holds(id, t, I) == expanded.eval(I));
                }
                (void)n;
            }
        }
    }
}

TEST_CASE("equation bodies never mention their own variable") {
    CounterRng rng(11);
    const auto arch = random_micro_arch(rng, 4, 3, 2, WeightScale::Ternary);
    InputSequence input(arch.input_count(), 2);
    input.set_bit(1, 0, 1);
    const auto model = build_bcm(arch, simulate(arch, input));
    for (int t = 0; t <= 2; ++t)
        for (int g = arch.input_count(); g < arch.neuron_count(); ++g) {
            const NeuronId id = arch.neuron_at(g);
            const auto vars = model.omega_vars(id, t);
            for (const int q : vars) CHECK(q != model.var_id(id, t));
        }
}

TEST_CASE("causal graph edges follow variable occurrence") {
    // hidden with a single positive predecessor: edges from the input at t
    // and from its own history
    NetworkArchitecture arch(1, 1, 1, WeightScale::Binary);
    arch.set_weight({Layer::Hidden, 0}, {Layer::Input, 0}, 1);
    arch.set_weight({Layer::Output, 0}, {Layer::Hidden, 0}, 1);
    arch.set_threshold({Layer::Hidden, 0}, 1);
    arch.set_threshold({Layer::Output, 0}, 1);
    InputSequence input(1, 1);
    input.set_bit(1, 0, 1);
    const auto model = build_bcm(arch, simulate(arch, input));
    const auto edges = model.causal_graph();

    const int p_h1 = model.var_id({Layer::Hidden, 0}, 1);
    const int p_h0 = model.var_id({Layer::Hidden, 0}, 0);
    const int p_i1 = model.var_id({Layer::Input, 0}, 1);
    const auto has = [&edges](int q, int p) {
        return std::find(edges.begin(), edges.end(), std::make_pair(q, p)) != edges.end();
    };
    CHECK(has(p_i1, p_h1));
    CHECK(has(p_h0, p_h1));

    // t=0 equations contribute no incoming edges
    for (const auto& [q, p] : edges) CHECK(model.var_of(p).time > 0);
}

TEST_CASE("fully connected 2-2-1 single-step graph has the counted edges") {
    NetworkArchitecture arch(2, 2, 1, WeightScale::Binary);
    for (int h = 0; h < 2; ++h)
        for (int i = 0; i < 2; ++i) arch.set_weight({Layer::Hidden, h}, {Layer::Input, i}, 1);
    for (int h = 0; h < 2; ++h) arch.set_weight({Layer::Output, 0}, {Layer::Hidden, h}, 1);
    arch.set_threshold({Layer::Hidden, 0}, 1);
    arch.set_threshold({Layer::Hidden, 1}, 2);
    arch.set_threshold({Layer::Output, 0}, 1);

    const auto model = build_bcm(arch, simulate(arch, InputSequence(2, 1)));
    const auto edges = model.causal_graph();
    // cross edges: 2x2 input->hidden plus 2x1 hidden->output, plus one
    // self-history edge per non-input neuron
    CHECK(edges.size() == 4 + 2 + 3);
}

TEST_CASE("degenerate bounds collapse eagerly to constants") {
    NetworkArchitecture arch(2, 2, 1, WeightScale::Binary);
    arch.set_weight({Layer::Hidden, 0}, {Layer::Input, 0}, 1);
    // hidden 1 has no positive inputs at all
    arch.set_threshold({Layer::Hidden, 0}, 0);  // always reached
    arch.set_threshold({Layer::Hidden, 1}, 5);  // unreachable
    arch.set_threshold({Layer::Output, 0}, 1);
    const auto model = build_bcm(arch, simulate(arch, InputSequence(2, 1)));

    CHECK(model.equation({Layer::Hidden, 0}, 1).carry.kind == CondKind::True);
    CHECK(model.equation({Layer::Hidden, 1}, 1).carry.kind == CondKind::False);
    // forced-true neuron fires; forced-false stays silent, regardless of input
    const auto I = derive_by_equations(model, InputSequence(2, 1));
    CHECK(I[model.var_id({Layer::Hidden, 0}, 1)] == 1);
    CHECK(I[model.var_id({Layer::Hidden, 1}, 1)] == 0);
}

TEST_CASE("theorem equivalence: equations determine exactly the simulator trace") {
    int arch_count = 0;
    for (int trial = 0; arch_count < 60; ++trial) {
        CounterRng rng(9000 + trial);
        const auto scale = trial % 2 == 0 ? WeightScale::Binary : WeightScale::Ternary;
        const auto arch = random_micro_arch(rng, 3, 2, 2, scale);
        const int t_end = 1 + static_cast<int>(rng.next_below(2));
        const int bits = arch.input_count() * t_end;
        if (bits > 8) continue;
        ++arch_count;
        for (unsigned assignment = 0; assignment < (1u << bits); ++assignment) {
            const auto input = input_from_bits(arch.input_count(), t_end, assignment);
            const auto trace = simulate(arch, input);
            const auto model = build_bcm(arch, trace);
            const auto I_trace = interpretation_from_trace(model, trace);
            CHECK(model.all_equations_hold(I_trace));
            CHECK(derive_by_equations(model, input) == I_trace);
        }
    }
}

TEST_CASE("model JSON export round-trips losslessly") {
    CounterRng rng(31337);
    const auto arch = random_micro_arch(rng, 4, 3, 2, WeightScale::Ternary);
    InputSequence input(arch.input_count(), 2);
    for (int t = 1; t <= 2; ++t) input.set_bit(t, 0, 1);
    const auto model = build_bcm(arch, simulate(arch, input));
    const auto copy = CausalModel::from_json(model.to_json());
    CHECK(copy.arch() == model.arch());
    CHECK(copy.t_end() == model.t_end());
    for (int t = 1; t <= model.t_end(); ++t)
        for (int g = arch.input_count(); g < arch.neuron_count(); ++g)
            CHECK(copy.equation(arch.neuron_at(g), t) == model.equation(arch.neuron_at(g), t));
    CHECK(copy.to_json() == model.to_json());
}

TEST_CASE("build_bcm rejects mismatched traces") {
    NetworkArchitecture arch(3, 2, 1, WeightScale::Binary);
    DynamicsTrace wrong(2, 3, 1);
    CHECK_THROWS_AS(build_bcm(arch, wrong), ConfigError);
}
