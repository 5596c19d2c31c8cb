#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bsnn/causal_model.hpp"
#include "bsnn/encode.hpp"
#include "bsnn/smtlib.hpp"

namespace bsnn {

struct TermLit {
    int var;       // model variable id
    bool positive;

    friend bool operator==(const TermLit&, const TermLit&) = default;
};

// Conjunction of literals; each variable occurs at most once.
struct Term {
    std::vector<TermLit> literals;

    bool subset_of(const Term& other) const;
    BoolExpr to_expr() const;
    PartialAssignment to_assignment() const;
};

// The observed output pattern at one time step: which output neurons fired.
struct Explanandum {
    int time = 0;
    std::vector<int> positive_outputs;
    std::vector<int> negative_outputs;

    BoolExpr to_expr(const CausalModel& model) const;
};

struct Certificates {
    bool i = false;
    bool ii = false;
    bool iii = false;

    bool all() const { return i && ii && iii; }
};

struct Explanation {
    Term term;
    Explanandum explanandum;
    Backend backend = Backend::CnfSat;
    Certificates certificates;
    std::uint64_t order_seed = 0;
    std::uint64_t solver_calls = 0;
    double wall_time_ms = 0.0;
};

// One positive/negative literal per input neuron at slice t, matching the
// actual input, so the term is complete and true in the instance.
Term initial_term(const CausalModel& model, const InputSequence& input, int t);

Explanandum explanandum_of(const NetworkArchitecture& arch, const DynamicsTrace& trace, int t);

// Input variables at every slice other than t, fixed to their actual values.
PartialAssignment off_slice_assumptions(const CausalModel& model, const InputSequence& input, int t);

struct AxpOptions {
    Backend backend = Backend::CnfSat;
    std::uint64_t order_seed = 0;
    bool raster_order = false; // natural pixel sweep instead of the seeded shuffle
    std::string smt_command;   // empty -> default_smt_solver_command()
    bool verify = true;        // run the Def-4 certificate checks on the result
};

// Deletion-based search: walk the literals in the seeded order, drop each
// one whose removal keeps the entailment of the explanandum.
Explanation compute_axp(const NetworkArchitecture& arch, const InputSequence& input, int t,
                        const AxpOptions& options = {});

// Def-4 conditions for an arbitrary candidate term. Condition (iii) is
// checked by single-literal deletions (entailment is monotone in the
// assumption set); terms of up to 12 literals are additionally brute-forced
// over every proper subset.
Certificates verify_axp(const NetworkArchitecture& arch, const InputSequence& input,
                        const Term& term, const Explanandum& explanandum,
                        const AxpOptions& options = {});

// Input features mentioned in the term whose hidden-layer weight column is
// all zero. Empty for every genuine abductive explanation.
std::vector<int> audit_connectivity(const Explanation& expl, const NetworkArchitecture& arch);

std::string explanation_to_json(const Explanation& expl, const CausalModel& model, int image_width,
                                int image_height);
Explanation explanation_from_json(const std::string& text, const CausalModel& model);

} // namespace bsnn
