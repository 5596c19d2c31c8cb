#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bsnn/bool_expr.hpp"
#include "bsnn/network.hpp"
#include "bsnn/simulate.hpp"

namespace bsnn {

struct Variable {
    NeuronId neuron;
    int time;

    friend bool operator==(const Variable&, const Variable&) = default;
};

std::string to_string(const Variable& v);

// Total assignment over the model's variables, indexed by variable id.
using Interpretation = std::vector<std::uint8_t>;

enum class CondKind : std::uint8_t { True, False, Threshold };

// One branch of an equation: sum over the neuron's signed predecessors
// at the same slice compared against an integer bound.
struct SliceCond {
    CondKind kind = CondKind::False;
    int bound = 0;

    friend bool operator==(const SliceCond&, const SliceCond&) = default;
};

// Equation body for one (non-input neuron, time > 0):
//   p_{X,t} <-> ((!p_{X,t-1} -> [S >= tau - A]) && (p_{X,t-1} -> [S >= tau]))
// with S the signed same-slice predecessor sum and A the carried potential
// recorded from the run. Bounds outside the achievable range of S collapse
// the branch to a constant.
struct Equation {
    SliceCond carry; // applies when the neuron did not fire at t-1
    SliceCond fresh; // applies when it did (potential was reset)
    int carried_potential = 0;
    std::uint8_t fired_prev = 0;

    friend bool operator==(const Equation&, const Equation&) = default;
};

// Binary causal model of one concrete run: exogenous variables for input
// neurons, endogenous for the rest, one Boolean equation per endogenous
// variable. Equations at t=0 are p <-> false.
class CausalModel {
public:
    CausalModel() = default;

    const NetworkArchitecture& arch() const { return arch_; }
    int t_end() const { return t_end_; }
    int variable_count() const { return (t_end_ + 1) * arch_.neuron_count(); }

    int var_id(const Variable& v) const { return v.time * arch_.neuron_count() + arch_.global_index(v.neuron); }
    int var_id(NeuronId neuron, int time) const { return var_id(Variable{neuron, time}); }
    Variable var_of(int id) const {
        return Variable{arch_.neuron_at(id % arch_.neuron_count()), id / arch_.neuron_count()};
    }
    bool is_exogenous(int id) const { return id % arch_.neuron_count() < arch_.input_count(); }

    std::vector<int> exogenous_ids() const;
    std::vector<int> endogenous_ids() const;

    const Equation& equation(NeuronId neuron, int time) const {
        return equations_[static_cast<std::size_t>(time - 1) * arch_.non_input_count() +
                          arch_.non_input_index(neuron)];
    }

    // same-slice predecessors entering the sum with +1 / -1
    const std::vector<int>& positive_pre(NeuronId neuron) const {
        return pos_pre_[arch_.non_input_index(neuron)];
    }
    const std::vector<int>& negative_pre(NeuronId neuron) const {
        return neg_pre_[arch_.non_input_index(neuron)];
    }

    // Is the stored equation for (neuron, time) satisfied under I?
    bool equation_holds(NeuronId neuron, int time, const Interpretation& I) const;
    bool all_equations_hold(const Interpretation& I) const;

    // Def-3-shaped body with the threshold conditions expanded into the
    // literal disjunction over predecessor subsets. Exponential; test-scale.
    BoolExpr omega_subset_expr(NeuronId neuron, int time) const;
    // Variables occurring in the stored (simplified) equation body.
    std::vector<int> omega_vars(NeuronId neuron, int time) const;

    // edge (q, p) iff q occurs in p's equation body
    std::vector<std::pair<int, int>> causal_graph() const;

    std::string to_json() const;
    static CausalModel from_json(const std::string& text);

    friend CausalModel build_bcm(const NetworkArchitecture& arch, const DynamicsTrace& trace);

private:
    void rebuild_equations(const std::vector<int>& carried, const std::vector<std::uint8_t>& fired);
    SliceCond make_cond(NeuronId neuron, int bound) const;

    NetworkArchitecture arch_;
    int t_end_ = 0;
    std::vector<std::vector<int>> pos_pre_; // per non-input neuron, pre slice-offsets as global ids
    std::vector<std::vector<int>> neg_pre_;
    std::vector<Equation> equations_;       // (t-1) * non_input_count + ni, for t in 1..t_end
};

// Compiles the architecture plus one concrete run into its causal model.
CausalModel build_bcm(const NetworkArchitecture& arch, const DynamicsTrace& trace);

// Reads I(p_{X,t}) := F_X(t) off the trace.
Interpretation interpretation_from_trace(const CausalModel& model, const DynamicsTrace& trace);

// Theorem-1 check: the trace satisfies every equation of its own model.
bool check_compatibility(const NetworkArchitecture& arch, const DynamicsTrace& trace);

} // namespace bsnn
