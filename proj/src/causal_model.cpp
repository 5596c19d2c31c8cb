#include "bsnn/causal_model.hpp"

#include <json.hpp>

#include "bsnn/errors.hpp"

namespace bsnn {

using nlohmann::json;

std::string to_string(const Variable& v) {
    return "p_" + to_string(v.neuron) + "_" + std::to_string(v.time);
}

std::vector<int> CausalModel::exogenous_ids() const {
    std::vector<int> ids;
    for (int t = 0; t <= t_end_; ++t)
        for (int i = 0; i < arch_.input_count(); ++i) ids.push_back(var_id({Layer::Input, i}, t));
    return ids;
}

std::vector<int> CausalModel::endogenous_ids() const {
    std::vector<int> ids;
    for (int t = 0; t <= t_end_; ++t)
        for (int g = arch_.input_count(); g < arch_.neuron_count(); ++g)
            ids.push_back(t * arch_.neuron_count() + g);
    return ids;
}

SliceCond CausalModel::make_cond(NeuronId neuron, int bound) const {
    const int ni = arch_.non_input_index(neuron);
    const int lo = -static_cast<int>(neg_pre_[ni].size());
    const int hi = static_cast<int>(pos_pre_[ni].size());
    if (bound <= lo) return {CondKind::True, bound};
    if (bound > hi) return {CondKind::False, bound};
    return {CondKind::Threshold, bound};
}

void CausalModel::rebuild_equations(const std::vector<int>& carried,
                                    const std::vector<std::uint8_t>& fired) {
    const int ni_count = arch_.non_input_count();
    equations_.resize(static_cast<std::size_t>(t_end_) * ni_count);
    for (int t = 1; t <= t_end_; ++t) {
        for (int g = arch_.input_count(); g < arch_.neuron_count(); ++g) {
            const NeuronId id = arch_.neuron_at(g);
            const int ni = arch_.non_input_index(id);
            const std::size_t slot = static_cast<std::size_t>(t - 1) * ni_count + ni;
            Equation& eq = equations_[slot];
            eq.carried_potential = carried[slot];
            eq.fired_prev = fired[slot];
            eq.carry = make_cond(id, arch_.threshold(id) - eq.carried_potential);
            eq.fresh = make_cond(id, arch_.threshold(id));
        }
    }
}

CausalModel build_bcm(const NetworkArchitecture& arch, const DynamicsTrace& trace) {
    if (trace.input_count() != arch.input_count() ||
        trace.non_input_count() != arch.non_input_count())
        throw ConfigError("trace does not match the architecture");

    CausalModel model;
    model.arch_ = arch;
    model.t_end_ = trace.t_end();
    model.pos_pre_.resize(arch.non_input_count());
    model.neg_pre_.resize(arch.non_input_count());
    for (int g = arch.input_count(); g < arch.neuron_count(); ++g) {
        const NeuronId id = arch.neuron_at(g);
        const int ni = arch.non_input_index(id);
        for (const NeuronId& pre : arch.positive_pre(id))
            model.pos_pre_[ni].push_back(arch.global_index(pre));
        for (const NeuronId& pre : arch.negative_pre(id))
            model.neg_pre_[ni].push_back(arch.global_index(pre));
    }

    const int ni_count = arch.non_input_count();
    std::vector<int> carried(static_cast<std::size_t>(model.t_end_) * ni_count, 0);
    std::vector<std::uint8_t> fired(carried.size(), 0);
    for (int t = 1; t <= model.t_end_; ++t) {
        for (int g = arch.input_count(); g < arch.neuron_count(); ++g) {
            const int ni = arch.non_input_index(arch.neuron_at(g));
            const std::size_t slot = static_cast<std::size_t>(t - 1) * ni_count + ni;
            carried[slot] = trace.potential(t - 1, ni);
            fired[slot] = static_cast<std::uint8_t>(trace.firing(t - 1, g));
        }
    }
    model.rebuild_equations(carried, fired);
    return model;
}

bool CausalModel::equation_holds(NeuronId neuron, int time, const Interpretation& I) const {
    const int p = var_id(neuron, time);
    if (time == 0) return I[p] == 0;

    const Equation& eq = equation(neuron, time);
    const bool prev = I[var_id(neuron, time - 1)] != 0;
    const SliceCond& cond = prev ? eq.fresh : eq.carry;
    bool value = false;
    switch (cond.kind) {
    case CondKind::True: value = true; break;
    case CondKind::False: value = false; break;
    case CondKind::Threshold: {
        const int ni = arch_.non_input_index(neuron);
        int sum = 0;
        for (int g : pos_pre_[ni]) sum += I[time * arch_.neuron_count() + g];
        for (int g : neg_pre_[ni]) sum -= I[time * arch_.neuron_count() + g];
        value = sum >= cond.bound;
        break;
    }
    }
    return (I[p] != 0) == value;
}

bool CausalModel::all_equations_hold(const Interpretation& I) const {
    for (int t = 0; t <= t_end_; ++t)
        for (int g = arch_.input_count(); g < arch_.neuron_count(); ++g)
            if (!equation_holds(arch_.neuron_at(g), t, I)) return false;
    return true;
}

BoolExpr CausalModel::omega_subset_expr(NeuronId neuron, int time) const {
    const BoolExpr p = BoolExpr::var(var_id(neuron, time));
    if (time == 0) return BoolExpr::iff(p, BoolExpr::no());

    const int ni = arch_.non_input_index(neuron);
    const auto& pos = pos_pre_[ni];
    const auto& neg = neg_pre_[ni];
    const int npos = static_cast<int>(pos.size());
    const int nneg = static_cast<int>(neg.size());

    // Literal expansion of [sum >= bound]: for binary weights this is
    // exactly the disjunction over subsets Omega of R+ with |Omega| >= bound;
    // negative predecessors contribute witnessed non-firing literals.
    auto expand = [&](int bound) {
        std::vector<BoolExpr> disjuncts;
        for (int pm = 0; pm < (1 << npos); ++pm) {
            const int pcount = __builtin_popcount(static_cast<unsigned>(pm));
            for (int nm = 0; nm < (1 << nneg); ++nm) {
                const int ncount = __builtin_popcount(static_cast<unsigned>(nm));
                if (pcount - nneg + ncount < bound) continue;
                std::vector<BoolExpr> lits;
                for (int i = 0; i < npos; ++i)
                    if (pm & (1 << i)) lits.push_back(BoolExpr::var(time * arch_.neuron_count() + pos[i]));
                for (int i = 0; i < nneg; ++i)
                    if (nm & (1 << i))
                        lits.push_back(BoolExpr::negate(BoolExpr::var(time * arch_.neuron_count() + neg[i])));
                disjuncts.push_back(BoolExpr::conj(std::move(lits)));
            }
        }
        return BoolExpr::disj(std::move(disjuncts));
    };

    const Equation& eq = equation(neuron, time);
    const BoolExpr prev = BoolExpr::var(var_id(neuron, time - 1));
    const int tau = arch_.threshold(neuron);
    BoolExpr body = BoolExpr::conj({BoolExpr::implies(BoolExpr::negate(prev), expand(tau - eq.carried_potential)),
                                    BoolExpr::implies(prev, expand(tau))});
    return BoolExpr::iff(p, std::move(body));
}

std::vector<int> CausalModel::omega_vars(NeuronId neuron, int time) const {
    if (time == 0) return {};
    const Equation& eq = equation(neuron, time);
    const bool carry_const = eq.carry.kind != CondKind::Threshold;
    const bool fresh_const = eq.fresh.kind != CondKind::Threshold;
    if (carry_const && fresh_const && eq.carry.kind == eq.fresh.kind) return {};

    std::vector<int> vars;
    vars.push_back(var_id(neuron, time - 1));
    if (!carry_const || !fresh_const) {
        const int ni = arch_.non_input_index(neuron);
        for (int g : pos_pre_[ni]) vars.push_back(time * arch_.neuron_count() + g);
        for (int g : neg_pre_[ni]) vars.push_back(time * arch_.neuron_count() + g);
    }
    return vars;
}

std::vector<std::pair<int, int>> CausalModel::causal_graph() const {
    std::vector<std::pair<int, int>> edges;
    for (int t = 0; t <= t_end_; ++t) {
        for (int g = arch_.input_count(); g < arch_.neuron_count(); ++g) {
            const NeuronId id = arch_.neuron_at(g);
            const int p = var_id(id, t);
            for (int q : omega_vars(id, t)) edges.emplace_back(q, p);
        }
    }
    return edges;
}

Interpretation interpretation_from_trace(const CausalModel& model, const DynamicsTrace& trace) {
    Interpretation I(model.variable_count(), 0);
    const int n = model.arch().neuron_count();
    for (int t = 0; t <= model.t_end(); ++t)
        for (int g = 0; g < n; ++g) I[t * n + g] = static_cast<std::uint8_t>(trace.firing(t, g));
    return I;
}

bool check_compatibility(const NetworkArchitecture& arch, const DynamicsTrace& trace) {
    const CausalModel model = build_bcm(arch, trace);
    return model.all_equations_hold(interpretation_from_trace(model, trace));
}

namespace {

json cond_to_json(const SliceCond& c) {
    json j;
    switch (c.kind) {
    case CondKind::True: j["kind"] = "true"; break;
    case CondKind::False: j["kind"] = "false"; break;
    case CondKind::Threshold: j["kind"] = "threshold"; break;
    }
    j["bound"] = c.bound;
    return j;
}

} // namespace

std::string CausalModel::to_json() const {
    json j;
    j["arch"] = json::parse(arch_.to_json());
    j["t_end"] = t_end_;
    j["variables"] = {{"count", variable_count()},
                      {"exogenous", static_cast<int>(exogenous_ids().size())},
                      {"endogenous", static_cast<int>(endogenous_ids().size())},
                      {"id_scheme", "time * neuron_count + global_neuron_index"}};
    json eqs = json::array();
    for (int t = 1; t <= t_end_; ++t) {
        for (int g = arch_.input_count(); g < arch_.neuron_count(); ++g) {
            const NeuronId id = arch_.neuron_at(g);
            const Equation& eq = equation(id, t);
            json e;
            e["neuron"] = to_string(id);
            e["t"] = t;
            e["carried_potential"] = eq.carried_potential;
            e["fired_prev"] = static_cast<int>(eq.fired_prev);
            e["carry"] = cond_to_json(eq.carry);
            e["fresh"] = cond_to_json(eq.fresh);
            eqs.push_back(std::move(e));
        }
    }
    j["equations"] = std::move(eqs);
    return j.dump(1);
}

CausalModel CausalModel::from_json(const std::string& text) {
    json j = json::parse(text);
    const NetworkArchitecture arch = NetworkArchitecture::from_json(j.at("arch").dump());
    const int t_end = j.at("t_end").get<int>();

    const int ni_count = arch.non_input_count();
    std::vector<int> carried(static_cast<std::size_t>(t_end) * ni_count, 0);
    std::vector<std::uint8_t> fired(carried.size(), 0);
    for (const auto& e : j.at("equations")) {
        const std::string name = e.at("neuron").get<std::string>();
        const int idx = std::stoi(name.substr(1));
        const NeuronId id{name[0] == 'H' ? Layer::Hidden : Layer::Output, idx};
        const int t = e.at("t").get<int>();
        const std::size_t slot = static_cast<std::size_t>(t - 1) * ni_count + arch.non_input_index(id);
        carried[slot] = e.at("carried_potential").get<int>();
        fired[slot] = static_cast<std::uint8_t>(e.at("fired_prev").get<int>());
    }

    CausalModel model;
    model.arch_ = arch;
    model.t_end_ = t_end;
    model.pos_pre_.resize(ni_count);
    model.neg_pre_.resize(ni_count);
    for (int g = arch.input_count(); g < arch.neuron_count(); ++g) {
        const NeuronId id = arch.neuron_at(g);
        const int ni = arch.non_input_index(id);
        for (const NeuronId& pre : arch.positive_pre(id))
            model.pos_pre_[ni].push_back(arch.global_index(pre));
        for (const NeuronId& pre : arch.negative_pre(id))
            model.neg_pre_[ni].push_back(arch.global_index(pre));
    }
    model.rebuild_equations(carried, fired);
    return model;
}

} // namespace bsnn
