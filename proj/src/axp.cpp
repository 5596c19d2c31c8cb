#include "bsnn/axp.hpp"

#include <algorithm>
#include <chrono>
#include <memory>

#include <json.hpp>

#include "bsnn/errors.hpp"
#include "bsnn/rng.hpp"

namespace bsnn {

using nlohmann::json;

bool Term::subset_of(const Term& other) const {
    for (const TermLit& l : literals)
        if (std::find(other.literals.begin(), other.literals.end(), l) == other.literals.end())
            return false;
    return true;
}

BoolExpr Term::to_expr() const {
    std::vector<BoolExpr> lits;
    for (const TermLit& l : literals) {
        BoolExpr v = BoolExpr::var(l.var);
        lits.push_back(l.positive ? v : BoolExpr::negate(v));
    }
    return BoolExpr::conj(std::move(lits));
}

PartialAssignment Term::to_assignment() const {
    PartialAssignment out;
    out.reserve(literals.size());
    for (const TermLit& l : literals) out.emplace_back(l.var, l.positive);
    return out;
}

BoolExpr Explanandum::to_expr(const CausalModel& model) const {
    std::vector<BoolExpr> lits;
    for (const int z : positive_outputs)
        lits.push_back(BoolExpr::var(model.var_id({Layer::Output, z}, time)));
    for (const int z : negative_outputs)
        lits.push_back(BoolExpr::negate(BoolExpr::var(model.var_id({Layer::Output, z}, time))));
    return BoolExpr::conj(std::move(lits));
}

Term initial_term(const CausalModel& model, const InputSequence& input, int t) {
    if (t < 0 || t > model.t_end()) throw ConfigError("explanation time outside 0..t_end");
    Term term;
    for (int i = 0; i < model.arch().input_count(); ++i)
        term.literals.push_back({model.var_id({Layer::Input, i}, t), input.bit(t, i) != 0});
    return term;
}

Explanandum explanandum_of(const NetworkArchitecture& arch, const DynamicsTrace& trace, int t) {
    if (t < 0 || t > trace.t_end()) throw ConfigError("explanandum time outside 0..t_end");
    Explanandum out;
    out.time = t;
    for (int z = 0; z < arch.output_count(); ++z) {
        if (trace.firing(t, arch.global_index({Layer::Output, z})))
            out.positive_outputs.push_back(z);
        else
            out.negative_outputs.push_back(z);
    }
    return out;
}

PartialAssignment off_slice_assumptions(const CausalModel& model, const InputSequence& input,
                                        int t) {
    PartialAssignment out;
    for (int s = 0; s <= model.t_end(); ++s) {
        if (s == t) continue;
        for (int i = 0; i < model.arch().input_count(); ++i)
            out.emplace_back(model.var_id({Layer::Input, i}, s), input.bit(s, i) != 0);
    }
    return out;
}

namespace {

// both backends behind the one query shape the deletion loop needs
class EntailmentOracle {
public:
    EntailmentOracle(const CausalModel& model, const BoolExpr& conclusion, const AxpOptions& opt) {
        if (opt.backend == Backend::CnfSat) {
            cnf_ = std::make_unique<CnfEntailmentSession>(model, conclusion);
        } else {
            const std::string cmd =
                opt.smt_command.empty() ? default_smt_solver_command() : opt.smt_command;
            smt_ = std::make_unique<SmtEntailmentSession>(model, conclusion, cmd);
        }
    }

    bool entails(const PartialAssignment& assumptions) {
        ++calls_;
        return cnf_ ? cnf_->entails(assumptions) : smt_->entails(assumptions);
    }

    std::uint64_t calls() const { return calls_; }

private:
    std::unique_ptr<CnfEntailmentSession> cnf_;
    std::unique_ptr<SmtEntailmentSession> smt_;
    std::uint64_t calls_ = 0;
};

PartialAssignment combine(const PartialAssignment& base, const Term& term,
                          const std::vector<std::uint8_t>& active) {
    PartialAssignment out = base;
    for (std::size_t i = 0; i < term.literals.size(); ++i)
        if (active[i]) out.emplace_back(term.literals[i].var, term.literals[i].positive);
    return out;
}

} // namespace

Explanation compute_axp(const NetworkArchitecture& arch, const InputSequence& input, int t,
                        const AxpOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    const DynamicsTrace trace = simulate(arch, input);
    const CausalModel model = build_bcm(arch, trace);

    Explanation expl;
    expl.backend = options.backend;
    expl.order_seed = options.order_seed;
    expl.explanandum = explanandum_of(arch, trace, t);

    const BoolExpr omega0 = expl.explanandum.to_expr(model);
    EntailmentOracle oracle(model, omega0, options);
    const PartialAssignment base = off_slice_assumptions(model, input, t);

    const Term full = initial_term(model, input, t);
    std::vector<std::uint8_t> active(full.literals.size(), 1);

    if (!oracle.entails(combine(base, full, active)))
        throw CertificateError("complete input term does not entail its own output");

    std::vector<std::size_t> order(full.literals.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (!options.raster_order) shuffle(order, options.order_seed);

    for (const std::size_t idx : order) {
        active[idx] = 0;
        if (!oracle.entails(combine(base, full, active))) active[idx] = 1;
    }

    for (std::size_t i = 0; i < full.literals.size(); ++i)
        if (active[i]) expl.term.literals.push_back(full.literals[i]);

    if (options.verify)
        expl.certificates = verify_axp(arch, input, expl.term, expl.explanandum, options);
    expl.solver_calls = oracle.calls(); // the search itself; certificate checks are separate
    expl.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return expl;
}

Certificates verify_axp(const NetworkArchitecture& arch, const InputSequence& input,
                        const Term& term, const Explanandum& explanandum,
                        const AxpOptions& options) {
    const DynamicsTrace trace = simulate(arch, input);
    const CausalModel model = build_bcm(arch, trace);

    Certificates certs;

    // (i) the instance satisfies the term
    certs.i = true;
    for (const TermLit& l : term.literals) {
        const Variable v = model.var_of(l.var);
        if (v.neuron.layer != Layer::Input) {
            certs.i = false;
            break;
        }
        if ((input.bit(v.time, v.neuron.index) != 0) != l.positive) {
            certs.i = false;
            break;
        }
    }

    const BoolExpr omega0 = explanandum.to_expr(model);
    EntailmentOracle oracle(model, omega0, options);
    const PartialAssignment base = off_slice_assumptions(model, input, explanandum.time);

    std::vector<std::uint8_t> active(term.literals.size(), 1);
    certs.ii = oracle.entails(combine(base, term, active));

    // (iii) single deletions must all break the entailment
    certs.iii = true;
    for (std::size_t i = 0; i < term.literals.size() && certs.iii; ++i) {
        active[i] = 0;
        if (oracle.entails(combine(base, term, active))) certs.iii = false;
        active[i] = 1;
    }

    // small terms: exhaustive proper-subset check
    if (certs.iii && term.literals.size() <= 12 && !term.literals.empty()) {
        const std::size_t n = term.literals.size();
        for (std::uint64_t mask = 0; mask + 1 < (1ULL << n) && certs.iii; ++mask) {
            for (std::size_t i = 0; i < n; ++i) active[i] = (mask >> i) & 1;
            if (oracle.entails(combine(base, term, active))) certs.iii = false;
        }
        std::fill(active.begin(), active.end(), 1);
    }
    return certs;
}

std::vector<int> audit_connectivity(const Explanation& expl, const NetworkArchitecture& arch) {
    std::vector<int> violations;
    for (const TermLit& l : expl.term.literals) {
        const int neuron = l.var % arch.neuron_count();
        if (neuron < arch.input_count() && arch.disconnected_input(neuron))
            violations.push_back(neuron);
    }
    std::sort(violations.begin(), violations.end());
    violations.erase(std::unique(violations.begin(), violations.end()), violations.end());
    return violations;
}

std::string explanation_to_json(const Explanation& expl, const CausalModel& model, int image_width,
                                int image_height) {
    json j;
    j["t"] = expl.explanandum.time;
    j["width"] = image_width;
    j["height"] = image_height;
    json lits = json::array();
    for (const TermLit& l : expl.term.literals) {
        const Variable v = model.var_of(l.var);
        lits.push_back({{"x", v.neuron.index % image_width},
                        {"y", v.neuron.index / image_width},
                        {"time", v.time},
                        {"polarity", l.positive ? 1 : 0}});
    }
    j["literals"] = std::move(lits);
    j["positive_outputs"] = expl.explanandum.positive_outputs;
    j["negative_outputs"] = expl.explanandum.negative_outputs;
    j["certificates"] = {{"i", expl.certificates.i},
                         {"ii", expl.certificates.ii},
                         {"iii", expl.certificates.iii}};
    j["backend"] = expl.backend == Backend::CnfSat ? "cnf" : "smt";
    j["order_seed"] = expl.order_seed;
    j["solver_calls"] = expl.solver_calls;
    j["wall_time_ms"] = expl.wall_time_ms;
    return j.dump(1);
}

Explanation explanation_from_json(const std::string& text, const CausalModel& model) {
    json j = json::parse(text);
    Explanation expl;
    expl.explanandum.time = j.at("t").get<int>();
    const int width = j.at("width").get<int>();
    for (const auto& l : j.at("literals")) {
        const int index = l.at("y").get<int>() * width + l.at("x").get<int>();
        expl.term.literals.push_back(
            {model.var_id({Layer::Input, index}, l.at("time").get<int>()),
             l.at("polarity").get<int>() != 0});
    }
    for (const auto& z : j.at("positive_outputs")) expl.explanandum.positive_outputs.push_back(z.get<int>());
    for (const auto& z : j.at("negative_outputs")) expl.explanandum.negative_outputs.push_back(z.get<int>());
    expl.certificates.i = j.at("certificates").at("i").get<bool>();
    expl.certificates.ii = j.at("certificates").at("ii").get<bool>();
    expl.certificates.iii = j.at("certificates").at("iii").get<bool>();
    expl.backend = j.at("backend").get<std::string>() == "smt" ? Backend::SmtLia : Backend::CnfSat;
    expl.order_seed = j.at("order_seed").get<std::uint64_t>();
    expl.solver_calls = j.at("solver_calls").get<std::uint64_t>();
    expl.wall_time_ms = j.at("wall_time_ms").get<double>();
    return expl;
}

} // namespace bsnn
