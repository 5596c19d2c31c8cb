#include "bsnn/cnf.hpp"

#include <sstream>

#include "bsnn/errors.hpp"

namespace bsnn {

int CnfFormula::true_literal() {
    if (true_var_ == 0) {
        true_var_ = new_var();
        add({true_var_});
    }
    return true_var_;
}

std::string emit_dimacs(const CnfFormula& f) {
    std::ostringstream out;
    out << "p cnf " << f.variable_count << ' ' << f.clauses.size() << '\n';
    for (const auto& clause : f.clauses) {
        for (const int lit : clause) out << lit << ' ';
        out << "0\n";
    }
    return out.str();
}

CnfFormula parse_dimacs(const std::string& text) {
    std::istringstream in(text);
    CnfFormula f;
    std::string tok;
    bool header_seen = false;
    std::size_t expected_clauses = 0;
    std::vector<int> clause;
    while (in >> tok) {
        if (tok == "c") {
            std::string rest;
            std::getline(in, rest);
            continue;
        }
        if (tok == "p") {
            std::string fmt;
            in >> fmt;
            if (fmt != "cnf") throw DataError("DIMACS: expected 'p cnf' header");
            in >> f.variable_count >> expected_clauses;
            f.model_variable_count = f.variable_count;
            header_seen = true;
            continue;
        }
        if (!header_seen) throw DataError("DIMACS: literal before header");
        const int lit = std::stoi(tok);
        if (lit == 0) {
            if (clause.empty()) throw DataError("DIMACS: empty clause");
            f.clauses.push_back(clause);
            clause.clear();
        } else {
            if (std::abs(lit) > f.variable_count) throw DataError("DIMACS: literal out of range");
            clause.push_back(lit);
        }
    }
    if (!clause.empty()) throw DataError("DIMACS: unterminated clause");
    if (f.clauses.size() != expected_clauses) throw DataError("DIMACS: clause count mismatch");
    return f;
}

namespace {

// flat conjunction/disjunction of literals, if the node has that shape
bool flat_literals(const BoolExpr& e, BoolExpr::Kind op, std::vector<int>& lits) {
    using Kind = BoolExpr::Kind;
    if (e.kind() == Kind::Var) {
        lits.push_back(e.var_id() + 1);
        return true;
    }
    if (e.kind() == Kind::Not && e.children()[0].kind() == Kind::Var) {
        lits.push_back(-(e.children()[0].var_id() + 1));
        return true;
    }
    if (e.kind() != op) return false;
    for (const auto& c : e.children()) {
        std::vector<int> sub;
        if (!flat_literals(c, op, sub)) return false;
        lits.insert(lits.end(), sub.begin(), sub.end());
    }
    return true;
}

} // namespace

int cnf_literal(CnfFormula& f, const BoolExpr& e) {
    using Kind = BoolExpr::Kind;
    switch (e.kind()) {
    case Kind::True: return f.true_literal();
    case Kind::False: return -f.true_literal();
    case Kind::Var: {
        if (e.var_id() + 1 > f.model_variable_count)
            throw ConfigError("expression variable outside the model range");
        return e.var_id() + 1;
    }
    case Kind::Not: return -cnf_literal(f, e.children()[0]);
    case Kind::And: {
        std::vector<int> lits;
        for (const auto& c : e.children()) lits.push_back(cnf_literal(f, c));
        const int g = f.new_var();
        std::vector<int> back{g};
        for (const int l : lits) {
            f.add({-g, l});
            back.push_back(-l);
        }
        f.add(std::move(back));
        return g;
    }
    case Kind::Or: {
        std::vector<int> lits;
        for (const auto& c : e.children()) lits.push_back(cnf_literal(f, c));
        const int g = f.new_var();
        std::vector<int> fwd{-g};
        for (const int l : lits) {
            f.add({g, -l});
            fwd.push_back(l);
        }
        f.add(std::move(fwd));
        return g;
    }
    case Kind::Implies: {
        const int a = cnf_literal(f, e.children()[0]);
        const int b = cnf_literal(f, e.children()[1]);
        const int g = f.new_var();
        f.add({-g, -a, b});
        f.add({g, a});
        f.add({g, -b});
        return g;
    }
    case Kind::Iff: {
        const int a = cnf_literal(f, e.children()[0]);
        const int b = cnf_literal(f, e.children()[1]);
        const int g = f.new_var();
        f.add({-g, -a, b});
        f.add({-g, a, -b});
        f.add({g, a, b});
        f.add({g, -a, -b});
        return g;
    }
    }
    throw ConfigError("unreachable expression kind");
}

void cnf_assert(CnfFormula& f, const BoolExpr& e) {
    using Kind = BoolExpr::Kind;
    if (e.kind() == Kind::True) return;
    if (e.kind() == Kind::And) {
        for (const auto& c : e.children()) cnf_assert(f, c);
        return;
    }
    std::vector<int> lits;
    if (flat_literals(e, Kind::Or, lits)) {
        f.add(std::move(lits));
        return;
    }
    // p <-> flat or/and of literals gets the textbook clause set
    if (e.kind() == Kind::Iff) {
        const auto& lhs = e.children()[0];
        const auto& rhs = e.children()[1];
        if (lhs.kind() == Kind::Var) {
            const int p = lhs.var_id() + 1;
            lits.clear();
            if (rhs.kind() == Kind::False) {
                f.add({-p});
                return;
            }
            if (rhs.kind() == Kind::True) {
                f.add({p});
                return;
            }
            if (flat_literals(rhs, Kind::Or, lits)) {
                std::vector<int> fwd{-p};
                for (const int l : lits) {
                    f.add({p, -l});
                    fwd.push_back(l);
                }
                f.add(std::move(fwd));
                return;
            }
            lits.clear();
            if (flat_literals(rhs, Kind::And, lits)) {
                std::vector<int> back{p};
                for (const int l : lits) {
                    f.add({-p, l});
                    back.push_back(-l);
                }
                f.add(std::move(back));
                return;
            }
        }
    }
    f.add({cnf_literal(f, e)});
}

std::vector<std::pair<int, bool>> expr_as_term(const BoolExpr& e) {
    using Kind = BoolExpr::Kind;
    std::vector<std::pair<int, bool>> lits;
    if (e.kind() == Kind::True) return lits;
    std::vector<int> flat;
    if (!flat_literals(e, Kind::And, flat)) throw ConfigError("expression is not a term");
    for (const int l : flat) lits.emplace_back(std::abs(l) - 1, l > 0);
    return lits;
}

bool is_term(const BoolExpr& e) {
    using Kind = BoolExpr::Kind;
    if (e.kind() == Kind::True) return true;
    std::vector<int> flat;
    if (!flat_literals(e, Kind::And, flat)) return false;
    std::set<int> seen;
    for (const int l : flat)
        if (!seen.insert(std::abs(l)).second) return false;
    return true;
}

} // namespace bsnn
