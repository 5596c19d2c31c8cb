#include "bsnn/bool_expr.hpp"

#include "bsnn/errors.hpp"

namespace bsnn {

BoolExpr BoolExpr::yes() { return BoolExpr(std::make_shared<Node>(Node{Kind::True})); }
BoolExpr BoolExpr::no() { return BoolExpr(std::make_shared<Node>(Node{Kind::False})); }

BoolExpr BoolExpr::var(int id) { return BoolExpr(std::make_shared<Node>(Node{Kind::Var, id})); }

BoolExpr BoolExpr::negate(BoolExpr e) {
    return BoolExpr(std::make_shared<Node>(Node{Kind::Not, -1, {std::move(e)}}));
}

BoolExpr BoolExpr::conj(std::vector<BoolExpr> es) {
    if (es.empty()) return yes();
    if (es.size() == 1) return es.front();
    return BoolExpr(std::make_shared<Node>(Node{Kind::And, -1, std::move(es)}));
}

BoolExpr BoolExpr::disj(std::vector<BoolExpr> es) {
    if (es.empty()) return no();
    if (es.size() == 1) return es.front();
    return BoolExpr(std::make_shared<Node>(Node{Kind::Or, -1, std::move(es)}));
}

BoolExpr BoolExpr::implies(BoolExpr a, BoolExpr b) {
    return BoolExpr(std::make_shared<Node>(Node{Kind::Implies, -1, {std::move(a), std::move(b)}}));
}

BoolExpr BoolExpr::iff(BoolExpr a, BoolExpr b) {
    return BoolExpr(std::make_shared<Node>(Node{Kind::Iff, -1, {std::move(a), std::move(b)}}));
}

bool BoolExpr::eval(const std::vector<std::uint8_t>& assignment) const {
    switch (node_->kind) {
    case Kind::True: return true;
    case Kind::False: return false;
    case Kind::Var:
        if (node_->var < 0 || node_->var >= static_cast<int>(assignment.size()))
            throw ConfigError("unbound variable " + std::to_string(node_->var));
        return assignment[node_->var] != 0;
    case Kind::Not: return !node_->children[0].eval(assignment);
    case Kind::And:
        for (const auto& c : node_->children)
            if (!c.eval(assignment)) return false;
        return true;
    case Kind::Or:
        for (const auto& c : node_->children)
            if (c.eval(assignment)) return true;
        return false;
    case Kind::Implies:
        return !node_->children[0].eval(assignment) || node_->children[1].eval(assignment);
    case Kind::Iff: return node_->children[0].eval(assignment) == node_->children[1].eval(assignment);
    }
    return false;
}

void BoolExpr::collect_vars(std::set<int>& out) const {
    if (node_->kind == Kind::Var) {
        out.insert(node_->var);
        return;
    }
    for (const auto& c : node_->children) c.collect_vars(out);
}

std::set<int> BoolExpr::vars() const {
    std::set<int> out;
    collect_vars(out);
    return out;
}

} // namespace bsnn
