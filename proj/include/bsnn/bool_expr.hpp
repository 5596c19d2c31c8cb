#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <vector>

namespace bsnn {

// Propositional formula over integer-identified variables.
class BoolExpr {
public:
    enum class Kind : std::uint8_t { True, False, Var, Not, And, Or, Implies, Iff };

    static BoolExpr yes();
    static BoolExpr no();
    static BoolExpr var(int id);
    static BoolExpr negate(BoolExpr e);
    static BoolExpr conj(std::vector<BoolExpr> es); // empty -> true
    static BoolExpr disj(std::vector<BoolExpr> es); // empty -> false
    static BoolExpr implies(BoolExpr a, BoolExpr b);
    static BoolExpr iff(BoolExpr a, BoolExpr b);

    Kind kind() const { return node_->kind; }
    int var_id() const { return node_->var; }
    const std::vector<BoolExpr>& children() const { return node_->children; }

    // Standard semantics; `assignment` must cover every variable mentioned.
    bool eval(const std::vector<std::uint8_t>& assignment) const;

    void collect_vars(std::set<int>& out) const;
    std::set<int> vars() const;

private:
    struct Node {
        Kind kind;
        int var = -1;
        std::vector<BoolExpr> children;
    };

    explicit BoolExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

} // namespace bsnn
