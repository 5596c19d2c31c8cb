#pragma once

#include <string>
#include <vector>

#include "bsnn/bool_expr.hpp"

namespace bsnn {

// Clausal formula in DIMACS conventions: variables are 1-based, a negative
// integer is a negated literal. Variables 1..model_variable_count mirror
// model variable ids 0..n-1; everything above is auxiliary.
struct CnfFormula {
    int variable_count = 0;
    int model_variable_count = 0;
    std::vector<std::vector<int>> clauses;

    int new_var() { return ++variable_count; }
    void add(std::vector<int> clause) { clauses.push_back(std::move(clause)); }

    // lazily allocated variable pinned true, for folding constants
    int true_literal();

private:
    int true_var_ = 0;
};

std::string emit_dimacs(const CnfFormula& f);
CnfFormula parse_dimacs(const std::string& text);

// Tseitin lowering. cnf_literal returns a literal equivalent to `e`
// (two-sided definitions); cnf_assert asserts `e`, emitting the textbook
// clause set for flat shapes instead of introducing gates.
int cnf_literal(CnfFormula& f, const BoolExpr& e);
void cnf_assert(CnfFormula& f, const BoolExpr& e);

// (variable id, positive?) literals when `e` is a term; empty conj is {}
std::vector<std::pair<int, bool>> expr_as_term(const BoolExpr& e);
bool is_term(const BoolExpr& e);

} // namespace bsnn
