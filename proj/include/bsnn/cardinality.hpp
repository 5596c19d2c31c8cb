#pragma once

#include <vector>

#include "bsnn/cnf.hpp"

namespace bsnn {

enum class CardKind : std::uint8_t { True, False, Literal };

struct CardResult {
    CardKind kind;
    int literal = 0; // meaningful when kind == Literal
};

// Sequential-counter encoding of "at least `bound` of `lits` are true",
// with two-sided clauses so the output literal is fully defined by the
// inputs. Returns a constant for degenerate bounds.
CardResult at_least(CnfFormula& f, const std::vector<int>& lits, int bound);

// Shared-counter variant: one counter wide enough for every requested
// bound, one output literal per bound.
std::vector<CardResult> at_least_multi(CnfFormula& f, const std::vector<int>& lits,
                                       const std::vector<int>& bounds);

} // namespace bsnn
