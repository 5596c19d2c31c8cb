#include "bsnn/cardinality.hpp"

#include <algorithm>

namespace bsnn {

std::vector<CardResult> at_least_multi(CnfFormula& f, const std::vector<int>& lits,
                                       const std::vector<int>& bounds) {
    const int n = static_cast<int>(lits.size());
    std::vector<CardResult> out(bounds.size());
    int width = 0;
    for (std::size_t b = 0; b < bounds.size(); ++b) {
        if (bounds[b] <= 0)
            out[b] = {CardKind::True};
        else if (bounds[b] > n)
            out[b] = {CardKind::False};
        else
            width = std::max(width, bounds[b]);
    }
    if (width == 0) return out;

    // s(i,j) <-> at least j of the first i literals; column j in 1..width.
    // Grid cell 0 stands for the constant false (j > i).
    std::vector<int> grid(static_cast<std::size_t>(n + 1) * (width + 1), 0);
    auto s = [&](int i, int j) -> int& { return grid[static_cast<std::size_t>(i) * (width + 1) + j]; };

    for (int i = 1; i <= n; ++i) {
        const int x = lits[i - 1];
        for (int j = 1; j <= std::min(i, width); ++j) {
            const int sij = f.new_var();
            s(i, j) = sij;
            const int below = s(i - 1, j);       // at least j among first i-1 (0 = false)
            const int diag = s(i - 1, j - 1);    // at least j-1 among first i-1 (j==1 -> true)
            if (below != 0) f.add({-below, sij});                   // s(i-1,j) -> s(i,j)
            if (j == 1)
                f.add({-x, sij});                                   // x -> s(i,1)
            else if (diag != 0)
                f.add({-x, -diag, sij});                            // x & s(i-1,j-1) -> s(i,j)
            // s(i,j) -> s(i-1,j) | x   and   s(i,j) -> s(i-1,j) | s(i-1,j-1)
            {
                std::vector<int> c1{-sij};
                if (below != 0) c1.push_back(below);
                c1.push_back(x);
                f.add(std::move(c1));
            }
            if (j > 1) {
                std::vector<int> c2{-sij};
                if (below != 0) c2.push_back(below);
                c2.push_back(diag); // diag != 0 since j-1 >= 1 and j-1 <= i-1
                f.add(std::move(c2));
            }
        }
    }
    for (std::size_t b = 0; b < bounds.size(); ++b)
        if (bounds[b] >= 1 && bounds[b] <= n) out[b] = {CardKind::Literal, s(n, bounds[b])};
    return out;
}

CardResult at_least(CnfFormula& f, const std::vector<int>& lits, int bound) {
    return at_least_multi(f, lits, {bound})[0];
}

} // namespace bsnn
