#pragma once

#include <map>
#include <set>

#include "redmod/context.hpp"

namespace redmod {

// Jet variables (u included, as the zero index) that e depends on, looking
// through exponential arguments.
inline std::set<MultiIndex> jet_dependence(const Expr& e, const JetContext& ctx) {
    std::set<MultiIndex> out;
    for (const Indet& v : e.indets(true)) {
        if (v.kind() == Indet::Kind::jet)
            out.insert(v.jet_index());
        else if (v.kind() == Indet::Kind::dependent)
            out.insert(MultiIndex::zero(ctx.n()));
    }
    return out;
}

// Order of a differential function: the highest |alpha| among the jet
// variables it depends on, 0 for a nonzero function of (x, u) alone, -1 for
// the zero function. Dependence is syntactic presence in the canonical form,
// which for reduced fractions coincides with a nonvanishing partial.
inline int order_of(const Expr& e) {
    if (e.canonical_zero()) return -1;
    int r = 0;
    for (const Indet& v : e.indets(true))
        if (v.kind() == Indet::Kind::jet) r = std::max(r, v.jet_index().order());
    return r;
}

// Order counted along a subset of directions only.
inline int order_on(const Expr& e, const std::vector<int>& slots) {
    if (e.canonical_zero()) return -1;
    int r = 0;
    for (const Indet& v : e.indets(true))
        if (v.kind() == Indet::Kind::jet) r = std::max(r, v.jet_index().weight_on(slots));
    return r;
}

// Order in the non-checked directions when the first p slots are checked.
inline int hat_order(const Expr& e, int p, const JetContext& ctx) {
    std::vector<int> hat;
    for (int s = p + 1; s <= ctx.n(); ++s) hat.push_back(s);
    return order_on(e, hat);
}

// Total derivative along coordinate slot i.
inline Expr total_derivative(const Expr& e, int slot, const JetContext& ctx) {
    Expr acc = partial_derivative(e, Indet::coordinate(slot));
    for (const MultiIndex& alpha : jet_dependence(e, ctx)) {
        Expr de = partial_derivative(e, Indet::jet(alpha));
        if (de.canonical_zero()) continue;
        acc = acc + Expr(ctx.jet_var(alpha.plus(slot))) * de;
    }
    return acc;
}

inline Expr total_derivative(const Expr& e, const MultiIndex& alpha, const JetContext& ctx) {
    Expr acc = e;
    for (int s = 1; s <= alpha.size(); ++s)
        for (int k = 0; k < alpha.at(s); ++k) acc = total_derivative(acc, s, ctx);
    return acc;
}

}  // namespace redmod
