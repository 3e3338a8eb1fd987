#pragma once

// Shared bits for the test suites: deterministic random generators for
// rationals, point functions, and jet expressions. Every TEST_CASE seeds its
// own engine so cases stay order-independent.

#include <random>
#include <vector>

#include <redmod/redmod.hpp>

namespace testutil {

using redmod::Expr;
using redmod::Indet;
using redmod::JetContext;
using redmod::MultiIndex;
using redmod::Rational;

using Gen = std::mt19937_64;

inline int pick(Gen& g, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(g);
}

inline Rational rnd_rational(Gen& g) {
    int num = pick(g, -6, 6);
    if (num == 0) num = 1;
    return Rational(num, pick(g, 1, 4));
}

// Random polynomial in the coordinates and u: a handful of low-degree terms.
inline Expr rnd_point_poly(Gen& g, const JetContext& ctx, int terms = 3, int deg = 2) {
    Expr out(rnd_rational(g));
    for (int t = 0; t < terms; ++t) {
        Expr term(rnd_rational(g));
        for (int d = pick(g, 1, deg); d > 0; --d) {
            int which = pick(g, 0, ctx.n());
            term = term * (which == 0 ? ctx.dependent() : Expr(Indet::coordinate(which)));
        }
        out = out + term;
    }
    return out;
}

// Random invariant Phi(x, u) that genuinely moves with u.
inline Expr rnd_phi(Gen& g, const JetContext& ctx) {
    for (;;) {
        Expr phi = rnd_point_poly(g, ctx, 3, 2) + ctx.dependent() * Expr(rnd_rational(g));
        if (!redmod::is_zero(redmod::partial_derivative(phi, Indet::dependent()))) return phi;
    }
}

inline MultiIndex rnd_index(Gen& g, const JetContext& ctx, int max_order) {
    std::vector<int> e(ctx.n(), 0);
    int total = pick(g, 0, max_order);
    for (int k = 0; k < total; ++k) e[pick(g, 0, ctx.n() - 1)] += 1;
    return MultiIndex(std::move(e));
}

// Random jet-space expression: polynomial skeleton, an occasional quotient or
// exp factor. Kept small so normalization stays cheap.
inline Expr rnd_expr(Gen& g, const JetContext& ctx, int max_order, bool allow_exp = true) {
    Expr out(rnd_rational(g));
    int terms = pick(g, 1, 3);
    for (int t = 0; t < terms; ++t) {
        Expr term(rnd_rational(g));
        for (int d = pick(g, 1, 2); d > 0; --d) {
            switch (pick(g, 0, 3)) {
                case 0: term = term * Expr(Indet::coordinate(pick(g, 1, ctx.n()))); break;
                case 1: term = term * ctx.dependent(); break;
                default: term = term * Expr(Indet::jet(rnd_index(g, ctx, max_order))); break;
            }
        }
        if (allow_exp && pick(g, 0, 5) == 0)
            term = term * Expr::exp_atom(rnd_point_poly(g, ctx, 1, 1));
        out = out + term;
    }
    if (pick(g, 0, 4) == 0) out = out / (Expr(1) + Expr(Indet::coordinate(1)) * Expr(Indet::coordinate(1)));
    return out;
}

}  // namespace testutil
