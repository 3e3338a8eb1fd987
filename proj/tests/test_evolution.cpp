#include <catch2/catch_amalgamated.hpp>

#include <redmod/evolution.hpp>
#include <redmod/parser.hpp>

#include "helpers.hpp"

using namespace redmod;
using testutil::Gen;

TEST_CASE("evolution equations are validated on entry") {
    JetContext ctx(2, 4, true);
    auto P = [&](const char* s) { return parse_expr(s, ctx); };
    EvolutionEquation heat = make_evolution(P("u[0,2]"), ctx);
    REQUIRE(heat.spatial == 1);
    REQUIRE(heat.r == 2);
    REQUIRE(is_zero(evolution_lhs(heat, ctx) - P("u[1,0] - u[0,2]")));

    REQUIRE_THROWS_AS(make_evolution(P("u[1,1]"), ctx), error);  // no t-derivatives on the right
    REQUIRE_THROWS_AS(make_evolution(P("u[0,1]"), ctx), error);  // needs order >= 2
    JetContext c1(1, 3);
    REQUIRE_THROWS_AS(make_evolution(parse_expr("u[2]", c1), c1), error);  // needs a spatial slot
}

TEST_CASE("reduced right-hand side on known tuples") {
    JetContext ctx(2, 4, true, {{"c", false, false}});
    auto P = [&](const char* s) { return parse_expr(s, ctx); };
    EvolutionEquation heat = make_evolution(P("u[0,2]"), ctx);

    // eta = u: u_x -> u, u_xx -> u
    REQUIRE(is_zero(tilde_H(heat, {P("u")}, ctx) - P("u")));
    // eta = 0: flat ansatz
    REQUIRE(tilde_H(heat, {P("0")}, ctx).canonical_zero());
    // eta = c kills a product of higher derivatives
    EvolutionEquation e3 = make_evolution(P("u[0,1]*u[0,2]"), ctx);
    REQUIRE(tilde_H(e3, {P("c")}, ctx).canonical_zero());
    // the reduced function is a point function by construction
    REQUIRE(order_of(tilde_H(heat, {P("t*u + x")}, ctx)) == 0);
}

TEST_CASE("derivative replacement agrees with the rewrite system") {
    // for involutive tuples the recursion along h^alpha and the manifold
    // rewrites are two routes to the same function
    JetContext ctx(3, 4, true);
    Gen g(51);
    for (int i = 0; i < 6; ++i) {
        Expr phi = testutil::rnd_phi(g, ctx);
        VFModule fam = phi_family_member(phi, std::vector<int>{2, 3}, ctx);
        std::vector<Expr> eta{fam.fields[0].eta, fam.fields[1].eta};
        Expr H = testutil::rnd_expr(g, ctx, 2, false);
        // strip t-derivatives to stay an admissible right-hand side
        std::map<Indet, Expr> kill;
        for (const MultiIndex& a : jet_dependence(H, ctx))
            if (a.at(1) > 0) kill.emplace(Indet::jet(a), Expr(0));
        if (!kill.empty()) H = substitute(H, kill);
        if (order_of(H) < 2) H = H + parse_expr("u[0,2,0]", ctx);

        EvolutionEquation e = make_evolution(H, ctx);
        Expr via_tuple = tilde_H(e, eta, ctx);
        RewriteSystem rs = build_rewrites(canonical_basis(fam), std::max(order_of(H), 1), ctx);
        REQUIRE(is_zero(via_tuple - rs.reduce(H, ctx)));
    }
}

TEST_CASE("determining system for the heat equation") {
    JetContext ctx(2, 4, true);
    auto P = [&](const char* s) { return parse_expr(s, ctx); };
    EvolutionEquation heat = make_evolution(P("u[0,2]"), ctx);

    DeterminingSystem d1 = determining_system_evolution(heat, {P("u")}, ctx);
    REQUIRE(d1.involutive);
    REQUIRE(d1.is_reduction_module);
    REQUIRE(d1.involutivity_residuals.size() == 1);  // n(n+1)/2 with n = 1
    REQUIRE(d1.invariance_residuals.size() == 1);
    REQUIRE(is_zero(d1.invariance_residuals[0]));
    REQUIRE(is_zero(d1.tilde - P("u")));

    // eta = t fails: the invariance residual is the constant 1
    DeterminingSystem d2 = determining_system_evolution(heat, {P("t")}, ctx);
    REQUIRE_FALSE(d2.is_reduction_module);
    REQUIRE(is_zero(d2.invariance_residuals[0] - Expr(1)));

    DeterminingSystem d3 = determining_system_evolution(heat, {P("0")}, ctx);
    REQUIRE(d3.is_reduction_module);
}

TEST_CASE("involutivity residual count and zero diagonal") {
    JetContext c3(3, 4, true);
    auto P = [&](const char* s) { return parse_expr(s, c3); };
    EvolutionEquation e = make_evolution(P("u[0,2,0] + u[0,0,2]"), c3);
    DeterminingSystem d = determining_system_evolution(e, {P("u"), P("x2*u")}, c3);
    REQUIRE(d.involutivity_residuals.size() == 3);  // pairs (1,1), (1,2), (2,2)
    REQUIRE(d.invariance_residuals.size() == 2);
    // diagonal pairs vanish identically
    REQUIRE(is_zero(d.involutivity_residuals.front()));
    REQUIRE(is_zero(d.involutivity_residuals.back()));
}

TEST_CASE("phi residual for the heat equation") {
    JetContext ctx(2, 4, true);
    auto P = [&](const char* s) { return parse_expr(s, ctx); };
    EvolutionEquation heat = make_evolution(P("u[0,2]"), ctx);

    PhiEvolutionReport ok = phi_residual_evolution(heat, P("u*exp(0 - t - x)"), ctx);
    REQUIRE(ok.zero);
    REQUIRE(ok.chi_repairable);
    REQUIRE(is_zero(ok.eta[0] - P("u")));
    REQUIRE(is_zero(ok.H_phi - P("u")));
    for (const Expr& c : ok.identity_checks) REQUIRE(is_zero(c));

    // Phi = u - t misses by the constant source term
    PhiEvolutionReport off = phi_residual_evolution(heat, P("u - t"), ctx);
    REQUIRE_FALSE(off.zero);
    REQUIRE(is_zero(off.residual + Expr(1)));
    REQUIRE(off.chi_repairable);  // constants are absorbed by a chi shift
    for (const Expr& c : off.identity_checks) REQUIRE(is_zero(c));

    REQUIRE_THROWS_AS(phi_residual_evolution(heat, P("t + x"), ctx), degenerate_invariant);
}

TEST_CASE("chi repair requires the module to kill the residual") {
    JetContext ctx(2, 4, true);
    auto P = [&](const char* s) { return parse_expr(s, ctx); };
    EvolutionEquation heat = make_evolution(P("u[0,2]"), ctx);
    // residual depends on x through the family, not repairable
    PhiEvolutionReport rep = phi_residual_evolution(heat, P("u - x^3"), ctx);
    REQUIRE_FALSE(rep.zero);
    REQUIRE_FALSE(rep.chi_repairable);
    bool some_nonzero = false;
    for (const Expr& c : rep.chi_residuals) some_nonzero = some_nonzero || !is_zero(c);
    REQUIRE(some_nonzero);
}

TEST_CASE("the three extension verdicts move together") {
    JetContext ctx(2, 4, true);
    auto P = [&](const char* s) { return parse_expr(s, ctx); };
    EvolutionEquation heat = make_evolution(P("u[0,2]"), ctx);

    TildeExtension all_true = tilde_extension(heat, {P("u")}, ctx);
    REQUIRE(all_true.reduction_module);
    REQUIRE(all_true.tilde_involutive);
    REQUIRE(all_true.full_ultra);
    REQUIRE(all_true.q_tilde);
    REQUIRE(all_true.q_tilde->p() == 2);

    TildeExtension all_false = tilde_extension(heat, {P("t*u")}, ctx);
    REQUIRE_FALSE(all_false.reduction_module);
    REQUIRE_FALSE(all_false.tilde_involutive);
    REQUIRE_FALSE(all_false.full_ultra);

    // random tuples: the three answers agree in every case
    Gen g(52);
    for (int i = 0; i < 8; ++i) {
        Expr eta = testutil::rnd_point_poly(g, ctx, 2, 2);
        TildeExtension t = tilde_extension(heat, {eta}, ctx);
        REQUIRE(t.reduction_module == t.tilde_involutive);
        REQUIRE(t.reduction_module == t.full_ultra);
    }
}

TEST_CASE("co-order one reduction") {
    JetContext c2(2, 4);
    auto P = [&](const char* s) { return parse_expr(s, c2); };
    Expr L = P("u[0,1] - u[2,0]");

    Coorder1Report g1 = coorder1_G(L, P("u*exp(0 - x1)"), c2);
    REQUIRE(is_zero(g1.G - P("u")));
    REQUIRE_FALSE(g1.zero);  // Phi ignores x2, so the ansatz misses L

    Coorder1Report g2 = coorder1_G(L, P("u*exp(0 - x1 - x2)"), c2);
    REQUIRE(g2.zero);
    REQUIRE(is_zero(g2.eta[0] - P("u")));
    REQUIRE(is_zero(g2.residual));

    // the family value of L must be affine in the hat derivative
    REQUIRE_THROWS_AS(coorder1_G(P("u[0,1]^2 - u[2,0]"), P("u*exp(0 - x1)"), c2), not_solvable);
    // hat order one is a precondition, not a silent assumption
    REQUIRE_THROWS_AS(coorder1_G(P("u[2,0] - u"), P("u*exp(0 - x1)"), c2), error);
    // Phi without u never defines an ansatz
    REQUIRE_THROWS_AS(coorder1_G(L, P("x1 + x2"), c2), degenerate_invariant);
}

TEST_CASE("coorder1 matches the determining route on the heat equation") {
    // the same heat reduction seen through the co-order-one lens: slot 1 is
    // the spatial direction, slot 2 carries the single hat derivative
    JetContext c2(2, 4);
    auto P = [&](const char* s) { return parse_expr(s, c2); };
    Expr L = P("u[0,1] - u[2,0]");  // u_'t' = u_xx with t sitting in slot 2
    Coorder1Report rep = coorder1_G(L, P("u*exp(0 - x1 - x2)"), c2);
    REQUIRE(rep.zero);
    REQUIRE(rep.chi_repairable);
    for (const Expr& c : rep.chi_residuals) REQUIRE(is_zero(c));
}
