#include <catch2/catch_amalgamated.hpp>

#include <redmod/manifold.hpp>
#include <redmod/parser.hpp>

#include "helpers.hpp"

using namespace redmod;
using testutil::Gen;

namespace {

VFModule two_shifts(const JetContext& ctx) {
    std::vector<Expr> e1(ctx.n(), Expr(0)), e2(ctx.n(), Expr(0));
    e1[0] = Expr(1);
    e2[1] = Expr(1);
    return VFModule({VectorField(std::move(e1), Expr(0)), VectorField(std::move(e2), Expr(0))});
}

}  // namespace

TEST_CASE("rewrite system binds checked jets everywhere") {
    JetContext ctx(2, 4, true);
    auto P = [&](const char* s) { return parse_expr(s, ctx); };
    VFModule m{{VectorField{{P("0"), P("1")}, P("u")}}};  // u_x -> u
    RewriteSystem rs = build_rewrites(canonical_basis(m), 2, ctx);

    REQUIRE(is_zero(rs.reduce(P("u[0,1]"), ctx) - P("u")));
    REQUIRE(is_zero(rs.reduce(P("u[0,2]"), ctx) - P("u")));
    REQUIRE(is_zero(rs.reduce(P("u[1,1]"), ctx) - P("u[1,0]")));
    // inside exp arguments as well
    REQUIRE(rs.reduce(P("exp(u[0,1]) - exp(u)"), ctx).canonical_zero());
    // unchecked jets are untouched
    REQUIRE(is_zero(rs.reduce(P("u[2,0]"), ctx) - P("u[2,0]")));
    // asking beyond the built order is a hard error, not silence
    REQUIRE_THROWS_AS(rs.reduce(P("u[0,3]"), ctx), error);
}

TEST_CASE("reduction is idempotent") {
    JetContext ctx(3, 3);
    Gen g(31);
    auto P = [&](const char* s) { return parse_expr(s, ctx); };
    VFModule m{{VectorField{{P("1"), P("0"), P("0")}, P("u")},
                VectorField{{P("0"), P("1"), P("x3")}, P("0")}}};
    RewriteSystem rs = build_rewrites(canonical_basis(m), 3, ctx);
    for (int i = 0; i < 10; ++i) {
        Expr f = testutil::rnd_expr(g, ctx, 3);
        Expr once = rs.reduce(f, ctx);
        REQUIRE(is_zero(rs.reduce(once, ctx) - once));
    }
}

TEST_CASE("derivatives of the characteristic vanish on the manifold") {
    // D^delta(Q[u]) for |delta| <= r-1 lies in the ideal the rewrites quotient
    // by; this is what makes restricted residuals basis-independent
    JetContext ctx(2, 4);
    Gen g(32);
    for (int i = 0; i < 6; ++i) {
        Expr phi = testutil::rnd_phi(g, ctx);
        VFModule fam = phi_family_member(phi, 1, ctx);
        int r = 3;
        RewriteSystem rs = build_rewrites(canonical_basis(fam), r, ctx);
        Expr q = characteristic(fam.fields[0], ctx);
        for (int a = 0; a + 1 <= r - 1; ++a)
            for (int b = 0; a + b <= r - 1; ++b) {
                Expr d = total_derivative(q, MultiIndex({a, b}), ctx);
                REQUIRE(is_zero(rs.reduce(d, ctx)));
            }
    }
}

TEST_CASE("elimination order does not change the rewrites") {
    JetContext c3(3, 3);
    auto P = [&](const char* s) { return parse_expr(s, c3); };
    VFModule m{{VectorField{{P("1"), P("0"), P("0")}, P("u")},
                VectorField{{P("0"), P("1"), P("x3")}, P("0")}}};
    CanonicalModule cm = canonical_basis(m);
    RewriteSystem a = build_rewrites(cm, 3, c3, ElimOrder::smallest_slot);
    RewriteSystem b = build_rewrites(cm, 3, c3, ElimOrder::largest_slot);
    Expr L = P("u[2,1,0] + u[0,0,2]*u - x3");
    REQUIRE(is_zero(a.reduce(L, c3) - b.reduce(L, c3)));

    Gen g(33);
    for (int i = 0; i < 5; ++i) {
        Expr f = testutil::rnd_expr(g, c3, 3);
        REQUIRE(is_zero(a.reduce(f, c3) - b.reduce(f, c3)));
    }
}

TEST_CASE("golden pair: third and second order variants") {
    JetContext ctx(3, 3);
    auto P = [&](const char* s) { return parse_expr(s, ctx); };
    VFModule m = two_shifts(ctx);

    Expr L1 = P("x2*u[3,0,0] + x1*u[0,3,0] - exp(u[0,0,2])*(u[0,0,1] + u)");
    SingularityReport r1 = weak_coorder(L1, m, ctx);
    REQUIRE(r1.r == 3);
    REQUIRE(r1.strong_coorder == 2);
    REQUIRE_FALSE(r1.ultra);
    REQUIRE(r1.weak_coorder);
    REQUIRE(*r1.weak_coorder == 1);
    REQUIRE(r1.weak_exact);
    // the multiplier splits off exactly: associated = multiplier * core
    REQUIRE(r1.multiplier);
    REQUIRE(r1.core);
    REQUIRE(is_zero(*r1.multiplier * *r1.core - r1.associated));
    REQUIRE(is_zero(r1.associated + P("exp(u[0,0,2])*(u[0,0,1] + u)")));

    Expr L2 = P("x2*u[2,0,0] + x1*u[0,2,0] - exp(u[0,0,2])*(u[0,0,1] + u)");
    SingularityReport r2 = weak_coorder(L2, m, ctx);
    REQUIRE(r2.r == 2);
    REQUIRE(r2.strong_coorder == 2);  // regular: the co-order equals the order
    REQUIRE(*r2.weak_coorder == 1);
}

TEST_CASE("strong co-order edge cases") {
    JetContext ctx(2, 4, true);
    auto P = [&](const char* s) { return parse_expr(s, ctx); };
    VFModule m{{VectorField{{P("0"), P("1")}, P("u")}}};

    SingularityReport heat = weak_coorder(P("u[1,0] - u[0,2]"), m, ctx);
    REQUIRE(heat.strong_coorder == 1);
    REQUIRE(is_zero(heat.associated - P("u[1,0] - u")));
    REQUIRE(heat.weak_coorder);
    REQUIRE(*heat.weak_coorder == 1);
    REQUIRE(heat.checked == std::vector<int>{2});

    SingularityReport ultra = strong_coorder(P("u[0,1] - u"), m, ctx);
    REQUIRE(ultra.ultra);
    REQUIRE(ultra.strong_coorder == -1);

    // order-zero functions: a nonvanishing unit is regular at order 0
    SingularityReport point = weak_coorder(P("exp(u)*(u - x1)"), m, ctx);
    REQUIRE(point.strong_coorder == 0);
    REQUIRE(*point.weak_coorder == 0);

    REQUIRE_THROWS_AS(strong_coorder(P("0"), m, ctx), error);
    // p = n needs the full-dimensional path, not this one
    VFModule full{{VectorField{{P("1"), P("0")}, P("0")},
                   VectorField{{P("0"), P("1")}, P("0")}}};
    REQUIRE_THROWS_AS(strong_coorder(P("u[1,0] - u"), full, ctx), error);
    VFModule vertical{{VectorField{{P("0"), P("0")}, P("u")}}};
    REQUIRE_THROWS_AS(strong_coorder(P("u[1,0] - u"), vertical, ctx), rank_deficient);
}

TEST_CASE("weak never exceeds strong") {
    JetContext ctx(2, 3);
    Gen g(34);
    for (int i = 0; i < 8; ++i) {
        Expr phi = testutil::rnd_phi(g, ctx);
        VFModule fam = phi_family_member(phi, 1, ctx);
        Expr L = testutil::rnd_expr(g, ctx, 2, false);
        if (order_of(L) < 1) continue;
        SingularityReport rep = weak_coorder(L, fam, ctx);
        if (rep.ultra) {
            REQUIRE(rep.strong_coorder == -1);
            continue;
        }
        REQUIRE(rep.weak_coorder);
        REQUIRE(*rep.weak_coorder <= rep.strong_coorder);
        REQUIRE(rep.strong_coorder <= order_of(L));
    }
}

TEST_CASE("meta singularity in the involutive variant") {
    JetContext c2(2, 4);
    auto P = [&](const char* s) { return parse_expr(s, c2); };
    // the hat order of the t-derivative term survives the family rewrite
    MetaSingularityReport k1 = meta_singularity_coorder(P("u[0,1] - u[2,0]"), 1, c2);
    REQUIRE(k1.k == 1);
    REQUIRE_FALSE(k1.special_variant);
    REQUIRE(k1.carriers == std::vector<MultiIndex>{MultiIndex({0, 1})});

    MetaSingularityReport k2 = meta_singularity_coorder(P("u[0,2] - u[1,0]*u"), 1, c2);
    REQUIRE(k2.k == 2);

    REQUIRE_THROWS_AS(meta_singularity_coorder(P("0"), 1, c2), error);
    REQUIRE_THROWS_AS(meta_singularity_coorder(P("u[1,0]"), 2, c2), error);  // p must stay below n
}

TEST_CASE("special variant change of jet coordinates") {
    JetContext c2(2, 4);
    auto P = [&](const char* s) { return parse_expr(s, c2); };
    // omega_(2,0) spelled out by hand reduces to the single jet u[2,0]
    Expr om20 = P("u[2,0] + 2*u*u[1,1] + u^2*u[0,2] + u[1,0]*u[0,1] + u*u[0,1]^2");
    MetaSingularityReport rep = meta_singularity_coorder_special(om20, {}, c2);
    REQUIRE(rep.k == 0);
    REQUIRE(rep.special_variant);
    REQUIRE(is_zero(rep.reduced - P("u[2,0]")));

    // a generic second-order function keeps a full hat order of 2
    MetaSingularityReport gen = meta_singularity_coorder_special(P("u[0,2] + u"), {}, c2);
    REQUIRE(gen.k == 2);
}

TEST_CASE("family evaluation of a reduced function") {
    JetContext c2(2, 3);
    auto P = [&](const char* s) { return parse_expr(s, c2); };
    VectorField pf{{P("1"), P("0")}, P("x2*u")};
    Expr fam = family_reduced_function(P("u[1,1]"), {pf}, 1, c2);
    REQUIRE(is_zero(fam - P("u + x2*u[0,1]")));
    // pure hat derivatives pass through unchanged
    REQUIRE(is_zero(family_reduced_function(P("u[0,2]"), {pf}, 1, c2) - P("u[0,2]")));
}

TEST_CASE("associated function agrees with a direct reduction") {
    JetContext ctx(3, 3);
    Gen g(35);
    for (int i = 0; i < 5; ++i) {
        Expr phi = testutil::rnd_phi(g, ctx);
        VFModule fam = phi_family_member(phi, 2, ctx);
        Expr L = testutil::rnd_expr(g, ctx, 2, false);
        if (order_of(L) < 1) continue;
        SingularityReport rep = strong_coorder(L, fam, ctx);
        RewriteSystem rs = build_rewrites(canonical_basis(fam), std::max(order_of(L), 1), ctx);
        REQUIRE(is_zero(rep.associated - rs.reduce(L, ctx)));
    }
}
