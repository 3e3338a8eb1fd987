#include <catch2/catch_amalgamated.hpp>

#include <redmod/jet.hpp>
#include <redmod/parser.hpp>

#include "helpers.hpp"

using namespace redmod;
using testutil::Gen;

TEST_CASE("total derivative on hand-checked inputs") {
    JetContext ctx(2, 4, true);
    auto P = [&](const char* s) { return parse_expr(s, ctx); };

    // D_x(u u_x) = u_x^2 + u u_xx
    REQUIRE(is_zero(total_derivative(P("u*u[0,1]"), 2, ctx) - P("u[0,1]^2 + u*u[0,2]")));
    // D_t(t u) = u + t u_t
    REQUIRE(is_zero(total_derivative(P("t*u"), 1, ctx) - P("u + t*u[1,0]")));
    // constants die
    REQUIRE(total_derivative(P("5/7"), 1, ctx).canonical_zero());
    // exp chains through its argument
    REQUIRE(is_zero(total_derivative(P("exp(u)"), 2, ctx) - P("exp(u)*u[0,1]")));
    // quotient rule
    Expr q = total_derivative(P("u/x"), 2, ctx);
    REQUIRE(is_zero(q - P("u[0,1]/x - u/x^2")));
}

TEST_CASE("total derivatives commute") {
    JetContext ctx(2, 5, true);
    Gen g(11);
    for (int i = 0; i < 12; ++i) {
        Expr f = testutil::rnd_expr(g, ctx, 3);
        Expr d12 = total_derivative(total_derivative(f, 1, ctx), 2, ctx);
        Expr d21 = total_derivative(total_derivative(f, 2, ctx), 1, ctx);
        REQUIRE(is_zero(d12 - d21));
    }
}

TEST_CASE("total derivative satisfies the Leibniz rule") {
    JetContext ctx(3, 4);
    Gen g(12);
    for (int i = 0; i < 12; ++i) {
        Expr f = testutil::rnd_expr(g, ctx, 2, false);
        Expr h = testutil::rnd_expr(g, ctx, 2, false);
        int slot = testutil::pick(g, 1, 3);
        Expr lhs = total_derivative(f * h, slot, ctx);
        Expr rhs = f * total_derivative(h, slot, ctx) + h * total_derivative(f, slot, ctx);
        REQUIRE(is_zero(lhs - rhs));
    }
}

TEST_CASE("differentiation raises the order by exactly one") {
    JetContext ctx(2, 6);
    Gen g(13);
    for (int i = 0; i < 12; ++i) {
        Expr f = testutil::rnd_expr(g, ctx, 3);
        if (jet_dependence(f, ctx).empty()) continue;
        int slot = testutil::pick(g, 1, 2);
        REQUIRE(order_of(total_derivative(f, slot, ctx)) == order_of(f) + 1);
    }
    // point functions gain their first jet
    REQUIRE(order_of(total_derivative(parse_expr("x1*u", ctx), 1, ctx)) == 1);
}

TEST_CASE("multi-index total derivative agrees with iteration") {
    JetContext ctx(2, 6);
    Gen g(14);
    for (int i = 0; i < 8; ++i) {
        Expr f = testutil::rnd_expr(g, ctx, 2, false);
        Expr via_multi = total_derivative(f, MultiIndex({2, 1}), ctx);
        Expr step = total_derivative(f, 1, ctx);
        step = total_derivative(step, 1, ctx);
        step = total_derivative(step, 2, ctx);
        REQUIRE(is_zero(via_multi - step));
    }
}

TEST_CASE("jet dependence and order bookkeeping") {
    JetContext ctx(3, 3);
    auto P = [&](const char* s) { return parse_expr(s, ctx); };
    Expr L = P("x2*u[3,0,0] + x1*u[0,3,0] - exp(u[0,0,2])*(u[0,0,1] + u)");
    std::set<MultiIndex> deps = jet_dependence(L, ctx);
    REQUIRE(deps.size() == 5);  // includes the zero index for u itself
    REQUIRE(deps.count(MultiIndex({0, 0, 0})) == 1);
    REQUIRE(deps.count(MultiIndex({3, 0, 0})) == 1);
    REQUIRE(deps.count(MultiIndex({0, 0, 1})) == 1);
    REQUIRE(order_of(L) == 3);
    REQUIRE(order_of(P("x1 + u")) == 0);
    REQUIRE(order_of(P("x1")) == 0);

    // order restricted to a slot subset, and the hat order
    REQUIRE(order_on(L, {3}) == 2);
    REQUIRE(order_on(L, {1, 2}) == 3);
    REQUIRE(hat_order(P("u[0,0,2] + u[1,0,0]"), 2, ctx) == 2);
    REQUIRE(hat_order(P("u[1,0,0]"), 2, ctx) == 0);
}

TEST_CASE("jets inside exp arguments are differentiated too") {
    JetContext ctx(2, 4);
    auto P = [&](const char* s) { return parse_expr(s, ctx); };
    Expr f = P("exp(u[1,0])");
    Expr d = total_derivative(f, 2, ctx);
    REQUIRE(is_zero(d - P("exp(u[1,0])*u[1,1]")));
    REQUIRE(order_of(d) == 2);
}
