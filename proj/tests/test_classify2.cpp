#include <catch2/catch_amalgamated.hpp>

#include <redmod/classify2.hpp>
#include <redmod/parser.hpp>

#include "helpers.hpp"

using namespace redmod;
using testutil::Gen;

namespace {

std::vector<std::vector<Expr>> identity_a(int m) {
    std::vector<std::vector<Expr>> a(m, std::vector<Expr>(m, Expr(0)));
    for (int i = 0; i < m; ++i) a[i][i] = Expr(1);
    return a;
}

}  // namespace

TEST_CASE("quasilinear instances are validated on entry") {
    JetContext c2(2, 4);
    auto P = [&](const char* s) { return parse_expr(s, c2); };

    QuasiLinear2 lap = make_quasilinear2(QLKind::elliptic, identity_a(2), Expr(0), c2);
    REQUIRE(lap.pd_samples.size() == 10);
    REQUIRE(make_quasilinear2(QLKind::elliptic, identity_a(2), Expr(0), c2, 3).pd_samples.size() == 3);
    REQUIRE(is_zero(quasilinear_lhs(lap, c2) - P("u[2,0] + u[0,2]")));

    // size, symmetry, and order guards
    REQUIRE_THROWS_AS(make_quasilinear2(QLKind::elliptic, identity_a(1), Expr(0), c2), error);
    auto skew = identity_a(2);
    skew[0][1] = Expr(1);
    REQUIRE_THROWS_AS(make_quasilinear2(QLKind::elliptic, skew, Expr(0), c2), error);
    auto deep = identity_a(2);
    deep[0][0] = P("u[0,2]");
    REQUIRE_THROWS_AS(make_quasilinear2(QLKind::elliptic, deep, Expr(0), c2), error);
    REQUIRE_THROWS_AS(make_quasilinear2(QLKind::elliptic, identity_a(2), P("u[2,0]"), c2), error);

    // an indefinite matrix has no positive-definiteness witness
    auto indef = identity_a(2);
    indef[0][1] = Expr(2);
    indef[1][0] = Expr(2);
    REQUIRE_THROWS_AS(make_quasilinear2(QLKind::elliptic, indef, Expr(0), c2),
                      positivity_certificate_missing);
}

TEST_CASE("left-hand sides for the time-directed kinds") {
    JetContext ct(2, 4, true);
    auto P = [&](const char* s) { return parse_expr(s, ct); };
    QuasiLinear2 ev = make_quasilinear2(QLKind::evolution, identity_a(1), P("u*u[0,1]"), ct);
    REQUIRE(ev.pd_samples.empty());
    REQUIRE(is_zero(quasilinear_lhs(ev, ct) - P("u[1,0] - u[0,2] - u*u[0,1]")));

    QuasiLinear2 wv = make_quasilinear2(QLKind::wave, identity_a(1), Expr(0), ct);
    REQUIRE(is_zero(quasilinear_lhs(wv, ct) - P("u[2,0] - u[0,2]")));
}

TEST_CASE("elliptic instances keep co-order two") {
    JetContext c2(2, 4);
    auto P = [&](const char* s) { return parse_expr(s, c2); };
    QuasiLinear2 lap = make_quasilinear2(QLKind::elliptic, identity_a(2), Expr(0), c2);

    VFModule shift{{VectorField{{Expr(1), Expr(0)}, Expr(0)}}};
    EllipticReport r1 = elliptic_coorder(lap, shift, c2);
    REQUIRE(r1.base.r == 2);
    REQUIRE(r1.base.strong_coorder == 2);
    REQUIRE(r1.base.weak_coorder);
    REQUIRE(*r1.base.weak_coorder == 2);
    REQUIRE(r1.base.weak_exact);
    REQUIRE(r1.a_hat.size() == 1);
    REQUIRE(is_zero(r1.a_hat[0][0] - Expr(1)));

    // a skew direction doubles the reduced coefficient
    VFModule diag{{VectorField{{Expr(1), Expr(0) - Expr(1)}, Expr(0)}}};
    EllipticReport r2 = elliptic_coorder(lap, diag, c2);
    REQUIRE(is_zero(r2.a_hat[0][0] - Expr(2)));

    // variable coefficients survive into a-hat
    auto var = identity_a(2);
    var[1][1] = P("1 + x1^2");
    QuasiLinear2 q3 = make_quasilinear2(QLKind::elliptic, var, Expr(0), c2);
    EllipticReport r3 = elliptic_coorder(q3, shift, c2);
    REQUIRE(is_zero(r3.a_hat[0][0] - P("1 + x1^2")));
    REQUIRE(r3.base.strong_coorder == 2);

    QuasiLinear2 wv = make_quasilinear2(QLKind::wave, identity_a(1), Expr(0), JetContext(2, 4, true));
    REQUIRE_THROWS_AS(elliptic_coorder(wv, shift, c2), error);
}

TEST_CASE("reduced coefficients of the three-coordinate Laplacian") {
    JetContext c3(3, 4);
    QuasiLinear2 lap = make_quasilinear2(QLKind::elliptic, identity_a(3), Expr(0), c3);

    VFModule mix{{VectorField{{Expr(1), Expr(0) - Expr(1), Expr(0)}, Expr(0)}}};
    EllipticReport rep = elliptic_coorder(lap, mix, c3);
    REQUIRE(rep.base.checked == std::vector<int>{1});
    REQUIRE(rep.a_hat.size() == 2);
    REQUIRE(is_zero(rep.a_hat[0][0] - Expr(2)));
    REQUIRE(is_zero(rep.a_hat[0][1]));
    REQUIRE(is_zero(rep.a_hat[1][0]));
    REQUIRE(is_zero(rep.a_hat[1][1] - Expr(1)));
}

TEST_CASE("no admissible module makes an elliptic instance singular") {
    JetContext c3(3, 4);
    QuasiLinear2 lap = make_quasilinear2(QLKind::elliptic, identity_a(3), Expr(0), c3);
    Gen g(61);
    for (int i = 0; i < 4; ++i) {
        VFModule fam = phi_family_member(testutil::rnd_phi(g, c3), i % 2 ? 2 : 1, c3);
        EllipticReport rep = elliptic_coorder(lap, fam, c3);
        REQUIRE(rep.base.strong_coorder == 2);
        REQUIRE(rep.a_hat.size() == static_cast<std::size_t>(3 - fam.p()));
    }
}

TEST_CASE("wave singularity condition") {
    JetContext ct(2, 4, true);
    auto P = [&](const char* s) { return parse_expr(s, ct); };
    QuasiLinear2 wv = make_quasilinear2(QLKind::wave, identity_a(1), Expr(0), ct);

    std::vector<Expr> cond = wave_singularity_condition(wv, {Expr(1)}, {Expr(0)}, ct);
    REQUIRE(cond.size() == 1);
    REQUIRE(is_zero(cond[0]));

    cond = wave_singularity_condition(wv, {P("t")}, {Expr(0)}, ct);
    REQUIRE(cond.size() == 1);
    REQUIRE(is_zero(cond[0] - P("t^2 - 1")));

    // u_t sneaking into the reduced coefficients splits the condition
    auto a_ut = identity_a(1);
    a_ut[0][0] = P("1 + u[0,1]");
    QuasiLinear2 qs = make_quasilinear2(QLKind::wave, a_ut, Expr(0), ct);
    std::vector<Expr> sys = wave_singularity_condition(qs, {P("t")}, {Expr(0)}, ct);
    REQUIRE(sys.size() == 2);
    bool seen_const = false, seen_cubic = false;
    for (const Expr& e : sys) {
        if (is_zero(e - P("t^2 - 1"))) seen_const = true;
        if (is_zero(e + P("t^3"))) seen_cubic = true;
    }
    REQUIRE(seen_const);
    REQUIRE(seen_cubic);

    // a u_t-dependent denominator cannot be split
    auto a_den = identity_a(1);
    a_den[0][0] = P("1/(1 + u[0,1]^2)");
    QuasiLinear2 qd = make_quasilinear2(QLKind::wave, a_den, Expr(0), ct);
    REQUIRE_THROWS_AS(wave_singularity_condition(qd, {P("t")}, {Expr(0)}, ct), error);

    REQUIRE_THROWS_AS(wave_singularity_condition(wv, {P("u[0,1]")}, {Expr(0)}, ct), error);
    REQUIRE_THROWS_AS(wave_singularity_condition(wv, {Expr(1), Expr(1)}, {Expr(0)}, ct), error);
    QuasiLinear2 ev = make_quasilinear2(QLKind::evolution, identity_a(1), Expr(0), ct);
    REQUIRE_THROWS_AS(wave_singularity_condition(ev, {Expr(1)}, {Expr(0)}, ct), error);
}

TEST_CASE("the condition tracks actual co-orders") {
    JetContext ct(2, 4, true);
    auto P = [&](const char* s) { return parse_expr(s, ct); };
    QuasiLinear2 wv = make_quasilinear2(QLKind::wave, identity_a(1), Expr(0), ct);
    Expr L = quasilinear_lhs(wv, ct);

    auto module_for = [&](const Expr& tau, const Expr& eta) {
        return VFModule{{VectorField{{tau, Expr(1)}, eta}}};
    };

    // condition holds identically: singular, here even ultra
    SingularityReport s1 = weak_coorder(L, module_for(Expr(1), Expr(0)), ct);
    REQUIRE(s1.ultra);
    REQUIRE(s1.strong_coorder == -1);

    SingularityReport s2 = weak_coorder(L, module_for(Expr(1), P("u")), ct);
    REQUIRE(s2.strong_coorder == 1);

    // condition fails identically: the module stays regular
    SingularityReport s3 = weak_coorder(L, module_for(P("t"), Expr(0)), ct);
    REQUIRE(s3.strong_coorder == 2);
    SingularityReport s4 = weak_coorder(L, module_for(P("1/2"), Expr(0)), ct);
    REQUIRE(s4.strong_coorder == 2);

    // any eta rides along when tau = 1
    Gen g(62);
    for (int i = 0; i < 5; ++i) {
        SingularityReport s = weak_coorder(L, module_for(Expr(1), testutil::rnd_point_poly(g, ct)), ct);
        REQUIRE(s.strong_coorder <= 1);
    }
}

TEST_CASE("module of an invariant pair") {
    JetContext ct(2, 4, true);
    auto P = [&](const char* s) { return parse_expr(s, ct); };

    VFModule m = phi_pair_module(P("x - t"), P("u"), ct);
    REQUIRE(m.p() == 1);
    REQUIRE(is_zero(m.fields[0].xi[0] - Expr(1)));
    REQUIRE(is_zero(m.fields[0].xi[1] - Expr(1)));
    REQUIRE(is_zero(m.fields[0].eta));

    // both invariants are annihilated by construction
    REQUIRE(is_zero(m.fields[0].apply(P("x - t"))));
    REQUIRE(is_zero(m.fields[0].apply(P("u"))));

    REQUIRE_THROWS_AS(phi_pair_module(P("t"), P("x"), ct), degenerate_jacobian);
    REQUIRE_THROWS_AS(phi_pair_module(P("u[0,1]"), P("u"), ct), error);
}

TEST_CASE("pair modules are always involutive") {
    JetContext c3(3, 4, true);
    Gen g(63);
    for (int i = 0; i < 12; ++i) {
        // Phi^1 moves with t but not u, so the (t, u)-Jacobian of the pair
        // reduces to the u-derivative of Phi^2, which rnd_phi keeps nonzero
        Expr phi1 = Expr(Indet::coordinate(1));
        for (int k = 0; k < 2; ++k) {
            Expr term(testutil::rnd_rational(g));
            for (int d = testutil::pick(g, 1, 2); d > 0; --d)
                term = term * Expr(Indet::coordinate(testutil::pick(g, 2, 3)));
            phi1 = phi1 + term;
        }
        Expr phi2 = testutil::rnd_phi(g, c3);
        VFModule m = phi_pair_module(phi1, phi2, c3);
        REQUIRE(m.p() == 2);
        REQUIRE(rank_condition(m));
        REQUIRE(is_involutive(m));
        for (const VectorField& f : m.fields) {
            REQUIRE(is_zero(f.apply(phi1)));
            REQUIRE(is_zero(f.apply(phi2)));
        }
    }
}

TEST_CASE("characteristic surfaces and their flat modules") {
    JetContext ct(2, 4, true);
    auto P = [&](const char* s) { return parse_expr(s, ct); };
    QuasiLinear2 wv = make_quasilinear2(QLKind::wave, identity_a(1), Expr(0), ct);

    REQUIRE(is_zero(eiconal_residual(wv, P("t + x"), ct)));
    REQUIRE(is_zero(eiconal_residual(wv, P("t + 2*x"), ct) + Expr(3)));

    VFModule m = meta_module_from_eiconal(wv, P("t + x"), ct);
    REQUIRE(m.p() == 2);
    REQUIRE(is_zero(m.fields[0].xi[0] + Expr(1)));  // -Psi_x
    REQUIRE(is_zero(m.fields[0].xi[1] - Expr(1)));  // Psi_t
    REQUIRE(is_zero(m.fields[0].eta));
    REQUIRE(is_zero(m.fields[1].eta - Expr(1)));    // the vertical generator

    REQUIRE_THROWS_AS(meta_module_from_eiconal(wv, P("t + 2*x"), ct), eiconal_violated);
    REQUIRE_THROWS_AS(meta_module_from_eiconal(wv, P("x"), ct), degenerate_invariant);
    QuasiLinear2 lap = make_quasilinear2(QLKind::elliptic, identity_a(2), Expr(0), JetContext(2, 4));
    REQUIRE_THROWS_AS(eiconal_residual(lap, P("t + x"), ct), error);

    // variable sound speed: Psi = x*exp(t) solves Psi_t^2 = x^2 Psi_x^2
    auto var = identity_a(1);
    var[0][0] = P("x^2");
    QuasiLinear2 qv = make_quasilinear2(QLKind::wave, var, Expr(0), ct);
    REQUIRE(is_zero(eiconal_residual(qv, P("x*exp(t)"), ct)));
    VFModule mv = meta_module_from_eiconal(qv, P("x*exp(t)"), ct);
    REQUIRE(is_zero(mv.fields[0].xi[1] - P("x*exp(t)")));
}

TEST_CASE("submodules of a characteristic module are singular") {
    JetContext ct(2, 4, true);
    auto P = [&](const char* s) { return parse_expr(s, ct); };
    QuasiLinear2 wv = make_quasilinear2(QLKind::wave, identity_a(1), Expr(0), ct);
    Expr L = quasilinear_lhs(wv, ct);
    VFModule m = meta_module_from_eiconal(wv, P("t + x"), ct);

    // single-field combinations base + f * vertical stay singular for any f
    auto combo = [&](const Expr& f) {
        VectorField v{m.fields[0].xi, m.fields[0].eta + f};
        return VFModule{{v}};
    };
    REQUIRE(weak_coorder(L, combo(Expr(0)), ct).ultra);
    REQUIRE(weak_coorder(L, combo(P("u")), ct).strong_coorder == 1);
    Gen g(64);
    for (int i = 0; i < 5; ++i) {
        SingularityReport s = weak_coorder(L, combo(testutil::rnd_point_poly(g, ct)), ct);
        REQUIRE(s.strong_coorder <= 1);
    }
}
