#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "redmod/reduction.hpp"

namespace redmod {

// u_t = H(t, x, u_(r,x)) with slot 1 the time direction and slots 2..n+1 the
// spatial ones. H carries no t-derivatives and has order at least two.
struct EvolutionEquation {
    Expr H;
    int spatial = 0;
    int r = 0;
};

inline EvolutionEquation make_evolution(const Expr& H, const JetContext& ctx) {
    if (ctx.n() < 2) throw error("InvalidArgument", "an evolution equation needs a time slot and at least one spatial slot");
    for (const MultiIndex& alpha : jet_dependence(H, ctx))
        if (alpha.at(1) > 0)
            throw error("InvalidArgument", "the right-hand side must not contain t-derivatives of u");
    int r = order_of(H);
    if (r < 2) throw error("InvalidArgument", "the right-hand side must have order at least two");
    return EvolutionEquation{H, ctx.n() - 1, r};
}

inline Expr evolution_lhs(const EvolutionEquation& e, const JetContext& ctx) {
    return Expr(ctx.jet_var(MultiIndex::unit(ctx.n(), 1))) - e.H;
}

namespace detail {

inline void check_point_function(const Expr& f, const JetContext& ctx, const char* what) {
    for (const MultiIndex& alpha : jet_dependence(f, ctx))
        if (alpha.order() > 0)
            throw error("InvalidArgument", std::string(what) + " must be a function of the base variables and u only");
}

// Q_s = d_{x_s} + eta^s d_u as a full-coordinate point field (s is spatial).
inline std::vector<VectorField> spatial_point_fields(const std::vector<Expr>& eta,
                                                     const JetContext& ctx) {
    std::vector<VectorField> out;
    for (std::size_t s = 0; s < eta.size(); ++s) {
        std::vector<Expr> xi(ctx.n(), Expr(0));
        xi[s + 1] = Expr(1);
        out.push_back(VectorField{std::move(xi), eta[s]});
    }
    return out;
}

// u_alpha = h^alpha(t,x,u): iterated point-field applications, rightmost
// spatial direction first. Order of application is immaterial exactly when
// the commutation residuals vanish.
inline Expr h_value(const MultiIndex& alpha, const std::vector<VectorField>& q,
                    const JetContext& ctx) {
    Expr g = ctx.dependent();
    for (int s = ctx.n() - 1; s >= 1; --s)
        for (int k = 0; k < alpha.at(s + 1); ++k) g = q[s - 1].apply(g);
    return g;
}

}  // namespace detail

// Commutation residuals of the n spatial fields, unordered pairs s <= s'
// (the diagonal is identically zero and kept for the count).
inline std::vector<Expr> involutivity_residuals(const std::vector<Expr>& eta,
                                                const JetContext& ctx) {
    int n = static_cast<int>(eta.size());
    std::vector<Expr> out;
    for (int s = 1; s <= n; ++s)
        for (int sp = s; sp <= n; ++sp) {
            const Expr& a = eta[s - 1];
            const Expr& b = eta[sp - 1];
            out.push_back(partial_derivative(a, Indet::coordinate(sp + 1)) +
                          b * partial_derivative(a, Indet::dependent()) -
                          partial_derivative(b, Indet::coordinate(s + 1)) -
                          a * partial_derivative(b, Indet::dependent()));
        }
    return out;
}

// H with every spatial derivative traded for its h^alpha value. Refuses when
// the eta-tuple is not involutive, since then the recursion depends on the
// application order.
inline Expr tilde_H(const EvolutionEquation& e, const std::vector<Expr>& eta,
                    const JetContext& ctx) {
    if (static_cast<int>(eta.size()) != e.spatial)
        throw error("InvalidArgument", "need one eta per spatial direction");
    for (const Expr& f : eta) detail::check_point_function(f, ctx, "eta");
    for (const Expr& res : involutivity_residuals(eta, ctx))
        if (!is_zero(res))
            throw not_involutive("commutation residual " + ctx.print(res) + " is nonzero");
    std::vector<VectorField> q = detail::spatial_point_fields(eta, ctx);
    std::map<Indet, Expr> bind;
    for (const MultiIndex& alpha : jet_dependence(e.H, ctx))
        if (alpha.order() > 0) bind.emplace(Indet::jet(alpha), detail::h_value(alpha, q, ctx));
    Expr out = bind.empty() ? e.H : substitute(e.H, bind);
    if (order_of(out) > 0) throw internal_check_failure("tilde H still contains a jet variable");
    return out;
}

// ---------------------------------------------------------------------------
// Determining system for Q = <d_s + eta^s d_u>: the commutation residuals of
// the eta-tuple and the invariance residuals against H-tilde. Residuals are
// reported even when nonzero; when the tuple is not involutive, the
// h-recursion is evaluated in the fixed canonical order and a note records
// that the tilde function is order-dependent.

struct DeterminingSystem {
    std::vector<Expr> involutivity_residuals;  // n(n+1)/2 entries, pairs s <= s'
    std::vector<Expr> invariance_residuals;    // n entries
    Expr tilde;                                // the H-tilde the residuals refer to
    bool involutive = false;
    bool is_reduction_module = false;
    std::vector<std::string> notes;
};

inline DeterminingSystem determining_system_evolution(const EvolutionEquation& e,
                                                      const std::vector<Expr>& eta,
                                                      const JetContext& ctx) {
    if (static_cast<int>(eta.size()) != e.spatial)
        throw error("InvalidArgument", "need one eta per spatial direction");
    for (const Expr& f : eta) detail::check_point_function(f, ctx, "eta");
    DeterminingSystem out;
    out.involutivity_residuals = involutivity_residuals(eta, ctx);
    out.involutive = true;
    for (const Expr& res : out.involutivity_residuals)
        if (!is_zero(res)) out.involutive = false;
    if (!out.involutive)
        out.notes.push_back("eta-tuple not involutive; tilde computed in canonical order");

    std::vector<VectorField> q = detail::spatial_point_fields(eta, ctx);
    std::map<Indet, Expr> bind;
    for (const MultiIndex& alpha : jet_dependence(e.H, ctx))
        if (alpha.order() > 0) bind.emplace(Indet::jet(alpha), detail::h_value(alpha, q, ctx));
    out.tilde = bind.empty() ? e.H : substitute(e.H, bind);

    bool inv_zero = true;
    for (int s = 1; s <= e.spatial; ++s) {
        Expr res = partial_derivative(eta[s - 1], Indet::coordinate(1)) +
                   out.tilde * partial_derivative(eta[s - 1], Indet::dependent()) -
                   partial_derivative(out.tilde, Indet::coordinate(s + 1)) -
                   eta[s - 1] * partial_derivative(out.tilde, Indet::dependent());
        if (!is_zero(res)) inv_zero = false;
        out.invariance_residuals.push_back(res);
    }
    out.is_reduction_module = out.involutive && inv_zero;
    return out;
}

// ---------------------------------------------------------------------------
// Phi-parameterized modules: eta^s = -Phi_s/Phi_u. The single normalized
// residual is Phi_t + Phi_u H^Phi; residuals depending on (t, Phi) alone are
// repairable by reparameterizing Phi.

struct PhiEvolutionReport {
    std::vector<Expr> eta;
    Expr H_phi;
    Expr residual;
    bool zero = false;
    bool chi_repairable = false;
    std::vector<Expr> chi_residuals;      // point-field actions on the residual
    std::vector<Expr> identity_checks;    // invariance residual + (1/Phi_u) Q_s(residual)
};

inline PhiEvolutionReport phi_residual_evolution(const EvolutionEquation& e, const Expr& phi,
                                                 const JetContext& ctx) {
    detail::check_point_function(phi, ctx, "Phi");
    Expr phi_u = partial_derivative(phi, Indet::dependent());
    if (is_zero(phi_u)) throw degenerate_invariant("Phi must depend on u");

    PhiEvolutionReport out;
    for (int s = 1; s <= e.spatial; ++s)
        out.eta.push_back(Expr(0) - partial_derivative(phi, Indet::coordinate(s + 1)) / phi_u);
    out.H_phi = tilde_H(e, out.eta, ctx);
    out.residual = partial_derivative(phi, Indet::coordinate(1)) + phi_u * out.H_phi;
    out.zero = is_zero(out.residual);

    std::vector<VectorField> q = detail::spatial_point_fields(out.eta, ctx);
    out.chi_repairable = true;
    for (int s = 1; s <= e.spatial; ++s) {
        Expr c = q[s - 1].apply(out.residual);
        if (!is_zero(c)) out.chi_repairable = false;
        out.chi_residuals.push_back(c);
    }

    // Invariance residuals and the residual derivative agree up to the 1/Phi_u
    // factor; this ties the two criteria together and guards both code paths.
    for (int s = 1; s <= e.spatial; ++s) {
        Expr res8 = partial_derivative(out.eta[s - 1], Indet::coordinate(1)) +
                    out.H_phi * partial_derivative(out.eta[s - 1], Indet::dependent()) -
                    partial_derivative(out.H_phi, Indet::coordinate(s + 1)) -
                    out.eta[s - 1] * partial_derivative(out.H_phi, Indet::dependent());
        Expr check = res8 + out.chi_residuals[s - 1] / phi_u;
        if (!is_zero(check))
            throw internal_check_failure("invariance residual does not match the Phi-residual derivative");
        out.identity_checks.push_back(check);
    }
    return out;
}

// ---------------------------------------------------------------------------
// The extended module Q-tilde = <d_t + H-tilde d_u, Q_1, ..., Q_n> and the
// three equivalent viewpoints on it: Q is a reduction module of u_t = H, the
// extension is involutive, and the full extension leaves nothing of L on its
// manifold. All three are computed independently and must agree.

struct TildeExtension {
    std::optional<VFModule> q_tilde;
    Expr tilde;
    bool reduction_module = false;
    bool tilde_involutive = false;
    bool full_ultra = false;
};

inline bool full_module_ultra(const Expr& L, const VFModule& m, const JetContext& ctx) {
    if (m.p() != m.n()) return false;
    if (!rank_condition(m) || !is_involutive(m)) return false;
    CanonicalModule cm = canonical_basis(m);
    RewriteSystem rs = build_rewrites(cm, std::max(order_of(L), 1), ctx);
    return is_zero(rs.reduce(L, ctx));
}

inline TildeExtension tilde_extension(const EvolutionEquation& e, const std::vector<Expr>& eta,
                                      const JetContext& ctx) {
    TildeExtension out;
    out.tilde = tilde_H(e, eta, ctx);  // throws NotInvolutive for non-involutive tuples

    std::vector<VectorField> fields = detail::spatial_point_fields(eta, ctx);
    VFModule q{fields};
    Expr L = evolution_lhs(e, ctx);
    out.reduction_module = conditional_invariance_check(L, q, ctx).is_reduction_module;

    std::vector<Expr> xi0(ctx.n(), Expr(0));
    xi0[0] = Expr(1);
    fields.insert(fields.begin(), VectorField{std::move(xi0), out.tilde});
    VFModule qt{fields};
    out.q_tilde = qt;
    out.tilde_involutive = is_involutive(qt);
    out.full_ultra = full_module_ultra(L, qt, ctx);

    if (out.reduction_module != out.tilde_involutive || out.tilde_involutive != out.full_ultra)
        throw internal_check_failure("the three equivalent reduction-module criteria disagree");
    return out;
}

// ---------------------------------------------------------------------------
// Co-order one for a general equation in hat-order-one reduced form: solve
// the family-reduced function for the last derivative, u_n = G^Phi(x, u).

struct Coorder1Report {
    std::vector<Expr> eta;
    Expr L_family;   // L with jets traded for the family values; affine in u_n
    Expr G;
    Expr residual;   // Phi_n + Phi_u G
    bool zero = false;
    bool chi_repairable = false;
    std::vector<Expr> chi_residuals;
};

inline Coorder1Report coorder1_G(const Expr& L, const Expr& phi, const JetContext& ctx) {
    int p = ctx.n() - 1;
    if (p < 1) throw error("InvalidArgument", "co-order-one analysis needs n >= 2");
    if (meta_singularity_coorder(L, p, ctx).k != 1)
        throw error("InvalidArgument", "L is not in the hat-order-one reduced form");

    VFModule fam = phi_family_member(phi, p, ctx);
    Coorder1Report out;
    for (const VectorField& v : fam.fields) out.eta.push_back(v.eta);
    out.L_family = family_reduced_function(L, fam.fields, p, ctx);

    MultiIndex dn = MultiIndex::unit(ctx.n(), ctx.n());
    for (const MultiIndex& alpha : jet_dependence(out.L_family, ctx))
        if (alpha.order() > 0 && alpha != dn)
            throw internal_check_failure("family-reduced function kept an unexpected jet variable");

    Indet un = Indet::jet(dn);
    Expr slope = partial_derivative(out.L_family, un);
    if (is_zero(slope))
        throw singular_phi("the family-reduced function does not involve u_n");
    if (slope.depends_on(un))
        throw not_solvable("the family-reduced function is not affine in u_n");
    Expr offset = out.L_family - slope * Expr(un);
    if (offset.depends_on(un))
        throw not_solvable("the family-reduced function is not affine in u_n");
    out.G = Expr(0) - offset / slope;
    if (!is_zero(substitute(out.L_family, {{un, out.G}})))
        throw internal_check_failure("G does not solve the family-reduced equation");

    Expr phi_u = partial_derivative(phi, Indet::dependent());
    out.residual = partial_derivative(phi, Indet::coordinate(ctx.n())) + phi_u * out.G;
    out.zero = is_zero(out.residual);
    out.chi_repairable = true;
    for (const VectorField& v : fam.fields) {
        Expr c = v.apply(out.residual);
        if (!is_zero(c)) out.chi_repairable = false;
        out.chi_residuals.push_back(c);
    }
    return out;
}

inline Coorder1Report coorder1_determining(const Expr& L, const Expr& phi, const JetContext& ctx) {
    return coorder1_G(L, phi, ctx);
}

}  // namespace redmod
