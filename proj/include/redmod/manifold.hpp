#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "redmod/vfmod.hpp"

namespace redmod {

// Rewrite system realizing the manifold cut out by the canonical module: one
// rule u_alpha -> E_alpha for every multi-index of order <= r whose weight on
// the checked slots is positive. Right-hand sides involve only x, u, and
// non-checked jet variables.
class RewriteSystem {
public:
    RewriteSystem(int n, std::vector<int> checked, int r)
        : n_(n), checked_(std::move(checked)), r_(r) {}

    int n() const { return n_; }
    int r() const { return r_; }
    const std::vector<int>& checked() const { return checked_; }
    const std::map<MultiIndex, Expr>& rules() const { return rules_; }

    bool is_checked_var(const MultiIndex& alpha) const { return alpha.weight_on(checked_) > 0; }
    const Expr& rule(const MultiIndex& alpha) const {
        auto it = rules_.find(alpha);
        if (it == rules_.end())
            throw error("MissingRule", "no rewrite rule for u_" + alpha.to_string());
        return it->second;
    }
    void add_rule(const MultiIndex& alpha, Expr rhs) { rules_.emplace(alpha, std::move(rhs)); }

    // Substitute every checked jet variable occurring in e (including inside
    // exponential arguments) by its rule.
    Expr reduce(const Expr& e, const JetContext& ctx) const {
        std::map<Indet, Expr> bind;
        for (const MultiIndex& alpha : jet_dependence(e, ctx))
            if (alpha.order() > 0 && is_checked_var(alpha)) bind.emplace(Indet::jet(alpha), rule(alpha));
        if (bind.empty()) return e;
        return substitute(e, bind);
    }

private:
    int n_;
    std::vector<int> checked_;
    int r_;
    std::map<MultiIndex, Expr> rules_;
};

// Which checked direction to differentiate when deriving a higher rule. Both
// choices must agree on involutive modules; keeping the knob lets tests state
// that as a theorem instead of an accident of iteration order.
enum class ElimOrder { smallest_slot, largest_slot };

namespace detail {

inline void enumerate_indices(int n, int r, MultiIndex& cur, int slot, std::vector<MultiIndex>& out) {
    if (slot > n) {
        out.push_back(cur);
        return;
    }
    int used = cur.order();  // slot's own entry is zero on entry
    for (int k = 0; used + k <= r; ++k) {
        cur.e[slot - 1] = k;
        enumerate_indices(n, r, cur, slot + 1, out);
    }
    cur.e[slot - 1] = 0;
}

inline std::vector<MultiIndex> all_indices(int n, int r) {
    std::vector<MultiIndex> out;
    MultiIndex cur = MultiIndex::zero(n);
    enumerate_indices(n, r, cur, 1, out);
    return out;
}

}  // namespace detail

inline RewriteSystem build_rewrites(const CanonicalModule& cm, int r, const JetContext& ctx,
                                    ElimOrder order = ElimOrder::smallest_slot) {
    if (r > k_max_jet_order) throw resource_limit("rewrite order exceeds the jet order cap");
    RewriteSystem rs(cm.n, cm.checked, r);

    // First-order rules u_{c_s} = eta-hat^s - xi-hat^{s iota} u_iota.
    for (int s = 0; s < cm.p(); ++s) {
        Expr rhs = cm.eta_hat(s);
        for (int iota : cm.unchecked)
            rhs = rhs - cm.xi_hat(s, iota) * Expr(ctx.jet_var(MultiIndex::unit(cm.n, iota)));
        rs.add_rule(MultiIndex::unit(cm.n, cm.checked[s]), std::move(rhs));
    }

    std::vector<MultiIndex> todo = detail::all_indices(cm.n, r);
    std::sort(todo.begin(), todo.end(), [&](const MultiIndex& a, const MultiIndex& b) {
        if (a.order() != b.order()) return a.order() < b.order();
        int wa = a.weight_on(cm.checked), wb = b.weight_on(cm.checked);
        if (wa != wb) return wa < wb;
        return compare(a, b) < 0;
    });

    for (const MultiIndex& alpha : todo) {
        int w = alpha.weight_on(cm.checked);
        if (w == 0 || rs.rules().count(alpha)) continue;
        if (w == 1) {
            // Differentiate an existing weight-one rule along a hat direction;
            // the result involves no checked jets by construction.
            int iota = 0;
            for (int c : cm.unchecked)
                if (alpha.at(c) > 0) {
                    iota = c;
                    break;
                }
            rs.add_rule(alpha, total_derivative(rs.rule(alpha.minus(iota)), iota, ctx));
        } else {
            int c = 0;
            if (order == ElimOrder::smallest_slot) {
                for (int s : cm.checked)
                    if (alpha.at(s) > 0) {
                        c = s;
                        break;
                    }
            } else {
                for (auto it = cm.checked.rbegin(); it != cm.checked.rend(); ++it)
                    if (alpha.at(*it) > 0) {
                        c = *it;
                        break;
                    }
            }
            Expr d = total_derivative(rs.rule(alpha.minus(c)), c, ctx);
            rs.add_rule(alpha, rs.reduce(d, ctx));
        }
        if (order_on(rs.rule(alpha), cm.checked) > 0)
            throw internal_check_failure("rewrite rule still involves a checked jet variable");
    }
    return rs;
}

// Restriction of L to the manifold of the rewrite system.
inline Expr associated_function(const Expr& L, const RewriteSystem& rs, const JetContext& ctx) {
    if (order_of(L) > rs.r())
        throw error("InvalidArgument", "rewrite system order is below the order of L");
    return rs.reduce(L, ctx);
}

struct SingularityReport {
    int r = 0;                  // order of L
    int strong_coorder = 0;     // -1 ultra, r regular
    bool ultra = false;
    Expr associated;            // L-hat
    std::optional<int> weak_coorder;
    std::optional<Expr> multiplier;
    std::optional<Expr> core;
    bool weak_exact = false;    // maximal-rank certificate found
    std::vector<int> checked;   // slots eliminated by the canonical basis
};

namespace detail {

// "f is a multiple of g" in the structural sense used by the maximal-rank
// shortcut: the numerator of g exactly divides the numerator of f.
inline bool poly_multiple(const Expr& f, const Expr& g) {
    if (f.canonical_zero()) return true;
    return f.num().divide_exact(g.num()).has_value();
}

inline CanonicalModule checked_canonical(const Expr& L, const VFModule& m) {
    if (L.canonical_zero()) throw error("InvalidArgument", "L normalizes to zero");
    if (m.p() >= m.n())
        throw error("InvalidArgument", "co-order analysis needs dim M < n; use the n-dimensional reduction path");
    if (!rank_condition(m)) throw rank_deficient("module coefficient matrix has rank below p");
    if (!is_involutive(m)) throw not_involutive("module basis is not closed under the Lie bracket");
    return canonical_basis(m);
}

}  // namespace detail

// Strong singularity co-order of the module M for L: the order of the
// associated differential function, with -1 for ultra-singular and r meaning
// regular.
inline SingularityReport strong_coorder(const Expr& L, const VFModule& m, const JetContext& ctx) {
    CanonicalModule cm = detail::checked_canonical(L, m);
    SingularityReport rep;
    rep.r = order_of(L);
    rep.checked = cm.checked;
    RewriteSystem rs = build_rewrites(cm, rep.r, ctx);
    rep.associated = associated_function(L, rs, ctx);
    rep.strong_coorder = order_of(rep.associated);
    rep.ultra = rep.strong_coorder < 0;
    return rep;
}

// Weak co-order: order of the associated function after the structurally
// nonvanishing multiplier is split off, together with a maximal-rank
// certificate (some top-order partial of the core is not a multiple of the
// core; then the reported value is exact rather than an upper bound).
inline SingularityReport weak_coorder(const Expr& L, const VFModule& m, const JetContext& ctx) {
    SingularityReport rep = strong_coorder(L, m, ctx);
    auto [mult, core] = factor_nonvanishing(rep.associated);
    rep.multiplier = mult;
    rep.core = core;
    rep.weak_coorder = order_of(core);
    rep.weak_exact = false;
    if (*rep.weak_coorder >= 1) {
        for (const MultiIndex& alpha : jet_dependence(core, ctx)) {
            if (alpha.order() != *rep.weak_coorder) continue;
            Expr d = partial_derivative(core, Indet::jet(alpha));
            if (!detail::poly_multiple(d, core)) {
                rep.weak_exact = true;
                break;
            }
        }
    } else if (*rep.weak_coorder <= 0) {
        rep.weak_exact = true;  // order 0 or ultra cannot drop further
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Meta-singularity: every L of hat-order k is a function of x and the jets of
// hat-order <= k once the checked derivatives are traded for module
// directions. For the involutive variant the reduced coordinates are the jets
// themselves; the p = 1 special variant runs through a triangular change of
// jet coordinates built from the operator D_1 + u D_2 + xi^3 D_3 + ...

struct MetaSingularityReport {
    int k = -1;
    bool special_variant = false;
    Expr reduced;                      // L in reduced coordinates
    std::vector<MultiIndex> carriers;  // jets realizing the hat-order
};

inline MetaSingularityReport meta_singularity_coorder(const Expr& L, int p, const JetContext& ctx) {
    if (p < 1 || p >= ctx.n())
        throw error("InvalidArgument", "the module dimension p must satisfy 1 <= p < n");
    if (order_of(L) < 0) throw error("InvalidArgument", "L normalizes to zero");
    MetaSingularityReport rep;
    rep.k = hat_order(L, p, ctx);
    rep.reduced = L;
    for (const MultiIndex& alpha : jet_dependence(L, ctx)) {
        std::vector<int> hat;
        for (int s = p + 1; s <= ctx.n(); ++s) hat.push_back(s);
        if (alpha.weight_on(hat) == rep.k) rep.carriers.push_back(alpha);
    }
    return rep;
}

inline MetaSingularityReport meta_singularity_coorder_special(const Expr& L,
                                                              const std::vector<Expr>& xi_tail,
                                                              const JetContext& ctx) {
    if (ctx.n() < 2) throw error("InvalidArgument", "the special variant needs n >= 2");
    int r = order_of(L);
    if (r < 0) throw error("InvalidArgument", "L normalizes to zero");

    // omega_alpha = D_2^{a2} ... D_n^{an} K^{a1} u with K = D_1 + u D_2 + xi^nu D_nu.
    auto K = [&](const Expr& f) {
        Expr acc = total_derivative(f, 1, ctx) + ctx.dependent() * total_derivative(f, 2, ctx);
        for (int s = 3; s <= ctx.n(); ++s) acc = acc + xi_tail[s - 3] * total_derivative(f, s, ctx);
        return acc;
    };

    std::vector<MultiIndex> idx = detail::all_indices(ctx.n(), r);
    std::sort(idx.begin(), idx.end(), [](const MultiIndex& a, const MultiIndex& b) { return a < b; });

    // omega in terms of the original jets, sharing K-power prefixes.
    std::map<int, Expr> k_pow;
    k_pow[0] = ctx.dependent();
    for (int a1 = 1; a1 <= r; ++a1) k_pow[a1] = K(k_pow[a1 - 1]);

    std::map<MultiIndex, Expr> omega;
    for (const MultiIndex& alpha : idx) {
        Expr w = k_pow[alpha.at(1)];
        for (int s = 2; s <= ctx.n(); ++s)
            for (int k = 0; k < alpha.at(s); ++k) w = total_derivative(w, s, ctx);
        omega.emplace(alpha, std::move(w));
    }

    // Invert the triangular system: u_alpha = W_alpha - psi_alpha(rho_beta).
    std::map<Indet, Expr> rho;  // original jet -> expression in the new coordinates
    for (const MultiIndex& alpha : idx) {
        if (alpha.order() == 0) continue;
        Expr psi = omega.at(alpha) - Expr(ctx.jet_var(alpha));
        for (const MultiIndex& beta : jet_dependence(psi, ctx))
            if (!(compare(beta, alpha) < 0))
                throw change_of_jet_coordinates_failed("omega_" + alpha.to_string() +
                                                       " is not triangular at " + beta.to_string());
        Expr diag = partial_derivative(omega.at(alpha), Indet::jet(alpha));
        if (!(diag == Expr(1)))
            throw change_of_jet_coordinates_failed("omega_" + alpha.to_string() + " has a non-unit diagonal");
        rho.emplace(Indet::jet(alpha), Expr(ctx.jet_var(alpha)) - substitute(psi, rho));
    }

    MetaSingularityReport rep;
    rep.special_variant = true;
    rep.reduced = substitute(L, rho);
    rep.k = hat_order(rep.reduced, 1, ctx);

    // Round-trip: substituting omega back must recover L exactly.
    std::map<Indet, Expr> fwd;
    for (auto& [alpha, w] : omega)
        if (alpha.order() > 0) fwd.emplace(Indet::jet(alpha), w);
    if (!is_zero(substitute(rep.reduced, fwd) - L))
        throw internal_check_failure("jet coordinate change does not round-trip");

    for (const MultiIndex& alpha : jet_dependence(rep.reduced, ctx)) {
        std::vector<int> hat;
        for (int s = 2; s <= ctx.n(); ++s) hat.push_back(s);
        if (alpha.weight_on(hat) == rep.k) rep.carriers.push_back(alpha);
    }
    return rep;
}

// L in reduced coordinates evaluated on a family member: each jet u_alpha
// (standing for omega_alpha) becomes D-hat^{alpha-hat} applied to the point
// fields' action on u. Involutive variant: fields Q_s = d_s + eta^s d_u from
// Phi; special variant: the single field d_1 + u d_2 + xi^nu d_nu + theta d_u.
inline Expr family_reduced_function(const Expr& L_reduced, const std::vector<VectorField>& fields,
                                    int p, const JetContext& ctx) {
    if (static_cast<int>(fields.size()) != p)
        throw error("InvalidArgument", "need one field per checked slot");
    std::map<Indet, Expr> bind;
    for (const MultiIndex& alpha : jet_dependence(L_reduced, ctx)) {
        if (alpha.order() == 0) continue;
        Expr g = ctx.dependent();
        for (int s = p; s >= 1; --s)
            for (int k = 0; k < alpha.at(s); ++k) g = fields[s - 1].apply(g);
        for (int s = p + 1; s <= ctx.n(); ++s)
            for (int k = 0; k < alpha.at(s); ++k) g = total_derivative(g, s, ctx);
        bind.emplace(Indet::jet(alpha), std::move(g));
    }
    return substitute(L_reduced, bind);
}

}  // namespace redmod
