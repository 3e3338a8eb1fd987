#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "redmod/manifold.hpp"

namespace redmod {

enum class Verdict { holds, fails, unknown };

struct ReductionVerdict {
    Verdict verdict = Verdict::unknown;
    bool is_reduction_module = false;
    std::vector<Expr> restricted_residuals;  // one per basis element
    std::string leading_solve;               // how the equation itself was used
    std::vector<std::string> notes;
};

namespace detail {

// Restriction of expressions to the zero set of lhat. Affine solve in the
// top-order variable when possible; exact numerator division as the fallback
// certificate; nullopt when neither route decides.
struct EquationRestrictor {
    bool ultra = false;
    std::optional<Indet> var;
    Expr value;  // var = value on the zero set
    Expr core;
    std::string description;

    std::optional<Expr> restrict_expr(const Expr& res) const {
        if (ultra) return res;
        if (res.canonical_zero()) return res;
        if (var) {
            try {
                return substitute(res, {{*var, value}});
            } catch (const singular_substitution&) {
                // fall through to the division certificate
            }
        }
        if (res.num().divide_exact(core.num())) return Expr(0);
        if (is_zero(res)) return Expr(0);
        return std::nullopt;
    }
};

inline EquationRestrictor make_restrictor(const Expr& lhat, const JetContext& ctx) {
    EquationRestrictor er;
    er.core = lhat;
    if (is_zero(lhat)) {
        er.ultra = true;
        er.description = "no constraint: the associated function vanishes identically";
        return er;
    }
    int top = order_of(lhat);
    std::vector<MultiIndex> cand;
    for (const MultiIndex& alpha : jet_dependence(lhat, ctx))
        if (alpha.order() == top) cand.push_back(alpha);
    std::sort(cand.begin(), cand.end(), [](const MultiIndex& a, const MultiIndex& b) { return b < a; });
    for (const MultiIndex& alpha : cand) {
        Indet v = alpha.order() == 0 ? Indet::dependent() : Indet::jet(alpha);
        Expr slope = partial_derivative(lhat, v);
        if (slope.canonical_zero()) continue;
        Expr offset = lhat - slope * Expr(v);
        if (offset.depends_on(v) || slope.depends_on(v)) continue;  // not affine in v
        er.var = v;
        er.value = Expr(0) - offset / slope;
        er.description = "affine solve for " +
                         (alpha.order() == 0 ? std::string("u") : "u" + alpha.to_string()) +
                         " in the associated function";
        return er;
    }
    er.core = factor_nonvanishing(lhat).second;
    er.description = "exact division by the associated function";
    return er;
}

inline CanonicalModule reduction_canonical(const Expr& L, const VFModule& m) {
    if (L.canonical_zero()) throw error("InvalidArgument", "L normalizes to zero");
    if (!rank_condition(m)) throw rank_deficient("module coefficient matrix has rank below p");
    if (!is_involutive(m)) throw not_involutive("module basis is not closed under the Lie bracket");
    return canonical_basis(m);
}

// Split e = num/den into the coefficient expressions of the power products of
// the indeterminates selected by pred. Sound because distinct power products
// of coordinates and exponential atoms are linearly independent over the
// remaining variables. The denominator must not involve selected variables.
template <class Pred>
std::vector<Expr> split_by_indets(const Expr& e, Pred pred, const char* what) {
    for (const Indet& v : e.den().vars())
        if (pred(v)) throw error("NotSolvable", std::string("cannot split: denominator depends on ") + what);
    std::map<Monomial, Poly> groups;
    for (const auto& t : e.num().terms()) {
        std::vector<Monomial::Factor> key, rest;
        for (const auto& f : t.mono.factors()) (pred(f.first) ? key : rest).push_back(f);
        Monomial key_m(std::move(key));
        groups[key_m] = groups[key_m] + Poly::constant(t.coeff).term_times(Monomial(std::move(rest)), 1);
    }
    std::vector<Expr> out;
    for (auto& [key_m, p] : groups) out.push_back(Expr::from_ratio(p, e.den()));
    return out;
}

}  // namespace detail

// Conditional invariance criterion: every prolonged basis field annihilates L
// on the intersection of {L = 0} with the module manifold.
inline ReductionVerdict conditional_invariance_check(const Expr& L, const VFModule& m,
                                                     const JetContext& ctx) {
    CanonicalModule cm = detail::reduction_canonical(L, m);
    int r = order_of(L);
    RewriteSystem rs = build_rewrites(cm, r, ctx);
    Expr lhat = rs.reduce(L, ctx);
    detail::EquationRestrictor er = detail::make_restrictor(lhat, ctx);

    ReductionVerdict out;
    out.leading_solve = er.description;
    bool all_zero = true;
    bool undecided = false;
    for (const VectorField& v : m.fields) {
        Expr res = rs.reduce(prolonged_apply(v, L, ctx), ctx);
        std::optional<Expr> restricted = er.restrict_expr(res);
        if (!restricted) {
            undecided = true;
            out.notes.push_back("LeadingSolveFailed: residual not decided by affine solve or exact division");
            out.restricted_residuals.push_back(res);
            continue;
        }
        if (!is_zero(*restricted)) all_zero = false;
        out.restricted_residuals.push_back(*restricted);
    }
    if (undecided && all_zero) {
        out.verdict = Verdict::unknown;
        out.is_reduction_module = false;
    } else if (all_zero) {
        out.verdict = Verdict::holds;
        out.is_reduction_module = true;
    } else {
        out.verdict = Verdict::fails;
        out.is_reduction_module = false;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reduction at shift modules <d_1, ..., d_p> (any slot set): the reduced
// equation is L with every checked derivative zeroed; remaining jets read as
// derivatives of the invariant function. When explicit checked coordinates
// survive, the equation splits into a system by linear independence of the
// power products of those coordinates (exponential atoms whose argument moves
// with a checked coordinate count as part of the power product).

struct ShiftReduction {
    Expr reduced;               // single reduced equation (sum of the system when split)
    std::vector<Expr> system;   // coefficient equations after splitting
    bool split = false;
    int reduced_order = 0;      // -1 when the reduction is the zero identity
};

inline ShiftReduction reduce_shift_module(const Expr& L, const std::vector<int>& checked,
                                          const JetContext& ctx) {
    if (checked.empty() || static_cast<int>(checked.size()) > ctx.n())
        throw error("InvalidArgument", "checked slot list must name between 1 and n slots");
    std::vector<VectorField> shifts;
    for (int s : checked) {
        std::vector<Expr> xi(ctx.n(), Expr(0));
        xi[s - 1] = Expr(1);
        shifts.push_back(VectorField{std::move(xi), Expr(0)});
    }
    VFModule m{shifts};
    ReductionVerdict v = conditional_invariance_check(L, m, ctx);
    if (v.verdict != Verdict::holds)
        throw not_reduction_module("the shift module does not satisfy the conditional invariance criterion");

    std::map<Indet, Expr> bind;
    for (const MultiIndex& alpha : jet_dependence(L, ctx))
        if (alpha.weight_on(checked) > 0) bind.emplace(Indet::jet(alpha), Expr(0));
    ShiftReduction out;
    out.reduced = bind.empty() ? L : substitute(L, bind);
    out.reduced_order = order_of(out.reduced);

    bool explicit_x = false;
    for (int s : checked)
        if (out.reduced.depends_on(Indet::coordinate(s))) explicit_x = true;
    if (!explicit_x) {
        out.system = {out.reduced};
        return out;
    }

    // Split. Group numerator terms by the sub-monomial in checked coordinates
    // and checked-coordinate-bearing exponential atoms; the denominator must
    // not involve the checked coordinates.
    auto moves_with_checked = [&](const Indet& v) {
        if (v.kind() == Indet::Kind::coordinate)
            return std::find(checked.begin(), checked.end(), v.coord_slot()) != checked.end();
        if (v.kind() == Indet::Kind::exp_atom)
            for (int s : checked)
                if (Expr::wrap(v.exp_arg()).depends_on(Indet::coordinate(s))) return true;
        return false;
    };
    out.split = true;
    out.system = detail::split_by_indets(out.reduced, moves_with_checked, "a checked coordinate");
    return out;
}

// Substitute the complete jet of a u-free expression into L.
inline bool is_solution(const Expr& L, const Expr& f, const JetContext& ctx) {
    if (!jet_dependence(f, ctx).empty())
        throw error("InvalidArgument", "candidate solution must be a function of x (and parameters) only");
    std::map<Indet, Expr> bind;
    for (const MultiIndex& alpha : jet_dependence(L, ctx)) {
        Expr g = f;
        for (int s = 1; s <= ctx.n(); ++s)
            for (int k = 0; k < alpha.at(s); ++k) g = total_derivative(g, s, ctx);
        bind.emplace(alpha.order() == 0 ? Indet::dependent() : Indet::jet(alpha), std::move(g));
    }
    if (bind.empty()) return is_zero(L);
    return is_zero(substitute(L, bind));
}

// ---------------------------------------------------------------------------
// n-dimensional reduction: all directions checked, the module manifold
// projects onto graphs u = f(x) with Phi(x, f(x)) constant, and L collapses
// to a function of (x, u).

struct AlgebraicReduction {
    Expr phi;
    Expr L_phi;                           // L with every derivative rewritten to h^alpha(x,u)
    Expr multiplier;                      // factor in L_phi = multiplier * (zeta o Phi)
    std::vector<Expr> separation_residuals;
    bool separable = false;
    bool ultra = false;
    std::optional<Expr> zeta;
    std::string note;
    std::optional<VFModule> module;
};

inline AlgebraicReduction ndim_reduce(const Expr& L, const Expr& phi, const JetContext& ctx,
                                      std::optional<std::pair<Expr, Expr>> inverse = std::nullopt) {
    VFModule family = phi_family_member(phi, ctx.n(), ctx);
    const std::vector<VectorField>& fields = family.fields;
    AlgebraicReduction out;
    out.phi = phi;
    out.module = family;
    out.multiplier = Expr(1);

    CanonicalModule cm = canonical_basis(family);
    RewriteSystem rs = build_rewrites(cm, std::max(order_of(L), 1), ctx);
    out.L_phi = rs.reduce(L, ctx);
    if (order_of(out.L_phi) > 0) throw internal_check_failure("n-dimensional rewrite left a jet variable");

    if (is_zero(out.L_phi)) {
        out.ultra = true;
        out.separable = true;
        out.zeta = Expr(0);
        out.note = "ultra-singular: L vanishes on the module manifold";
        for (std::size_t s = 0; s < fields.size(); ++s) out.separation_residuals.push_back(Expr(0));
        return out;
    }

    Expr target = out.L_phi;
    bool direct = true;
    for (const VectorField& q : fields) out.separation_residuals.push_back(q.apply(target));
    auto all_zero = [](const std::vector<Expr>& v) {
        for (const Expr& e : v)
            if (!is_zero(e)) return false;
        return true;
    };
    if (!all_zero(out.separation_residuals)) {
        auto [mult, core] = factor_nonvanishing(out.L_phi);
        std::vector<Expr> res2;
        for (const VectorField& q : fields) res2.push_back(q.apply(core));
        if (all_zero(res2)) {
            direct = false;
            target = core;
            out.multiplier = mult;
            out.separation_residuals = std::move(res2);
            out.note = "separable after splitting off a nonvanishing factor";
        } else {
            out.note = "NotSeparable";
            return out;
        }
    }
    out.separable = true;

    if (inverse) {
        const auto& [psi, kappa] = *inverse;
        std::set<Indet> kv = kappa.num().vars();
        if (kv.size() != 1 || kv.begin()->kind() != Indet::Kind::symbol || !(Expr(*kv.begin()) == kappa))
            throw error("InvalidArgument", "the family parameter must be a bare declared symbol");
        Indet kvar = *kv.begin();
        if (!is_zero(substitute(phi, {{Indet::dependent(), psi}}) - kappa))
            throw missing_inverse("supplied inverse does not satisfy Phi(x, psi(x, kappa)) = kappa");
        Expr z = substitute(target, {{Indet::dependent(), psi}});
        bool x_free = true;
        for (int s = 1; s <= ctx.n(); ++s)
            if (z.depends_on(Indet::coordinate(s))) x_free = false;
        if (x_free) {
            out.zeta = z;
            // cross-check the separation identity L_phi = multiplier * zeta(Phi)
            Expr back = substitute(z, {{kvar, phi}});
            if (!is_zero(out.L_phi - out.multiplier * back))
                throw internal_check_failure("separation identity failed to verify");
        } else {
            out.note = direct ? "NotSeparable: recovered zeta still depends on x"
                              : out.note + "; zeta recovery failed";
        }
    }
    return out;
}

// Converse direction: a one-parameter solution family u = f(x, kappa),
// inverted as kappa = Phi(x, u), must yield an n-dimensional ultra-singular
// reduction module.
struct FamilyUltraResult {
    VFModule module;
    bool ultra = false;
    AlgebraicReduction reduction;
};

inline FamilyUltraResult ultra_module_from_family(const Expr& L, const Expr& phi,
                                                  const JetContext& ctx) {
    FamilyUltraResult out{VFModule{phi_family_member(phi, ctx.n(), ctx)}, false,
                          ndim_reduce(L, phi, ctx)};
    out.ultra = out.reduction.ultra;
    return out;
}

}  // namespace redmod
