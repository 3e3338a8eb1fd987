#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "redmod/evolution.hpp"

namespace redmod {

// Quasi-linear second-order equations a^{ij} u_ij + lower order. Elliptic
// instances live on n coordinates with no distinguished slot; evolution and
// wave instances keep slot 1 as the time direction and index a over the
// spatial slots only.
enum class QLKind { elliptic, evolution, wave };

struct QuasiLinear2 {
    QLKind kind = QLKind::elliptic;
    std::vector<std::vector<Expr>> a;
    Expr b;
    // positive-definiteness witness: sample points where every leading
    // principal minor of a came out positive (elliptic only)
    std::vector<std::map<Indet, Rational>> pd_samples;
};

namespace detail {

inline std::optional<Rational> eval_expr(const Expr& e, const std::map<Indet, Rational>& point) {
    Rational den = e.den().eval(point);
    if (den == 0) return std::nullopt;
    return e.num().eval(point) / den;
}

// Deterministic sample values: positive for exponential atoms (their real
// range), signed otherwise.
inline Rational sample_value(std::uint64_t& state, bool positive) {
    const int span = 200;
    std::int64_t raw = static_cast<std::int64_t>(splitmix64(state) % (2 * span + 1)) - span;
    std::int64_t den = 1 + static_cast<std::int64_t>(splitmix64(state) % 7);
    if (positive && raw <= 0) raw = 1 - raw;
    return Rational(raw, den);
}

// Leading principal minors by plain elimination; pivots of a strictly
// positive definite matrix are all positive, so a zero pivot already decides
// the question and is reported as minor zero.
inline std::vector<Rational> leading_minors(std::vector<std::vector<Rational>> m) {
    std::size_t n = m.size();
    std::vector<Rational> out;
    Rational det = 1;
    for (std::size_t k = 0; k < n; ++k) {
        if (m[k][k] == 0) {
            out.push_back(0);
            return out;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            Rational f = m[i][k] / m[k][k];
            for (std::size_t j = k; j < n; ++j) m[i][j] -= f * m[k][j];
        }
        det *= m[k][k];
        out.push_back(det);
    }
    return out;
}

inline std::set<Indet> matrix_indets(const std::vector<std::vector<Expr>>& a) {
    std::set<Indet> vars;
    for (const auto& row : a)
        for (const Expr& e : row)
            for (const Indet& v : e.indets(false)) vars.insert(v);
    return vars;
}

// Minors of the matrix at the point; nullopt only for a denominator hit.
inline std::optional<std::vector<Rational>> minors_at(const std::vector<std::vector<Expr>>& a,
                                                      const std::map<Indet, Rational>& point) {
    std::size_t n = a.size();
    std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            std::optional<Rational> v = eval_expr(a[i][j], point);
            if (!v) return std::nullopt;
            m[i][j] = *v;
        }
    return leading_minors(std::move(m));
}

inline std::map<Indet, Rational> draw_point(const std::set<Indet>& vars, std::uint64_t& state) {
    std::map<Indet, Rational> point;
    for (const Indet& v : vars) point[v] = sample_value(state, v.kind() == Indet::Kind::exp_atom);
    return point;
}

}  // namespace detail

inline QuasiLinear2 make_quasilinear2(QLKind kind, std::vector<std::vector<Expr>> a, Expr b,
                                      const JetContext& ctx, int pd_points = 10) {
    std::size_t want = kind == QLKind::elliptic ? ctx.n() : ctx.n() - 1;
    if (a.size() != want) throw error("InvalidArgument", "coefficient matrix size does not match the context");
    for (const auto& row : a)
        if (row.size() != want) throw error("InvalidArgument", "coefficient matrix is not square");
    for (std::size_t i = 0; i < want; ++i)
        for (std::size_t j = i + 1; j < want; ++j)
            if (!is_zero(a[i][j] - a[j][i])) throw error("InvalidArgument", "coefficient matrix must be symmetric");
    for (const auto& row : a)
        for (const Expr& e : row)
            if (order_of(e) > 1) throw error("InvalidArgument", "coefficients may depend on first derivatives at most");
    if (order_of(b) > 1) throw error("InvalidArgument", "the zero-order part may depend on first derivatives at most");

    QuasiLinear2 out{kind, std::move(a), std::move(b), {}};
    if (kind == QLKind::elliptic) {
        std::set<Indet> vars = detail::matrix_indets(out.a);
        std::uint64_t state = zero_test_seed() ^ 0x9e11ca1u;
        int tries = 0;
        while (static_cast<int>(out.pd_samples.size()) < pd_points) {
            if (++tries > 40 * pd_points)
                throw positivity_certificate_missing("could not evaluate the coefficient matrix at enough sample points");
            std::map<Indet, Rational> point = detail::draw_point(vars, state);
            std::optional<std::vector<Rational>> minors = detail::minors_at(out.a, point);
            if (!minors) continue;
            for (const Rational& d : *minors)
                if (!(d > 0))
                    throw positivity_certificate_missing("coefficient matrix is not positive definite at a sample point");
            out.pd_samples.push_back(std::move(point));
        }
    }
    return out;
}

// The differential function of the equation. Elliptic: sum a^{ij} u_ij + b
// over all n slots. Evolution: u_t - (sum over spatial slots + b). Wave:
// u_tt - (sum + b).
inline Expr quasilinear_lhs(const QuasiLinear2& q, const JetContext& ctx) {
    int off = q.kind == QLKind::elliptic ? 0 : 1;
    Expr sum = q.b;
    int m = static_cast<int>(q.a.size());
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j)
            sum = sum + q.a[i - 1][j - 1] *
                            Expr(ctx.jet_var(MultiIndex::unit(ctx.n(), i + off).plus(j + off)));
    if (q.kind == QLKind::elliptic) return sum;
    MultiIndex dt = MultiIndex::unit(ctx.n(), 1);
    if (q.kind == QLKind::evolution) return Expr(ctx.jet_var(dt)) - sum;
    return Expr(ctx.jet_var(dt.plus(1))) - sum;
}

// ---------------------------------------------------------------------------
// Elliptic case: the reduced principal coefficients stay a positive quadratic
// form, so no module of dimension below n is singular.

struct EllipticReport {
    SingularityReport base;
    std::vector<std::vector<Expr>> a_hat;  // indexed by unchecked slots
};

inline EllipticReport elliptic_coorder(const QuasiLinear2& q, const VFModule& m,
                                       const JetContext& ctx) {
    if (q.kind != QLKind::elliptic) throw error("InvalidArgument", "elliptic analysis needs an elliptic instance");
    if (q.pd_samples.empty())
        throw positivity_certificate_missing("no positive-definiteness witness attached to the instance");
    Expr L = quasilinear_lhs(q, ctx);

    CanonicalModule cm = detail::checked_canonical(L, m);
    RewriteSystem rs = build_rewrites(cm, 2, ctx);

    EllipticReport rep;
    rep.base = weak_coorder(L, m, ctx);
    const std::vector<int>& hat = cm.unchecked;
    int h = static_cast<int>(hat.size());

    // a-hat from the associated function: it is linear in the second-order
    // hat jets, so the coefficients are plain partial derivatives.
    rep.a_hat.assign(h, std::vector<Expr>(h, Expr(0)));
    for (int i = 0; i < h; ++i)
        for (int j = i; j < h; ++j) {
            MultiIndex alpha = MultiIndex::unit(ctx.n(), hat[i]).plus(hat[j]);
            Expr c = partial_derivative(rep.base.associated, Indet::jet(alpha));
            if (i != j) c = c / Expr(2);
            rep.a_hat[i][j] = c;
            rep.a_hat[j][i] = c;
        }

    // Cross-check the diagonal against the quadratic form of the original
    // coefficients at z = (-xi-hat^{. iota} on the checked slots, 1 at iota).
    std::vector<std::vector<Expr>> a_red(ctx.n(), std::vector<Expr>(ctx.n()));
    for (int i = 0; i < ctx.n(); ++i)
        for (int j = 0; j < ctx.n(); ++j) a_red[i][j] = rs.reduce(q.a[i][j], ctx);
    for (int i = 0; i < h; ++i) {
        std::vector<Expr> z(ctx.n(), Expr(0));
        z[hat[i] - 1] = Expr(1);
        for (int s = 0; s < cm.p(); ++s) z[cm.checked[s] - 1] = Expr(0) - cm.xi_hat(s, hat[i]);
        Expr form;
        for (int r = 0; r < ctx.n(); ++r)
            for (int c = 0; c < ctx.n(); ++c) form = form + a_red[r][c] * z[r] * z[c];
        if (!is_zero(rep.a_hat[i][i] - form))
            throw internal_check_failure("reduced diagonal coefficient disagrees with the quadratic form");
    }

    // Numeric nonvanishing of the reduced diagonal: at every sampled base
    // point where the original matrix is positive definite, the reduced
    // diagonal is the value of that form at a nonzero vector, so it must come
    // out strictly positive.
    std::uint64_t state = zero_test_seed() ^ 0xe111d1a6u;
    for (int i = 0; i < h; ++i) {
        std::set<Indet> vars = detail::matrix_indets(q.a);
        for (const Indet& v : rep.a_hat[i][i].indets(false)) vars.insert(v);
        int confirmed = 0, tries = 0;
        while (confirmed < static_cast<int>(q.pd_samples.size())) {
            if (++tries > 400)
                throw positivity_certificate_missing("could not confirm the reduced diagonal at sample points");
            std::map<Indet, Rational> point = detail::draw_point(vars, state);
            std::optional<std::vector<Rational>> minors = detail::minors_at(q.a, point);
            if (!minors) continue;
            bool pd_here = true;
            for (const Rational& d : *minors)
                if (!(d > 0)) pd_here = false;
            if (!pd_here) continue;
            std::optional<Rational> v = detail::eval_expr(rep.a_hat[i][i], point);
            if (!v) continue;  // the eliminated-direction data has a pole here
            if (!(*v > 0))
                throw internal_check_failure("positive quadratic form evaluated non-positive");
            ++confirmed;
        }
    }

    if (rep.base.strong_coorder != 2)
        throw internal_check_failure("an elliptic instance produced a singular module");
    return rep;
}

// ---------------------------------------------------------------------------
// Wave case, basis Q^s = d_s + tau^s d_t + eta^s d_u: the module is singular
// only when the reduced coefficients satisfy a-hat^{ij} tau^i tau^j = 1. When
// the reduced coefficients keep u_t, the condition splits by its powers.

inline std::vector<Expr> wave_singularity_condition(const QuasiLinear2& q,
                                                    const std::vector<Expr>& tau,
                                                    const std::vector<Expr>& eta,
                                                    const JetContext& ctx) {
    if (q.kind != QLKind::wave) throw error("InvalidArgument", "wave analysis needs a wave instance");
    int n = ctx.n() - 1;
    if (static_cast<int>(tau.size()) != n || static_cast<int>(eta.size()) != n)
        throw error("InvalidArgument", "need one tau and one eta per spatial direction");
    for (const Expr& e : tau) detail::check_point_function(e, ctx, "tau");
    for (const Expr& e : eta) detail::check_point_function(e, ctx, "eta");

    Indet ut = Indet::jet(MultiIndex::unit(ctx.n(), 1));
    std::map<Indet, Expr> bind;
    for (int s = 1; s <= n; ++s)
        bind.emplace(Indet::jet(MultiIndex::unit(ctx.n(), s + 1)), eta[s - 1] - tau[s - 1] * Expr(ut));

    Expr res = Expr(0) - Expr(1);
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            res = res + substitute(q.a[i - 1][j - 1], bind) * tau[i - 1] * tau[j - 1];

    if (!res.depends_on(ut)) return {res};
    auto with_ut = [&](const Indet& v) {
        if (v == ut) return true;
        return v.kind() == Indet::Kind::exp_atom && Expr::wrap(v.exp_arg()).depends_on(ut);
    };
    return detail::split_by_indets(res, with_ut, "u_t");
}

// ---------------------------------------------------------------------------
// The module annihilating both invariants of a pair (Phi^1, Phi^2).

inline VFModule phi_pair_module(const Expr& phi1, const Expr& phi2, const JetContext& ctx) {
    detail::check_point_function(phi1, ctx, "Phi^1");
    detail::check_point_function(phi2, ctx, "Phi^2");
    Indet u = Indet::dependent();
    Indet t = Indet::coordinate(1);
    Expr jac = partial_derivative(phi1, t) * partial_derivative(phi2, u) -
               partial_derivative(phi2, t) * partial_derivative(phi1, u);
    if (is_zero(jac)) throw degenerate_jacobian("the pair is degenerate along (t, u)");

    std::vector<VectorField> fields;
    for (int s = 2; s <= ctx.n(); ++s) {
        Indet xs = Indet::coordinate(s);
        Expr tau = (Expr(0) - (partial_derivative(phi1, xs) * partial_derivative(phi2, u) -
                               partial_derivative(phi2, xs) * partial_derivative(phi1, u))) /
                   jac;
        Expr eta = (partial_derivative(phi1, xs) * partial_derivative(phi2, t) -
                    partial_derivative(phi2, xs) * partial_derivative(phi1, t)) /
                   jac;
        std::vector<Expr> xi(ctx.n(), Expr(0));
        xi[0] = tau;
        xi[s - 1] = Expr(1);
        VectorField f{std::move(xi), eta};
        for (const Expr& phi : {phi1, phi2})
            if (!is_zero(f.apply(phi)))
                throw internal_check_failure("pair module field does not annihilate an invariant");
        fields.push_back(std::move(f));
    }
    VFModule out{fields};
    if (!is_involutive(out)) throw internal_check_failure("pair module came out non-involutive");
    return out;
}

// ---------------------------------------------------------------------------
// Characteristic surfaces: (Psi_t)^2 = a^{ij} Psi_i Psi_j, and the flat
// module M^Psi they span.

inline Expr eiconal_residual(const QuasiLinear2& q, const Expr& psi, const JetContext& ctx) {
    if (q.kind != QLKind::wave) throw error("InvalidArgument", "the characteristic equation belongs to the wave case");
    for (const auto& row : q.a)
        for (const Expr& e : row)
            if (!jet_dependence(e, ctx).empty())
                throw error("InvalidArgument", "coefficients must be functions of (t, x) here");
    if (!jet_dependence(psi, ctx).empty())
        throw error("InvalidArgument", "Psi must be a function of (t, x)");
    Expr res = partial_derivative(psi, Indet::coordinate(1)) *
               partial_derivative(psi, Indet::coordinate(1));
    int n = ctx.n() - 1;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            res = res - q.a[i - 1][j - 1] * partial_derivative(psi, Indet::coordinate(i + 1)) *
                            partial_derivative(psi, Indet::coordinate(j + 1));
    return res;
}

inline VFModule meta_module_from_eiconal(const QuasiLinear2& q, const Expr& psi,
                                         const JetContext& ctx) {
    Expr psi_t = partial_derivative(psi, Indet::coordinate(1));
    if (is_zero(psi_t)) throw degenerate_invariant("Psi must move with t");
    if (!is_zero(eiconal_residual(q, psi, ctx)))
        throw eiconal_violated("Psi does not satisfy the characteristic equation");
    std::vector<VectorField> fields;
    for (int s = 2; s <= ctx.n(); ++s) {
        std::vector<Expr> xi(ctx.n(), Expr(0));
        xi[0] = Expr(0) - partial_derivative(psi, Indet::coordinate(s));
        xi[s - 1] = psi_t;
        fields.push_back(VectorField{std::move(xi), Expr(0)});
    }
    std::vector<Expr> xi(ctx.n(), Expr(0));
    fields.push_back(VectorField{std::move(xi), Expr(1)});
    return VFModule{fields};
}

}  // namespace redmod
