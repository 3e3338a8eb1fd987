#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "redmod/jet.hpp"

namespace redmod {

// First-order operator xi^i d_i + eta d_u with coefficients in (x, u).
struct VectorField {
    std::vector<Expr> xi;  // one entry per coordinate slot
    Expr eta;

    VectorField(std::vector<Expr> xi_, Expr eta_) : xi(std::move(xi_)), eta(std::move(eta_)) {
        for (auto& c : xi)
            if (order_of(c) > 0) throw error("InvalidVectorField", "xi depends on jet variables");
        if (order_of(eta) > 0) throw error("InvalidVectorField", "eta depends on jet variables");
    }

    int n() const { return static_cast<int>(xi.size()); }

    // Action on functions of (x, u).
    Expr apply(const Expr& f) const {
        Expr acc = eta * partial_derivative(f, Indet::dependent());
        for (int i = 1; i <= n(); ++i) acc = acc + xi[i - 1] * partial_derivative(f, Indet::coordinate(i));
        return acc;
    }
};

// Characteristic Q[u] = eta - xi^i u_i.
inline Expr characteristic(const VectorField& v, const JetContext& ctx) {
    Expr acc = v.eta;
    for (int i = 1; i <= v.n(); ++i)
        acc = acc - v.xi[i - 1] * Expr(ctx.jet_var(MultiIndex::unit(ctx.n(), i)));
    return acc;
}

inline VectorField commutator(const VectorField& a, const VectorField& b) {
    std::vector<Expr> xi;
    for (int i = 0; i < a.n(); ++i) xi.push_back(a.apply(b.xi[i]) - b.apply(a.xi[i]));
    return VectorField(std::move(xi), a.apply(b.eta) - b.apply(a.eta));
}

// Module of vector fields presented by a basis. p = dim as a module over
// smooth functions once the rank condition holds.
struct VFModule {
    std::vector<VectorField> fields;

    explicit VFModule(std::vector<VectorField> fs) : fields(std::move(fs)) {
        if (fields.empty()) throw error("InvalidModule", "empty basis");
        for (auto& f : fields)
            if (f.n() != fields[0].n()) throw error("InvalidModule", "mixed coordinate counts");
        if (p() > n()) throw error("InvalidModule", "more basis fields than independent variables");
    }
    int n() const { return fields[0].n(); }
    int p() const { return static_cast<int>(fields.size()); }
};

namespace detail {

inline Expr det_expr(const std::vector<std::vector<Expr>>& m) {
    std::size_t k = m.size();
    if (k == 1) return m[0][0];
    Expr acc;
    int sign = 1;
    for (std::size_t j = 0; j < k; ++j) {
        if (!m[0][j].canonical_zero()) {
            std::vector<std::vector<Expr>> sub;
            for (std::size_t i = 1; i < k; ++i) {
                std::vector<Expr> row;
                for (std::size_t jj = 0; jj < k; ++jj)
                    if (jj != j) row.push_back(m[i][jj]);
                sub.push_back(std::move(row));
            }
            Expr minor = det_expr(sub);
            acc = sign > 0 ? acc + m[0][j] * minor : acc - m[0][j] * minor;
        }
        sign = -sign;
    }
    return acc;
}

inline void combinations(int from, int choose, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == choose) {
        out.push_back(cur);
        return;
    }
    for (int v = cur.empty() ? 0 : cur.back() + 1; v < from; ++v) {
        cur.push_back(v);
        combinations(from, choose, cur, out);
        cur.pop_back();
    }
}

// Symbolic rank of a matrix of (x, u)-functions: the largest k with a k x k
// minor that is not identically zero. Minors are tested with the dual-route
// zero test.
inline int symbolic_rank(const std::vector<std::vector<Expr>>& m) {
    int rows = static_cast<int>(m.size());
    int cols = rows ? static_cast<int>(m[0].size()) : 0;
    for (int k = std::min(rows, cols); k >= 1; --k) {
        std::vector<std::vector<int>> rsel, csel;
        std::vector<int> cur;
        combinations(rows, k, cur, rsel);
        combinations(cols, k, cur, csel);
        for (auto& rs : rsel)
            for (auto& cs : csel) {
                std::vector<std::vector<Expr>> sub;
                for (int i : rs) {
                    std::vector<Expr> row;
                    for (int j : cs) row.push_back(m[i][j]);
                    sub.push_back(std::move(row));
                }
                if (!is_zero(det_expr(sub))) return k;
            }
    }
    return 0;
}

inline std::vector<std::vector<Expr>> xi_matrix(const VFModule& m) {
    std::vector<std::vector<Expr>> out;
    for (auto& f : m.fields) out.push_back(f.xi);
    return out;
}

inline std::vector<std::vector<Expr>> full_matrix(const VFModule& m) {
    std::vector<std::vector<Expr>> out;
    for (auto& f : m.fields) {
        std::vector<Expr> row = f.xi;
        row.push_back(f.eta);
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace detail

// rank(xi^{si}) = p somewhere: some p x p minor of the coefficient matrix is
// not identically zero.
inline bool rank_condition(const VFModule& m) {
    return detail::symbolic_rank(detail::xi_matrix(m)) == m.p();
}

// Closure under the Lie bracket over the ring of (x, u)-functions: adjoining
// any pairwise bracket must not raise the generic rank of the coefficient
// matrix extended by the eta column.
inline bool is_involutive(const VFModule& m) {
    auto base = detail::full_matrix(m);
    int r0 = detail::symbolic_rank(base);
    for (int a = 0; a < m.p(); ++a)
        for (int b = a + 1; b < m.p(); ++b) {
            VectorField br = commutator(m.fields[a], m.fields[b]);
            auto rows = base;
            std::vector<Expr> row = br.xi;
            row.push_back(br.eta);
            rows.push_back(std::move(row));
            if (detail::symbolic_rank(rows) != r0) return false;
        }
    return true;
}

// Basis in canonical form: field s reads d_{c_s} + xi-hat^{s iota} d_iota +
// eta-hat^s d_u on the non-checked slots iota. The checked slots are picked as
// the lexicographically first column set whose minor is not identically zero,
// so the identity block {1..p} wins whenever it is admissible.
struct CanonicalModule {
    int n = 0;
    std::vector<int> checked;    // 1-based slots, ascending
    std::vector<int> unchecked;  // complement, ascending
    std::vector<VectorField> fields;

    int p() const { return static_cast<int>(checked.size()); }
    // xi-hat for basis index s (0-based) at unchecked slot iota (1-based).
    const Expr& xi_hat(int s, int iota) const { return fields[s].xi[iota - 1]; }
    const Expr& eta_hat(int s) const { return fields[s].eta; }

    VFModule as_module() const { return VFModule(fields); }
};

inline CanonicalModule canonical_basis(const VFModule& m) {
    int n = m.n(), p = m.p();
    std::vector<std::vector<int>> subsets;
    std::vector<int> cur;
    detail::combinations(n, p, cur, subsets);  // lexicographic, {0..p-1} first

    for (auto& cols : subsets) {
        std::vector<std::vector<Expr>> block;
        for (auto& f : m.fields) {
            std::vector<Expr> row;
            for (int c : cols) row.push_back(f.xi[c]);
            block.push_back(std::move(row));
        }
        Expr det = detail::det_expr(block);
        if (is_zero(det)) continue;

        // Inverse of the block via the adjugate.
        std::vector<std::vector<Expr>> inv(p, std::vector<Expr>(p));
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j) {
                std::vector<std::vector<Expr>> sub;
                for (int a = 0; a < p; ++a) {
                    if (a == i) continue;
                    std::vector<Expr> row;
                    for (int b = 0; b < p; ++b)
                        if (b != j) row.push_back(block[a][b]);
                    sub.push_back(std::move(row));
                }
                Expr cof = p == 1 ? Expr(1) : detail::det_expr(sub);
                if ((i + j) % 2) cof = -cof;
                inv[j][i] = cof / det;
            }

        std::vector<VectorField> out;
        for (int s = 0; s < p; ++s) {
            std::vector<Expr> xi(n);
            Expr eta;
            for (int t = 0; t < p; ++t) {
                for (int i = 0; i < n; ++i) xi[i] = xi[i] + inv[s][t] * m.fields[t].xi[i];
                eta = eta + inv[s][t] * m.fields[t].eta;
            }
            out.push_back(VectorField(std::move(xi), std::move(eta)));
        }

        CanonicalModule cm;
        cm.n = n;
        for (int c : cols) cm.checked.push_back(c + 1);
        for (int i = 1; i <= n; ++i)
            if (std::find(cm.checked.begin(), cm.checked.end(), i) == cm.checked.end())
                cm.unchecked.push_back(i);
        cm.fields = std::move(out);

        // The checked block must now be the identity.
        for (int s = 0; s < p; ++s)
            for (int t = 0; t < p; ++t) {
                Expr want = s == t ? Expr(1) : Expr();
                if (!(cm.fields[s].xi[cm.checked[t] - 1] == want))
                    throw internal_check_failure("canonical basis block is not the identity");
            }
        return cm;
    }
    throw rank_deficient("no p x p minor of the coefficient matrix is nonzero");
}

// Module member attached to an invariant: Q_s = d_s - (Phi_s/Phi_u) d_u for
// the first p slots. Phi must genuinely involve u.
inline VFModule phi_family_member(const Expr& phi, int p, const JetContext& ctx) {
    if (order_of(phi) > 0) throw error("InvalidArgument", "Phi must be a function of (x, u)");
    Expr phi_u = partial_derivative(phi, Indet::dependent());
    if (is_zero(phi_u)) throw degenerate_invariant("Phi_u normalizes to zero");
    std::vector<VectorField> fields;
    for (int s = 1; s <= p; ++s) {
        std::vector<Expr> xi(ctx.n());
        xi[s - 1] = Expr(1);
        Expr eta = -partial_derivative(phi, Indet::coordinate(s)) / phi_u;
        fields.push_back(VectorField(std::move(xi), std::move(eta)));
    }
    return VFModule(std::move(fields));
}

// Same construction over an arbitrary set of coordinate slots. Used when the
// family should span, say, the spatial directions of an evolution context.
inline VFModule phi_family_member(const Expr& phi, const std::vector<int>& slots,
                                  const JetContext& ctx) {
    if (order_of(phi) > 0) throw error("InvalidArgument", "Phi must be a function of (x, u)");
    if (slots.empty()) throw error("InvalidArgument", "at least one slot is required");
    Expr phi_u = partial_derivative(phi, Indet::dependent());
    if (is_zero(phi_u)) throw degenerate_invariant("Phi_u normalizes to zero");
    std::vector<VectorField> fields;
    for (int s : slots) {
        if (s < 1 || s > ctx.n()) throw error("InvalidArgument", "slot out of range");
        std::vector<Expr> xi(ctx.n());
        xi[s - 1] = Expr(1);
        Expr eta = -partial_derivative(phi, Indet::coordinate(s)) / phi_u;
        fields.push_back(VectorField(std::move(xi), std::move(eta)));
    }
    return VFModule(std::move(fields));
}

// The p = 1 non-involutive variant d_1 + u d_2 + xi^3 d_3 + ... + theta d_u.
inline VFModule special_family_member(const Expr& theta, const std::vector<Expr>& xi_tail,
                                      const JetContext& ctx) {
    if (ctx.n() < 2) throw error("InvalidArgument", "the special variant needs n >= 2");
    if (static_cast<int>(xi_tail.size()) != std::max(0, ctx.n() - 2))
        throw error("InvalidArgument", "xi_tail must list the coefficients for slots 3..n");
    std::vector<Expr> xi(ctx.n());
    xi[0] = Expr(1);
    xi[1] = ctx.dependent();
    for (int s = 3; s <= ctx.n(); ++s) xi[s - 1] = xi_tail[s - 3];
    return VFModule({VectorField(std::move(xi), theta)});
}

// Push a field forward through the point transformation X(x, u), U(x, u).
// The caller supplies the inverse maps, written in the same coordinates; they
// are verified before use.
inline VectorField pushforward(const VectorField& v, const std::vector<Expr>& X, const Expr& U,
                               const std::vector<Expr>& X_inv, const Expr& U_inv,
                               const JetContext& ctx) {
    if (static_cast<int>(X.size()) != v.n() || static_cast<int>(X_inv.size()) != v.n())
        throw error("InvalidArgument", "coordinate map arity mismatch");
    std::map<Indet, Expr> inv;
    for (int i = 1; i <= v.n(); ++i) inv.emplace(Indet::coordinate(i), X_inv[i - 1]);
    inv.emplace(Indet::dependent(), U_inv);
    for (int i = 1; i <= v.n(); ++i)
        if (!is_zero(substitute(X[i - 1], inv) - Expr(Indet::coordinate(i))))
            throw missing_inverse("X_inv does not invert X at slot " + std::to_string(i));
    if (!is_zero(substitute(U, inv) - ctx.dependent()))
        throw missing_inverse("U_inv does not invert U");

    std::vector<Expr> xi;
    for (int i = 0; i < v.n(); ++i) xi.push_back(substitute(v.apply(X[i]), inv));
    return VectorField(std::move(xi), substitute(v.apply(U), inv));
}

// Prolongation coefficients eta^alpha = D^alpha (Q[u]) + xi^i u_{alpha + d_i}
// for 0 < |alpha| <= r.
inline std::map<MultiIndex, Expr> prolong(const VectorField& v, int r, const JetContext& ctx) {
    Expr q = characteristic(v, ctx);
    std::map<MultiIndex, Expr> dq;  // D^alpha Q[u]
    dq.emplace(MultiIndex::zero(ctx.n()), q);

    std::vector<MultiIndex> layer{MultiIndex::zero(ctx.n())};
    std::map<MultiIndex, Expr> out;
    for (int ord = 1; ord <= r; ++ord) {
        std::vector<MultiIndex> next;
        for (auto& alpha : layer)
            for (int s = 1; s <= ctx.n(); ++s) {
                MultiIndex beta = alpha.plus(s);
                if (dq.count(beta)) continue;
                dq.emplace(beta, total_derivative(dq.at(alpha), s, ctx));
                next.push_back(beta);
            }
        layer = std::move(next);
        for (auto& beta : layer) {
            Expr coeff = dq.at(beta);
            for (int i = 1; i <= ctx.n(); ++i)
                coeff = coeff + v.xi[i - 1] * Expr(ctx.jet_var(beta.plus(i)));
            out.emplace(beta, std::move(coeff));
        }
    }
    return out;
}

// Prolonged action of v on a differential function of order <= r.
inline Expr prolonged_apply(const VectorField& v, const Expr& f, const JetContext& ctx) {
    int r = std::max(order_of(f), 0);
    Expr acc = v.eta * partial_derivative(f, Indet::dependent());
    for (int i = 1; i <= v.n(); ++i) acc = acc + v.xi[i - 1] * partial_derivative(f, Indet::coordinate(i));
    if (r == 0) return acc;
    std::map<MultiIndex, Expr> coeffs = prolong(v, r, ctx);
    for (const MultiIndex& alpha : jet_dependence(f, ctx)) {
        if (alpha.order() == 0) continue;
        Expr df = partial_derivative(f, Indet::jet(alpha));
        if (!df.canonical_zero()) acc = acc + coeffs.at(alpha) * df;
    }
    return acc;
}

}  // namespace redmod
