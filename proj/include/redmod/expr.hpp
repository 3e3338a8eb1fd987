#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "redmod/poly.hpp"

namespace redmod {

// Global knobs. The node budget bounds every normalized expression; the seed
// feeds the sampling side of the zero test. Both are process-wide on purpose:
// the CLI sets them once, library code only reads them.
inline std::atomic<std::size_t>& max_expr_nodes() {
    static std::atomic<std::size_t> v{2'000'000};
    return v;
}
inline std::atomic<std::uint64_t>& zero_test_seed() {
    static std::atomic<std::uint64_t> v{0x5eed0001u};
    return v;
}

struct ExprData {
    Poly num;
    Poly den;  // integer coefficients, content 1, positive leading coefficient
    std::size_t nodes = 0;
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Immutable rational expression in canonical form: num/den with gcd(num, den)
// a unit and den primitive with positive leading coefficient. Exponentials are
// opaque indeterminates whose identity is the canonical form of the argument,
// so structural equality of two Expr values decides equality of the functions
// they denote (within the free model: no exp(a)*exp(b) = exp(a+b) relation).
class Expr {
public:
    Expr() : d_(zero_data()) {}
    Expr(int v) : Expr(Rational(v)) {}
    Expr(const Rational& v) : d_(std::make_shared<const ExprData>(ExprData{Poly::constant(v), Poly::constant(1), 1})) {}
    explicit Expr(const Indet& v) : Expr(Poly::var(v)) {}
    explicit Expr(Poly p) {
        ExprData d{std::move(p), Poly::constant(1), 0};
        d.nodes = count_nodes(d);
        check_budget(d.nodes);
        d_ = std::make_shared<const ExprData>(std::move(d));
    }

    static Expr from_ratio(Poly num, Poly den) {
        if (den.is_zero()) throw zero_denominator("denominator normalizes to zero");
        if (num.is_zero()) return Expr();
        if (!den.is_one()) {
            Poly g = poly_gcd(num, den);
            if (!g.is_constant()) {
                num = *num.divide_exact(g);
                den = *den.divide_exact(g);
            }
            Rational c = den.content();
            if (c != 1) {
                den = den.scaled(Rational(1) / c);
                num = num.scaled(Rational(1) / c);
            }
        }
        ExprData d{std::move(num), std::move(den), 0};
        d.nodes = count_nodes(d);
        check_budget(d.nodes);
        return Expr(std::make_shared<const ExprData>(std::move(d)));
    }

    static Expr exp_atom(const Expr& arg);

    const Poly& num() const { return d_->num; }
    const Poly& den() const { return d_->den; }
    std::size_t nodes() const { return d_->nodes; }
    const std::shared_ptr<const ExprData>& data() const { return d_; }
    static Expr wrap(std::shared_ptr<const ExprData> d) { return Expr(std::move(d)); }

    bool canonical_zero() const { return d_->num.is_zero(); }
    bool is_polynomial() const { return d_->den.is_one(); }
    bool is_rational_constant() const { return d_->num.is_constant() && d_->den.is_one(); }
    Rational rational_value() const { return d_->num.constant_value(); }

    friend bool operator==(const Expr& a, const Expr& b) {
        if (a.d_ == b.d_) return true;
        return a.d_->num == b.d_->num && a.d_->den == b.d_->den;
    }
    friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

    friend Expr operator+(const Expr& a, const Expr& b) {
        if (a.canonical_zero()) return b;
        if (b.canonical_zero()) return a;
        if (a.d_->den == b.d_->den) return from_ratio(a.d_->num + b.d_->num, a.d_->den);
        // Both operands are reduced, so after cancelling g = gcd(d1, d2) the
        // only factor the sum can share with the denominator divides g. This
        // keeps the gcd work proportional to g instead of to d1*d2.
        Poly g = poly_gcd(a.d_->den, b.d_->den);
        if (g.is_constant())
            return from_reduced(a.d_->num * b.d_->den + b.d_->num * a.d_->den, a.d_->den * b.d_->den);
        Poly da = *a.d_->den.divide_exact(g);
        Poly db = *b.d_->den.divide_exact(g);
        Poly t = a.d_->num * db + b.d_->num * da;
        if (t.is_zero()) return Expr();
        Poly h = poly_gcd(t, g);
        if (h.is_constant()) return from_reduced(std::move(t), a.d_->den * db);
        return from_reduced(*t.divide_exact(h), *a.d_->den.divide_exact(h) * db);
    }
    friend Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }
    Expr operator-() const {
        if (canonical_zero()) return *this;
        ExprData d{-d_->num, d_->den, d_->nodes};
        return Expr(std::make_shared<const ExprData>(std::move(d)));
    }
    friend Expr operator*(const Expr& a, const Expr& b) {
        if (a.canonical_zero() || b.canonical_zero()) return Expr();
        if (a.d_->den.is_one() && b.d_->den.is_one())
            return from_reduced(a.d_->num * b.d_->num, Poly::constant(1));
        // Cross-cancel each numerator against the opposite denominator; the
        // remaining factors are pairwise coprime, so the product is reduced.
        Poly g1 = poly_gcd(a.d_->num, b.d_->den);
        Poly g2 = poly_gcd(b.d_->num, a.d_->den);
        Poly n1 = g1.is_constant() ? a.d_->num : *a.d_->num.divide_exact(g1);
        Poly d2 = g1.is_constant() ? b.d_->den : *b.d_->den.divide_exact(g1);
        Poly n2 = g2.is_constant() ? b.d_->num : *b.d_->num.divide_exact(g2);
        Poly d1 = g2.is_constant() ? a.d_->den : *a.d_->den.divide_exact(g2);
        return from_reduced(n1 * n2, d1 * d2);
    }
    friend Expr operator/(const Expr& a, const Expr& b) {
        if (b.canonical_zero()) throw zero_denominator("division by an expression that normalizes to zero");
        if (a.canonical_zero()) return a;
        Poly g1 = poly_gcd(a.d_->num, b.d_->num);
        Poly g2 = poly_gcd(b.d_->den, a.d_->den);
        Poly n1 = g1.is_constant() ? a.d_->num : *a.d_->num.divide_exact(g1);
        Poly n2 = g1.is_constant() ? b.d_->num : *b.d_->num.divide_exact(g1);
        Poly d2 = g2.is_constant() ? b.d_->den : *b.d_->den.divide_exact(g2);
        Poly d1 = g2.is_constant() ? a.d_->den : *a.d_->den.divide_exact(g2);
        return from_reduced(n1 * d2, d1 * n2);
    }

    Expr pow(int k) const {
        if (k == 0) return Expr(1);
        if (k < 0) return Expr(1) / pow(-k);
        if (k == 1) return *this;
        if (canonical_zero()) return *this;
        // Powers of a reduced fraction stay reduced.
        return from_reduced(d_->num.pow(k), d_->den.pow(k));
    }

    // Indeterminates of the canonical form, optionally looking through the
    // arguments of exponential atoms.
    std::set<Indet> indets(bool through_exp_args) const {
        std::set<Indet> out;
        collect_indets(*this, through_exp_args, out);
        return out;
    }

    bool depends_on(const Indet& v) const {
        for (const Indet& w : indets(true))
            if (w == v || (w.kind() == Indet::Kind::exp_atom && v.kind() == Indet::Kind::exp_atom &&
                           w.exp_key() == v.exp_key()))
                return true;
        return false;
    }

private:
    explicit Expr(std::shared_ptr<const ExprData> d) : d_(std::move(d)) {}

    static const std::shared_ptr<const ExprData>& zero_data() {
        static const std::shared_ptr<const ExprData> z =
            std::make_shared<const ExprData>(ExprData{Poly(), Poly::constant(1), 1});
        return z;
    }

    // For callers that can prove gcd(num, den) is constant; skips the gcd but
    // still normalizes the denominator content and enforces the node budget.
    static Expr from_reduced(Poly num, Poly den) {
        if (num.is_zero()) return Expr();
        if (!den.is_one()) {
            Rational c = den.content();
            if (c != 1) {
                den = den.scaled(Rational(1) / c);
                num = num.scaled(Rational(1) / c);
            }
        }
        ExprData d{std::move(num), std::move(den), 0};
        d.nodes = count_nodes(d);
        check_budget(d.nodes);
        return Expr(std::make_shared<const ExprData>(std::move(d)));
    }

    static std::size_t atom_nodes(const Indet& v) {
        if (v.kind() != Indet::Kind::exp_atom) return 0;
        return v.exp_arg()->nodes;
    }
    static std::size_t count_nodes(const ExprData& d) {
        std::size_t n = d.num.node_count() + d.den.node_count() + 1;
        std::set<std::string> seen;
        for (const Poly* p : {&d.num, &d.den})
            for (auto& t : p->terms())
                for (auto& f : t.mono.factors())
                    if (f.first.kind() == Indet::Kind::exp_atom && seen.insert(f.first.exp_key()).second)
                        n += atom_nodes(f.first);
        return n;
    }
    static void check_budget(std::size_t n) {
        if (n > max_expr_nodes().load())
            throw resource_limit("expression grew past the node budget (" +
                                 std::to_string(max_expr_nodes().load()) + " nodes)");
    }

    static void collect_indets(const Expr& e, bool deep, std::set<Indet>& out) {
        for (const Poly* p : {&e.d_->num, &e.d_->den})
            for (auto& t : p->terms())
                for (auto& f : t.mono.factors()) {
                    if (out.insert(f.first).second && deep && f.first.kind() == Indet::Kind::exp_atom)
                        collect_indets(Expr(f.first.exp_arg()), deep, out);
                }
    }

    std::shared_ptr<const ExprData> d_;
};

// ---------------------------------------------------------------------------
// Printing. The canonical serialization uses x<slot> names; callers with a
// context pass a name table so the time alias prints as "t".

inline std::string print_rational(const Rational& q) {
    std::string s = boost::multiprecision::numerator(q).str();
    if (boost::multiprecision::denominator(q) != 1) s += "/" + boost::multiprecision::denominator(q).str();
    return s;
}

inline std::string print_expr(const Expr& e, const std::vector<std::string>* coord_names = nullptr);

inline std::string print_indet(const Indet& v, const std::vector<std::string>* coord_names) {
    switch (v.kind()) {
        case Indet::Kind::coordinate: {
            int slot = v.coord_slot();
            if (coord_names && slot >= 1 && slot <= static_cast<int>(coord_names->size()))
                return (*coord_names)[slot - 1];
            return "x" + std::to_string(slot);
        }
        case Indet::Kind::dependent:
            return "u";
        case Indet::Kind::jet: {
            std::string s = "u[";
            const auto& e = v.jet_index().e;
            for (std::size_t i = 0; i < e.size(); ++i) {
                if (i) s += ",";
                s += std::to_string(e[i]);
            }
            return s + "]";
        }
        case Indet::Kind::symbol:
            return v.symbol_info().name;
        case Indet::Kind::exp_atom:
            return "exp(" + print_expr(Expr::wrap(v.exp_arg()), coord_names) + ")";
    }
    return "?";
}

inline std::string print_poly(const Poly& p, const std::vector<std::string>* coord_names) {
    if (p.is_zero()) return "0";
    std::string out;
    bool first = true;
    for (auto& t : p.terms()) {
        Rational c = t.coeff;
        bool neg = c < 0;
        if (neg) c = -c;
        if (first) {
            if (neg) out += "-";
            first = false;
        } else {
            out += neg ? " - " : " + ";
        }
        std::string body;
        if (c != 1 || t.mono.empty()) body = print_rational(c);
        for (auto& f : t.mono.factors()) {
            if (!body.empty()) body += "*";
            body += print_indet(f.first, coord_names);
            if (f.second > 1) body += "^" + std::to_string(f.second);
        }
        out += body;
    }
    return out;
}

inline std::string print_expr(const Expr& e, const std::vector<std::string>* coord_names) {
    std::string n = print_poly(e.num(), coord_names);
    if (e.den().is_one()) return n;
    return "(" + n + ")/(" + print_poly(e.den(), coord_names) + ")";
}

inline Expr Expr::exp_atom(const Expr& arg) {
    auto key = std::make_shared<const std::string>("exp(" + print_expr(arg) + ")");
    return Expr(Indet::exp_raw(arg.data(), std::move(key)));
}

// ---------------------------------------------------------------------------
// Zero testing: the canonical form decides, and a Schwartz-Zippel style probe
// at random rational points must agree. Distinct exponential atoms are
// algebraically independent, so each receives its own sample value; a zero
// denominator at a sample point only triggers a resample.

namespace detail {

inline Rational sample_value(std::uint64_t& rng_state) {
    // values in [-4096, 4096]
    std::int64_t v = static_cast<std::int64_t>(splitmix64(rng_state) % 8193u) - 4096;
    return Rational(v);
}

}  // namespace detail

inline bool is_zero(const Expr& e, int points = 20) {
    bool canonical = e.canonical_zero();

    std::set<Indet> vars = e.indets(false);
    std::uint64_t state = zero_test_seed().load() ^
                          (0x2545F4914F6CDD1Dull * (e.num().terms().size() + 37 * e.den().terms().size() +
                                                    101 * vars.size() + 11 * e.nodes()));
    bool nonzero_seen = false;
    int good = 0;
    for (int attempt = 0; attempt < 40 * points && good < points; ++attempt) {
        std::map<Indet, Rational> pt;
        for (auto& v : vars) pt.emplace(v, detail::sample_value(state));
        if (e.den().eval(pt) == 0) continue;  // resample
        if (e.num().eval(pt) != 0) nonzero_seen = true;
        ++good;
    }
    if (good < points)
        throw internal_check_failure("zero test could not find enough sample points off the denominator zero set");
    if (canonical && nonzero_seen)
        throw internal_check_failure("canonical form is zero but a sample point evaluated nonzero");
    if (!canonical && !nonzero_seen)
        throw internal_check_failure("canonical form is nonzero but all sample points evaluated to zero");
    return canonical;
}

// ---------------------------------------------------------------------------
// Differentiation with the chain rule through exponential atoms.

inline Expr partial_derivative(const Expr& e, const Indet& v);

namespace detail {

inline Expr d_poly(const Poly& p, const Indet& v) {
    Expr acc;
    Poly formal = p.derivative_formal(v);
    if (!formal.is_zero()) acc = Expr(formal);
    for (auto& t : p.terms()) {
        for (auto& f : t.mono.factors()) {
            if (f.first.kind() != Indet::Kind::exp_atom) continue;
            Expr darg = partial_derivative(Expr::wrap(f.first.exp_arg()), v);
            if (darg.canonical_zero()) continue;
            // d(E^k)/dv = k * E^k * darg, so the term itself survives.
            Poly term;
            term = term + Poly::constant(t.coeff * f.second).term_times(t.mono, 1);
            acc = acc + Expr(term) * darg;
        }
    }
    return acc;
}

}  // namespace detail

inline Expr partial_derivative(const Expr& e, const Indet& v) {
    if (!e.depends_on(v)) return Expr();
    Expr dn = detail::d_poly(e.num(), v);
    if (e.den().is_one()) return dn;
    Expr dd = detail::d_poly(e.den(), v);
    Expr den(e.den());
    return (dn * den - Expr(e.num()) * dd) / (den * den);
}

// ---------------------------------------------------------------------------
// Simultaneous substitution. Bindings replace whole indeterminates; arguments
// of exponential atoms are rewritten recursively, which may merge or split
// atoms. A denominator that collapses to zero is reported, not normalized.

inline Expr substitute(const Expr& e, const std::map<Indet, Expr>& bindings);

namespace detail {

inline bool binding_applies(const Expr& e, const std::map<Indet, Expr>& bindings) {
    for (const Indet& v : e.indets(true))
        if (bindings.count(v)) return true;
    return false;
}

inline Expr subst_poly(const Poly& p, const std::map<Indet, Expr>& bindings) {
    Expr acc;
    for (auto& t : p.terms()) {
        Expr term(t.coeff);
        for (auto& f : t.mono.factors()) {
            Expr val;
            auto it = bindings.find(f.first);
            if (it != bindings.end()) {
                val = it->second;
            } else if (f.first.kind() == Indet::Kind::exp_atom) {
                Expr arg = Expr::wrap(f.first.exp_arg());
                Expr new_arg = substitute(arg, bindings);
                val = (new_arg == arg) ? Expr(f.first) : Expr::exp_atom(new_arg);
            } else {
                val = Expr(f.first);
            }
            term = term * val.pow(f.second);
        }
        acc = acc + term;
    }
    return acc;
}

}  // namespace detail

inline Expr substitute(const Expr& e, const std::map<Indet, Expr>& bindings) {
    if (bindings.empty() || !detail::binding_applies(e, bindings)) return e;
    Expr n = detail::subst_poly(e.num(), bindings);
    Expr d = detail::subst_poly(e.den(), bindings);
    if (d.canonical_zero())
        throw singular_substitution("substitution sends the denominator " + print_expr(Expr(e.den())) +
                                    " to zero");
    return n / d;
}

// ---------------------------------------------------------------------------
// Split off the structurally nonvanishing part: exponential atoms, declared
// nonzero symbols, and the rational content. factor_nonvanishing(e) returns
// (multiplier, core) with e = multiplier * core exactly.

inline std::pair<Expr, Expr> factor_nonvanishing(const Expr& e) {
    if (e.canonical_zero()) return {Expr(1), e};

    auto nonvanishing_part = [](const Poly& p) {
        std::vector<Monomial::Factor> keep;
        Monomial mg = p.monomial_gcd();
        for (auto& f : mg.factors()) {
            bool ok = f.first.kind() == Indet::Kind::exp_atom ||
                      (f.first.kind() == Indet::Kind::symbol && f.first.symbol_info().nonzero);
            if (ok) keep.push_back(f);
        }
        return Monomial(std::move(keep));
    };

    Monomial mn = nonvanishing_part(e.num());
    Monomial md = nonvanishing_part(e.den());
    Poly n1 = *e.num().divide_exact(Poly::constant(1).term_times(mn, 1));
    Poly d1 = *e.den().divide_exact(Poly::constant(1).term_times(md, 1));
    Rational c = n1.content();

    Expr core = Expr::from_ratio(n1.scaled(Rational(1) / c), d1);
    Expr multiplier = e / core;
    if (!(multiplier * core == e))
        throw internal_check_failure("factor_nonvanishing lost exactness");
    return {multiplier, core};
}

}  // namespace redmod
