#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "redmod/indet.hpp"

namespace redmod {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational rational_pow(const Rational& q, int k) {
    if (k == 0) return 1;
    Rational base = k > 0 ? q : Rational(1) / q;
    int e = k > 0 ? k : -k;
    Rational acc = 1;
    while (e) {
        if (e & 1) acc *= base;
        base *= base;
        e >>= 1;
    }
    return acc;
}

// Power product with strictly positive exponents, factors sorted by Indet order.
class Monomial {
public:
    using Factor = std::pair<Indet, int>;

    Monomial() = default;
    explicit Monomial(std::vector<Factor> fs) : fs_(std::move(fs)) {}
    static Monomial var(const Indet& v, int k = 1) {
        Monomial m;
        if (k > 0) m.fs_.push_back({v, k});
        return m;
    }

    const std::vector<Factor>& factors() const { return fs_; }
    bool empty() const { return fs_.empty(); }
    int degree() const {
        int d = 0;
        for (auto& f : fs_) d += f.second;
        return d;
    }
    int degree_in(const Indet& v) const {
        for (auto& f : fs_)
            if (f.first == v) return f.second;
        return 0;
    }

    Monomial times(const Monomial& o) const {
        Monomial out;
        out.fs_.reserve(fs_.size() + o.fs_.size());
        std::size_t i = 0, j = 0;
        while (i < fs_.size() && j < o.fs_.size()) {
            int c = compare(fs_[i].first, o.fs_[j].first);
            if (c < 0)
                out.fs_.push_back(fs_[i++]);
            else if (c > 0)
                out.fs_.push_back(o.fs_[j++]);
            else {
                out.fs_.push_back({fs_[i].first, fs_[i].second + o.fs_[j].second});
                ++i, ++j;
            }
        }
        for (; i < fs_.size(); ++i) out.fs_.push_back(fs_[i]);
        for (; j < o.fs_.size(); ++j) out.fs_.push_back(o.fs_[j]);
        return out;
    }

    // this / o, or nullopt when some exponent would go negative.
    std::optional<Monomial> divide(const Monomial& o) const {
        Monomial out;
        std::size_t i = 0, j = 0;
        while (j < o.fs_.size()) {
            if (i == fs_.size()) return std::nullopt;
            int c = compare(fs_[i].first, o.fs_[j].first);
            if (c < 0) {
                out.fs_.push_back(fs_[i++]);
            } else if (c > 0) {
                return std::nullopt;
            } else {
                int d = fs_[i].second - o.fs_[j].second;
                if (d < 0) return std::nullopt;
                if (d > 0) out.fs_.push_back({fs_[i].first, d});
                ++i, ++j;
            }
        }
        for (; i < fs_.size(); ++i) out.fs_.push_back(fs_[i]);
        return out;
    }

    Monomial without(const Indet& v) const {
        Monomial out;
        for (auto& f : fs_)
            if (!(f.first == v)) out.fs_.push_back(f);
        return out;
    }

private:
    std::vector<Factor> fs_;
};

// Graded lexicographic order; an earlier indeterminate carries more weight.
inline int compare(const Monomial& a, const Monomial& b) {
    if (a.degree() != b.degree()) return a.degree() < b.degree() ? -1 : 1;
    auto& fa = a.factors();
    auto& fb = b.factors();
    std::size_t i = 0, j = 0;
    while (i < fa.size() && j < fb.size()) {
        int c = compare(fa[i].first, fb[j].first);
        if (c < 0) return 1;   // a has a positive power of an earlier variable
        if (c > 0) return -1;
        if (fa[i].second != fb[j].second) return fa[i].second < fb[j].second ? -1 : 1;
        ++i, ++j;
    }
    // Equal prefixes plus equal total degree force both lists to end together.
    return 0;
}

inline bool operator==(const Monomial& a, const Monomial& b) { return compare(a, b) == 0; }
inline bool operator<(const Monomial& a, const Monomial& b) { return compare(a, b) < 0; }

// Sparse multivariate polynomial over Q, terms sorted by descending monomial.
class Poly {
public:
    struct Term {
        Monomial mono;
        Rational coeff;
    };

    Poly() = default;
    static Poly constant(Rational c) {
        Poly p;
        if (c != 0) p.ts_.push_back({Monomial(), std::move(c)});
        return p;
    }
    static Poly var(const Indet& v, int k = 1) {
        Poly p;
        p.ts_.push_back({Monomial::var(v, k), 1});
        return p;
    }

    const std::vector<Term>& terms() const { return ts_; }
    bool is_zero() const { return ts_.empty(); }
    bool is_constant() const { return ts_.empty() || (ts_.size() == 1 && ts_[0].mono.empty()); }
    bool is_one() const { return ts_.size() == 1 && ts_[0].mono.empty() && ts_[0].coeff == 1; }
    Rational constant_value() const { return ts_.empty() ? Rational(0) : ts_[0].coeff; }
    const Term& leading() const { return ts_.front(); }
    std::size_t node_count() const {
        std::size_t n = 0;
        for (auto& t : ts_) n += 1 + t.mono.factors().size();
        return n;
    }

    int total_degree() const { return ts_.empty() ? -1 : ts_[0].mono.degree(); }
    int degree_in(const Indet& v) const {
        int d = 0;
        for (auto& t : ts_) d = std::max(d, t.mono.degree_in(v));
        return d;
    }
    bool depends_on(const Indet& v) const {
        for (auto& t : ts_)
            if (t.mono.degree_in(v) > 0) return true;
        return false;
    }
    std::set<Indet> vars() const {
        std::set<Indet> out;
        for (auto& t : ts_)
            for (auto& f : t.mono.factors()) out.insert(f.first);
        return out;
    }

    Poly operator-() const {
        Poly out = *this;
        for (auto& t : out.ts_) t.coeff = -t.coeff;
        return out;
    }

    friend Poly operator+(const Poly& a, const Poly& b) {
        Poly out;
        out.ts_.reserve(a.ts_.size() + b.ts_.size());
        std::size_t i = 0, j = 0;
        while (i < a.ts_.size() && j < b.ts_.size()) {
            int c = compare(a.ts_[i].mono, b.ts_[j].mono);
            if (c > 0)
                out.ts_.push_back(a.ts_[i++]);
            else if (c < 0)
                out.ts_.push_back(b.ts_[j++]);
            else {
                Rational s = a.ts_[i].coeff + b.ts_[j].coeff;
                if (s != 0) out.ts_.push_back({a.ts_[i].mono, std::move(s)});
                ++i, ++j;
            }
        }
        for (; i < a.ts_.size(); ++i) out.ts_.push_back(a.ts_[i]);
        for (; j < b.ts_.size(); ++j) out.ts_.push_back(b.ts_[j]);
        return out;
    }
    friend Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }

    friend Poly operator*(const Poly& a, const Poly& b) {
        if (a.is_zero() || b.is_zero()) return Poly();
        if (a.is_constant()) return b.scaled(a.constant_value());
        if (b.is_constant()) return a.scaled(b.constant_value());
        std::map<Monomial, Rational> acc;
        for (auto& ta : a.ts_)
            for (auto& tb : b.ts_) {
                Monomial m = ta.mono.times(tb.mono);
                auto it = acc.find(m);
                if (it == acc.end())
                    acc.emplace(std::move(m), ta.coeff * tb.coeff);
                else {
                    it->second += ta.coeff * tb.coeff;
                    if (it->second == 0) acc.erase(it);
                }
            }
        Poly out;
        out.ts_.reserve(acc.size());
        for (auto it = acc.rbegin(); it != acc.rend(); ++it) out.ts_.push_back({it->first, it->second});
        return out;
    }

    Poly scaled(const Rational& c) const {
        if (c == 0) return Poly();
        Poly out = *this;
        for (auto& t : out.ts_) t.coeff *= c;
        return out;
    }

    Poly term_times(const Monomial& m, const Rational& c) const {
        Poly out;
        out.ts_.reserve(ts_.size());
        for (auto& t : ts_) out.ts_.push_back({t.mono.times(m), t.coeff * c});
        // Multiplying every monomial by a fixed one preserves the order.
        return out;
    }

    Poly pow(int k) const {
        Poly acc = Poly::constant(1);
        Poly base = *this;
        while (k) {
            if (k & 1) acc = acc * base;
            base = base * base;
            k >>= 1;
        }
        return acc;
    }

    // Formal partial derivative; exponential atoms are treated as independent
    // variables here, the chain rule lives at the expression level.
    Poly derivative_formal(const Indet& v) const {
        Poly out;
        for (auto& t : ts_) {
            int k = t.mono.degree_in(v);
            if (k == 0) continue;
            Monomial m = t.mono.without(v);
            if (k > 1) m = m.times(Monomial::var(v, k - 1));
            out = out + Poly::constant(t.coeff * k).term_times(m, 1);
        }
        return out;
    }

    Rational eval(const std::map<Indet, Rational>& point) const {
        Rational total = 0;
        for (auto& t : ts_) {
            Rational val = t.coeff;
            for (auto& f : t.mono.factors()) {
                auto it = point.find(f.first);
                if (it == point.end()) throw error("InternalError", "eval point misses a variable");
                val *= rational_pow(it->second, f.second);
            }
            total += val;
        }
        return total;
    }

    // Exact multivariate division; nullopt when b does not divide this.
    std::optional<Poly> divide_exact(const Poly& b) const {
        if (b.is_zero()) return std::nullopt;
        if (b.is_constant()) return scaled(Rational(1) / b.constant_value());
        Poly r = *this;
        Poly q;
        while (!r.is_zero()) {
            auto m = r.leading().mono.divide(b.leading().mono);
            if (!m) return std::nullopt;
            Rational c = r.leading().coeff / b.leading().coeff;
            Poly piece;
            piece.ts_.push_back({*m, c});
            q = q + piece;
            r = r - b.term_times(*m, c);
        }
        return q;
    }

    // Largest monomial dividing every term (the monomial content).
    Monomial monomial_gcd() const {
        if (ts_.empty()) return Monomial();
        std::vector<Monomial::Factor> common(ts_[0].mono.factors().begin(), ts_[0].mono.factors().end());
        for (std::size_t i = 1; i < ts_.size() && !common.empty(); ++i) {
            std::vector<Monomial::Factor> next;
            for (auto& f : common) {
                int d = ts_[i].mono.degree_in(f.first);
                if (d > 0) next.push_back({f.first, std::min(f.second, d)});
            }
            common = std::move(next);
        }
        return Monomial(std::move(common));
    }

    // Signed rational content: P / content(P) has coprime integer coefficients
    // and a positive leading coefficient.
    Rational content() const {
        if (ts_.empty()) return 1;
        Int num_gcd = 0, den_lcm = 1;
        for (auto& t : ts_) {
            num_gcd = boost::multiprecision::gcd(num_gcd, boost::multiprecision::numerator(t.coeff));
            Int d = boost::multiprecision::denominator(t.coeff);
            den_lcm = den_lcm / boost::multiprecision::gcd(den_lcm, d) * d;
        }
        Rational c(num_gcd, den_lcm);
        if (ts_[0].coeff < 0) c = -c;
        return c;
    }
    Poly primitive_part() const { return is_zero() ? Poly() : scaled(Rational(1) / content()); }

private:
    std::vector<Term> ts_;
};

inline bool operator==(const Poly& a, const Poly& b) {
    if (a.terms().size() != b.terms().size()) return false;
    for (std::size_t i = 0; i < a.terms().size(); ++i)
        if (!(a.terms()[i].mono == b.terms()[i].mono) || a.terms()[i].coeff != b.terms()[i].coeff)
            return false;
    return true;
}

namespace detail {

// View of p as a univariate polynomial in v with Poly coefficients.
inline std::map<int, Poly> coeffs_in(const Poly& p, const Indet& v) {
    std::map<int, Poly> out;
    for (auto& t : p.terms()) {
        int k = t.mono.degree_in(v);
        Poly piece;
        piece = piece + Poly::constant(t.coeff).term_times(t.mono.without(v), 1);
        auto it = out.find(k);
        if (it == out.end())
            out.emplace(k, piece);
        else
            it->second = it->second + piece;
    }
    for (auto it = out.begin(); it != out.end();)
        it = it->second.is_zero() ? out.erase(it) : std::next(it);
    return out;
}

inline Poly from_coeffs(const std::map<int, Poly>& cs, const Indet& v) {
    Poly out;
    for (auto& [k, c] : cs) out = out + c.term_times(Monomial::var(v, k), 1);
    return out;
}

inline int degree_of(const std::map<int, Poly>& cs) { return cs.empty() ? -1 : cs.rbegin()->first; }

// Pseudo-remainder of a by b as univariate polynomials in v, scaled to the
// standard lc(b)^(delta+1) * a mod b so subresultant divisions come out exact.
inline Poly prem(Poly a, const Poly& b, const Indet& v, int delta) {
    int db = b.degree_in(v);
    Poly lcb = coeffs_in(b, v).rbegin()->second;
    int mults = 0;
    while (!a.is_zero() && a.degree_in(v) >= db) {
        auto ca = coeffs_in(a, v);
        int da = degree_of(ca);
        Poly lca = ca.rbegin()->second;
        Poly shift = lca.term_times(Monomial::var(v, da - db), 1);
        a = a * lcb - shift * b;
        ++mults;
    }
    for (; mults <= delta && !a.is_zero(); ++mults) a = a * lcb;
    return a;
}

}  // namespace detail

Poly poly_gcd(const Poly& a, const Poly& b);

namespace detail {

// gcd of the Poly coefficients of a univariate view (the content in v).
inline Poly content_in(const Poly& p, const Indet& v) {
    Poly g;
    for (auto& [k, c] : coeffs_in(p, v)) {
        (void)k;
        g = g.is_zero() ? c : poly_gcd(g, c);
        if (g.is_constant() && !g.is_zero()) return Poly::constant(1);
    }
    return g;
}

}  // namespace detail

// Primitive gcd (content-free up to a rational unit). Monomial content and a
// trial exact division cover the common cases; the fallback is a primitive
// polynomial remainder sequence in the least-degree shared variable.
inline Poly poly_gcd(const Poly& a, const Poly& b) {
    if (a.is_zero()) return b.is_zero() ? Poly() : b.primitive_part();
    if (b.is_zero()) return a.primitive_part();
    if (a.is_constant() || b.is_constant()) return Poly::constant(1);

    Monomial ma = a.monomial_gcd();
    Monomial mb = b.monomial_gcd();
    std::vector<Monomial::Factor> shared;
    for (auto& f : ma.factors()) {
        int d = mb.degree_in(f.first);
        if (d > 0) shared.push_back({f.first, std::min(f.second, d)});
    }
    Monomial mc(std::move(shared));
    Poly pa = a.divide_exact(Poly::constant(1).term_times(ma, 1))->primitive_part();
    Poly pb = b.divide_exact(Poly::constant(1).term_times(mb, 1))->primitive_part();

    Poly unit = Poly::constant(1).term_times(mc, 1);
    if (pa.is_constant() || pb.is_constant()) return unit;

    auto wrap = [&](const Poly& g) { return g.term_times(mc, 1); };
    if (pa.divide_exact(pb)) return wrap(pb);
    if (pb.divide_exact(pa)) return wrap(pa);

    // Main variable: shared, with the smallest larger degree.
    std::optional<Indet> main;
    int best = 0;
    for (auto& v : pa.vars()) {
        int da = pa.degree_in(v), db = pb.degree_in(v);
        if (db == 0) continue;
        int score = std::max(da, db);
        if (!main || score < best) {
            main = v;
            best = score;
        }
    }
    if (!main) return unit;

    Poly ca = detail::content_in(pa, *main);
    Poly cb = detail::content_in(pb, *main);
    Poly cg = poly_gcd(ca, cb);
    Poly a1 = *pa.divide_exact(ca);
    Poly b1 = *pb.divide_exact(cb);

    if (a1.degree_in(*main) < b1.degree_in(*main)) std::swap(a1, b1);

    // Subresultant remainder sequence (Collins): each pseudo-remainder is
    // divided by the predicted factor g*h^delta, which bounds coefficient
    // growth without recomputing multivariate contents at every step.
    Poly g = Poly::constant(1), h = Poly::constant(1);
    while (true) {
        int delta = a1.degree_in(*main) - b1.degree_in(*main);
        Poly r = detail::prem(a1, b1, *main, delta);
        if (r.is_zero()) break;
        if (r.degree_in(*main) == 0) {
            b1 = Poly::constant(1);
            break;
        }
        a1 = std::move(b1);
        Poly div = g;
        for (int k = 0; k < delta; ++k) div = div * h;
        std::optional<Poly> q = r.divide_exact(div);
        if (q) {
            b1 = std::move(*q);
        } else {
            // should not happen; content removal keeps the sequence correct
            Poly rc = detail::content_in(r, *main);
            b1 = *r.divide_exact(rc);
        }
        g = detail::coeffs_in(a1, *main).rbegin()->second;
        if (delta > 0) {
            Poly hn = g;
            for (int k = 1; k < delta; ++k) hn = hn * g;
            Poly hd = Poly::constant(1);
            for (int k = 1; k < delta; ++k) hd = hd * h;
            std::optional<Poly> hq = hn.divide_exact(hd);
            h = hq ? std::move(*hq) : std::move(hn);
        }
    }

    // b1 is the last nonzero remainder, similar to the gcd up to content.
    if (b1.degree_in(*main) == 0) return cg.primitive_part().term_times(mc, 1);
    Poly cc = detail::content_in(b1, *main);
    Poly cand = b1.divide_exact(cc)->primitive_part();
    // the verification keeps the result sound even if the sequence degraded;
    // a missed cancellation only leaves num/den less reduced
    if (!pa.divide_exact(cand) || !pb.divide_exact(cand)) cand = Poly::constant(1);
    return (cand * cg).primitive_part().term_times(mc, 1);
}

}  // namespace redmod
