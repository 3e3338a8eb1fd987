#pragma once

#include <memory>
#include <string>
#include <utility>

#include "redmod/multiindex.hpp"

namespace redmod {

struct ExprData;  // completed in expr.hpp

struct SymbolInfo {
    std::string name;
    bool nonzero = false;
    bool positive = false;
};

// One algebraic indeterminate of the coefficient ring: a coordinate x_i, the
// dependent variable u, a jet variable u_alpha, a declared free symbol, or an
// opaque exponential atom exp(arg). Exponential atoms compare through a
// serialized form of their canonical argument, so exp(a) and exp(b) coincide
// exactly when a - b normalizes to zero. They carry no other relations.
class Indet {
public:
    enum class Kind : int { coordinate = 0, dependent = 1, jet = 2, symbol = 3, exp_atom = 4 };

    static Indet coordinate(int slot) {
        Indet v(Kind::coordinate);
        v.coord_ = slot;
        return v;
    }
    static Indet dependent() { return Indet(Kind::dependent); }
    static Indet jet(MultiIndex alpha) {
        if (alpha.order() == 0) return dependent();
        Indet v(Kind::jet);
        v.jet_ = std::move(alpha);
        return v;
    }
    static Indet symbol(std::shared_ptr<const SymbolInfo> info) {
        Indet v(Kind::symbol);
        v.sym_ = std::move(info);
        return v;
    }
    // Built by Expr::exp_atom, which computes the canonical key.
    static Indet exp_raw(std::shared_ptr<const ExprData> arg, std::shared_ptr<const std::string> key) {
        Indet v(Kind::exp_atom);
        v.exp_arg_ = std::move(arg);
        v.exp_key_ = std::move(key);
        return v;
    }

    Kind kind() const { return kind_; }
    bool is_jet_like() const { return kind_ == Kind::dependent || kind_ == Kind::jet; }
    int coord_slot() const { return coord_; }
    const MultiIndex& jet_index() const { return jet_; }
    const SymbolInfo& symbol_info() const { return *sym_; }
    const std::shared_ptr<const ExprData>& exp_arg() const { return exp_arg_; }
    const std::string& exp_key() const { return *exp_key_; }

private:
    explicit Indet(Kind k) : kind_(k) {}

    Kind kind_;
    int coord_ = 0;
    MultiIndex jet_;
    std::shared_ptr<const SymbolInfo> sym_;
    std::shared_ptr<const ExprData> exp_arg_;
    std::shared_ptr<const std::string> exp_key_;
};

inline int compare(const Indet& a, const Indet& b) {
    if (a.kind() != b.kind()) return static_cast<int>(a.kind()) < static_cast<int>(b.kind()) ? -1 : 1;
    switch (a.kind()) {
        case Indet::Kind::coordinate:
            return a.coord_slot() == b.coord_slot() ? 0 : (a.coord_slot() < b.coord_slot() ? -1 : 1);
        case Indet::Kind::dependent:
            return 0;
        case Indet::Kind::jet:
            return compare(a.jet_index(), b.jet_index());
        case Indet::Kind::symbol:
            return a.symbol_info().name.compare(b.symbol_info().name) < 0
                       ? -1
                       : (a.symbol_info().name == b.symbol_info().name ? 0 : 1);
        case Indet::Kind::exp_atom:
            return a.exp_key().compare(b.exp_key()) < 0 ? -1 : (a.exp_key() == b.exp_key() ? 0 : 1);
    }
    return 0;
}

inline bool operator==(const Indet& a, const Indet& b) { return compare(a, b) == 0; }
inline bool operator!=(const Indet& a, const Indet& b) { return compare(a, b) != 0; }
inline bool operator<(const Indet& a, const Indet& b) { return compare(a, b) < 0; }

}  // namespace redmod
