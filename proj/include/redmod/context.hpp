#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "redmod/expr.hpp"

namespace redmod {

// Hard ceiling for jet order growth during total differentiation.
inline constexpr int k_max_jet_order = 12;

struct SymbolDecl {
    std::string name;
    bool nonzero = false;
    bool positive = false;
};

// Naming and validation scope for one analysis: n independent variables in
// slots 1..n, an optional time alias (slot 1 prints and parses as "t"), a
// default jet order, and the declared free symbols.
class JetContext {
public:
    JetContext(int n, int r = 2, bool time_alias = false, std::vector<SymbolDecl> symbols = {})
        : n_(n), r_(r), time_alias_(time_alias) {
        if (n < 1) throw error("InvalidContext", "need at least one independent variable");
        if (r < 0 || r > k_max_jet_order)
            throw error("InvalidContext", "jet order out of range [0, " + std::to_string(k_max_jet_order) + "]");
        for (auto& s : symbols) {
            if (s.name.empty() || s.name == "u" || s.name == "t" || s.name == "exp" || s.name[0] == 'x')
                throw error("InvalidContext", "symbol name '" + s.name + "' collides with the core grammar");
            symbols_.push_back(std::make_shared<const SymbolInfo>(SymbolInfo{s.name, s.nonzero, s.positive}));
        }
    }

    int n() const { return n_; }
    int r() const { return r_; }
    bool time_alias() const { return time_alias_; }

    std::vector<std::string> coord_names() const {
        std::vector<std::string> out;
        for (int s = 1; s <= n_; ++s) out.push_back(coord_name(s));
        return out;
    }
    std::string coord_name(int slot) const {
        if (time_alias_) return slot == 1 ? "t" : "x" + std::to_string(slot - 1);
        return "x" + std::to_string(slot);
    }

    // Name -> indeterminate; coordinates, u, and declared symbols.
    std::optional<Indet> resolve(const std::string& name) const {
        if (name == "u") return Indet::dependent();
        if (time_alias_) {
            if (name == "t" || name == "x0") return Indet::coordinate(1);
            if (name == "x" && n_ == 2) return Indet::coordinate(2);
        }
        if (name.size() >= 2 && name[0] == 'x') {
            bool digits = true;
            for (std::size_t i = 1; i < name.size(); ++i) digits = digits && std::isdigit(name[i]);
            if (digits) {
                int k = std::stoi(name.substr(1));
                int slot = time_alias_ ? k + 1 : k;
                if (slot >= 1 && slot <= n_) return Indet::coordinate(slot);
                return std::nullopt;
            }
        }
        for (auto& s : symbols_)
            if (s->name == name) return Indet::symbol(s);
        return std::nullopt;
    }

    Indet jet_var(MultiIndex alpha) const {
        if (alpha.size() != n_)
            throw error("InvalidMultiIndex",
                        "jet index has " + std::to_string(alpha.size()) + " entries, context has n = " +
                            std::to_string(n_));
        if (alpha.order() > k_max_jet_order)
            throw resource_limit("jet order " + std::to_string(alpha.order()) + " exceeds the cap " +
                                 std::to_string(k_max_jet_order));
        return Indet::jet(std::move(alpha));
    }

    Expr coordinate(int slot) const { return Expr(Indet::coordinate(slot)); }
    Expr dependent() const { return Expr(Indet::dependent()); }
    Expr jet(const MultiIndex& alpha) const { return Expr(jet_var(alpha)); }
    Expr jet(std::vector<int> entries) const { return Expr(jet_var(MultiIndex(std::move(entries)))); }

    std::string print(const Expr& e) const {
        auto names = coord_names();
        return print_expr(e, &names);
    }

    const std::vector<std::shared_ptr<const SymbolInfo>>& symbols() const { return symbols_; }

private:
    int n_;
    int r_;
    bool time_alias_;
    std::vector<std::shared_ptr<const SymbolInfo>> symbols_;
};

}  // namespace redmod
