#pragma once

// JSON bridge for the command line tool: context, module, and coefficient
// input plus report serialization. nlohmann::json stores object keys in a
// std::map, so a serialized report is byte-identical across runs with the
// same input.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "redmod/classify2.hpp"
#include "redmod/context.hpp"
#include "redmod/errors.hpp"
#include "redmod/evolution.hpp"
#include "redmod/expr.hpp"
#include "redmod/manifold.hpp"
#include "redmod/parser.hpp"
#include "redmod/reduction.hpp"
#include "redmod/vfmod.hpp"

namespace redmod::io {

using nlohmann::json;

// ---------------------------------------------------------------- input ---

inline std::vector<SymbolDecl> symbols_from_json(const json& arr) {
    std::vector<SymbolDecl> out;
    if (arr.is_null()) return out;
    if (!arr.is_array()) throw error("InvalidInput", "\"symbols\" must be an array");
    for (const auto& s : arr) {
        if (!s.is_object() || !s.contains("name"))
            throw error("InvalidInput", "each symbol entry needs a \"name\"");
        SymbolDecl d;
        d.name = s.at("name").get<std::string>();
        d.nonzero = s.value("nonzero", false);
        d.positive = s.value("positive", false);
        out.push_back(std::move(d));
    }
    return out;
}

inline JetContext context_from_json(const json& j) {
    if (!j.is_object() || !j.contains("n"))
        throw error("InvalidInput", "context must be an object with at least \"n\"");
    int n = j.at("n").get<int>();
    int r = j.value("r", k_max_jet_order);
    bool time_alias = j.value("time_alias", false);
    return JetContext(n, r, time_alias, symbols_from_json(j.value("symbols", json())));
}

// The part of a module file a caller needs before a context exists: the
// dimension and the symbol declarations.
struct ModuleDecl {
    int n = 0;
    std::vector<SymbolDecl> symbols;
};

inline ModuleDecl module_decl_from_json(const json& j) {
    if (!j.is_object() || !j.contains("n"))
        throw error("InvalidInput", "module must be an object with \"n\" and \"fields\"");
    return ModuleDecl{j.at("n").get<int>(), symbols_from_json(j.value("symbols", json()))};
}

inline VFModule module_from_json(const json& j, const JetContext& ctx) {
    if (!j.is_object() || !j.contains("fields"))
        throw error("InvalidInput", "module must be an object with a \"fields\" array");
    if (j.contains("n") && j.at("n").get<int>() != ctx.n())
        throw error("InvalidInput", "module dimension does not match the context");
    const json& arr = j.at("fields");
    if (!arr.is_array() || arr.empty())
        throw error("InvalidInput", "\"fields\" must be a non-empty array");
    std::vector<VectorField> fields;
    for (const auto& f : arr) {
        if (!f.is_object() || !f.contains("xi") || !f.contains("eta"))
            throw error("InvalidInput", "each field needs \"xi\" and \"eta\"");
        const json& xi_arr = f.at("xi");
        if (!xi_arr.is_array() || static_cast<int>(xi_arr.size()) != ctx.n())
            throw error("InvalidInput", "each field needs exactly n entries in \"xi\"");
        std::vector<Expr> xi;
        for (const auto& c : xi_arr) xi.push_back(parse_expr(c.get<std::string>(), ctx));
        fields.push_back(VectorField(std::move(xi), parse_expr(f.at("eta").get<std::string>(), ctx)));
    }
    return VFModule(std::move(fields));
}

inline std::vector<std::vector<Expr>> matrix_from_json(const json& j, const JetContext& ctx) {
    if (!j.is_array() || j.empty()) throw error("InvalidInput", "coefficient matrix must be a non-empty array of rows");
    std::vector<std::vector<Expr>> a;
    for (const auto& row : j) {
        if (!row.is_array() || row.size() != j.size())
            throw error("InvalidInput", "coefficient matrix must be square");
        std::vector<Expr> r;
        for (const auto& c : row) r.push_back(parse_expr(c.get<std::string>(), ctx));
        a.push_back(std::move(r));
    }
    return a;
}

// --------------------------------------------------------------- output ---

inline json expr_list(const std::vector<Expr>& v, const JetContext& ctx) {
    json arr = json::array();
    for (const Expr& e : v) arr.push_back(ctx.print(e));
    return arr;
}

inline json opt_expr(const std::optional<Expr>& e, const JetContext& ctx) {
    return e ? json(ctx.print(*e)) : json();
}

inline json module_out(const VFModule& m, const JetContext& ctx) {
    json fields = json::array();
    for (const VectorField& f : m.fields) {
        json xi = json::array();
        for (const Expr& c : f.xi) xi.push_back(ctx.print(c));
        fields.push_back(json{{"xi", std::move(xi)}, {"eta", ctx.print(f.eta)}});
    }
    return json{{"n", m.n()}, {"fields", std::move(fields)}};
}

inline json matrix_out(const std::vector<std::vector<Expr>>& a, const JetContext& ctx) {
    json rows = json::array();
    for (const auto& row : a) rows.push_back(expr_list(row, ctx));
    return rows;
}

inline json singularity_out(const SingularityReport& rep, const JetContext& ctx) {
    return json{
        {"order", rep.r},
        {"strong_coorder", rep.strong_coorder},
        {"weak_coorder", rep.weak_coorder ? json(*rep.weak_coorder) : json()},
        {"ultra", rep.ultra},
        {"associated_function", ctx.print(rep.associated)},
        {"multiplier", opt_expr(rep.multiplier, ctx)},
        {"core", opt_expr(rep.core, ctx)},
        {"maximal_rank_certificate", rep.weak_exact},
        {"checked_slots", rep.checked},
    };
}

inline json meta_out(const MetaSingularityReport& rep, const JetContext& ctx) {
    json carriers = json::array();
    for (const MultiIndex& a : rep.carriers) carriers.push_back(a.e);
    return json{
        {"k", rep.k},
        {"special_variant", rep.special_variant},
        {"reduced", ctx.print(rep.reduced)},
        {"carriers", std::move(carriers)},
    };
}

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::holds: return "holds";
        case Verdict::fails: return "fails";
        default: return "unknown";
    }
}

inline json verdict_out(const ReductionVerdict& rep, const JetContext& ctx) {
    return json{
        {"verdict", verdict_name(rep.verdict)},
        {"is_reduction_module", rep.is_reduction_module},
        {"residuals", expr_list(rep.restricted_residuals, ctx)},
        {"leading_solve", rep.leading_solve},
        {"notes", rep.notes},
    };
}

inline json shift_out(const ShiftReduction& rep, const JetContext& ctx) {
    return json{
        {"reduced", ctx.print(rep.reduced)},
        {"system", expr_list(rep.system, ctx)},
        {"split", rep.split},
        {"reduced_order", rep.reduced_order},
    };
}

inline json algebraic_out(const AlgebraicReduction& rep, const JetContext& ctx) {
    json j{
        {"phi", ctx.print(rep.phi)},
        {"L_phi", ctx.print(rep.L_phi)},
        {"multiplier", ctx.print(rep.multiplier)},
        {"separation_residuals", expr_list(rep.separation_residuals, ctx)},
        {"separable", rep.separable},
        {"ultra", rep.ultra},
        {"zeta", opt_expr(rep.zeta, ctx)},
        {"note", rep.note},
    };
    j["module"] = rep.module ? module_out(*rep.module, ctx) : json();
    return j;
}

inline json determining_out(const DeterminingSystem& rep, const JetContext& ctx) {
    return json{
        {"involutivity_residuals", expr_list(rep.involutivity_residuals, ctx)},
        {"invariance_residuals", expr_list(rep.invariance_residuals, ctx)},
        {"tilde", ctx.print(rep.tilde)},
        {"involutive", rep.involutive},
        {"is_reduction_module", rep.is_reduction_module},
        {"notes", rep.notes},
    };
}

inline json phi_evolution_out(const PhiEvolutionReport& rep, const JetContext& ctx) {
    return json{
        {"eta", expr_list(rep.eta, ctx)},
        {"H_phi", ctx.print(rep.H_phi)},
        {"residual", ctx.print(rep.residual)},
        {"zero", rep.zero},
        {"chi_repairable", rep.chi_repairable},
        {"chi_residuals", expr_list(rep.chi_residuals, ctx)},
        {"invariance_identity_checks", expr_list(rep.identity_checks, ctx)},
    };
}

inline json tilde_out(const TildeExtension& rep, const JetContext& ctx) {
    json j{
        {"tilde", ctx.print(rep.tilde)},
        {"reduction_module", rep.reduction_module},
        {"tilde_involutive", rep.tilde_involutive},
        {"full_ultra", rep.full_ultra},
    };
    j["q_tilde"] = rep.q_tilde ? module_out(*rep.q_tilde, ctx) : json();
    return j;
}

inline json coorder1_out(const Coorder1Report& rep, const JetContext& ctx) {
    return json{
        {"eta", expr_list(rep.eta, ctx)},
        {"L_family", ctx.print(rep.L_family)},
        {"G", ctx.print(rep.G)},
        {"residual", ctx.print(rep.residual)},
        {"zero", rep.zero},
        {"chi_repairable", rep.chi_repairable},
        {"chi_residuals", expr_list(rep.chi_residuals, ctx)},
    };
}

inline json elliptic_out(const EllipticReport& rep, const JetContext& ctx) {
    return json{
        {"singularity", singularity_out(rep.base, ctx)},
        {"a_hat", matrix_out(rep.a_hat, ctx)},
    };
}

// Stamps the shared envelope keys onto a payload.
inline json envelope(const std::string& command, json payload) {
    payload["schema"] = "redmod/1";
    payload["command"] = command;
    return payload;
}

inline std::string render(const json& j, bool pretty) {
    return pretty ? j.dump(2) + "\n" : j.dump() + "\n";
}

}  // namespace redmod::io
