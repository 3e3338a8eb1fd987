// redmod: singularity analysis of vector-field modules attached to
// differential functions. This file is plumbing only: it loads inputs,
// builds a context, calls the library, and prints one JSON document.

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include <redmod/io.hpp>
#include <redmod/redmod.hpp>

namespace {

using json = nlohmann::json;
using namespace redmod;

// Expression-valued options accept either a file path or inline text.
std::string load_text(const std::string& value) {
    std::error_code ec;
    if (!value.empty() && std::filesystem::is_regular_file(value, ec)) {
        std::ifstream in(value);
        if (!in) throw error("InvalidInput", "cannot read " + value);
        std::ostringstream ss;
        ss << in.rdbuf();
        std::string s = ss.str();
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
        return s;
    }
    return value;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error("InvalidInput", "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const std::exception& ex) {
        throw error("InvalidInput", path + ": " + ex.what());
    }
}

// What the input texts reveal about the context when the user does not spell
// it out: the width of u[...] jet indices, the largest x<k> subscript, and
// whether "t" occurs as a standalone name.
struct ContextHints {
    int jet_width = 0;
    int max_x = 0;
    bool has_t = false;
};

void scan_hints(const std::string& text, ContextHints& h) {
    static const std::regex ident_re("[A-Za-z_][A-Za-z_0-9]*");
    for (auto it = std::sregex_iterator(text.begin(), text.end(), ident_re);
         it != std::sregex_iterator(); ++it) {
        const std::string tok = it->str();
        if (tok == "t") h.has_t = true;
        else if (tok == "x") h.max_x = std::max(h.max_x, 1);
        else if (tok.size() > 1 && tok[0] == 'x' &&
                 std::all_of(tok.begin() + 1, tok.end(),
                             [](unsigned char c) { return std::isdigit(c); }))
            h.max_x = std::max(h.max_x, std::stoi(tok.substr(1)));
    }
    static const std::regex jet_re("u\\s*\\[([^\\]]*)\\]");
    for (auto it = std::sregex_iterator(text.begin(), text.end(), jet_re);
         it != std::sregex_iterator(); ++it) {
        const std::string inner = (*it)[1].str();
        if (inner.find_first_not_of(" \t") == std::string::npos) continue;
        int width = 1 + static_cast<int>(std::count(inner.begin(), inner.end(), ','));
        h.jet_width = std::max(h.jet_width, width);
    }
}

struct Common {
    std::string context_file;
    int n = 0;
    int r = k_max_jet_order;
    bool time_alias = false;
    std::vector<std::string> symbol_flags;
    std::uint64_t seed = 0x5eed0001u;
    std::size_t max_nodes = 2'000'000;
    bool pretty = false;
    bool compact = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--context", c.context_file,
                    "context JSON file {n, r, time_alias, symbols}; overrides inference");
    cmd->add_option("--n", c.n, "number of independent variables (inferred from inputs when omitted)");
    cmd->add_option("--r", c.r, "jet order bound for parsing (default 12)");
    cmd->add_flag("--time", c.time_alias,
                  "name slot 1 \"t\" (set automatically when \"t\" appears in an input)");
    cmd->add_option("--symbol", c.symbol_flags,
                    "declare a free symbol, NAME[:nonzero][:positive]; repeatable");
    cmd->add_option("--seed", c.seed, "seed for the probabilistic zero test");
    cmd->add_option("--max-nodes", c.max_nodes, "node budget for normalized expressions");
    CLI::Option* pretty = cmd->add_flag("--pretty", c.pretty, "indent the JSON report");
    cmd->add_flag("--json", c.compact, "compact single-line JSON (the default)")->excludes(pretty);
}

std::vector<SymbolDecl> parse_symbol_flags(const std::vector<std::string>& flags) {
    std::vector<SymbolDecl> out;
    for (const std::string& f : flags) {
        SymbolDecl d;
        std::stringstream ss(f);
        std::string part;
        bool first = true;
        while (std::getline(ss, part, ':')) {
            if (first) {
                d.name = part;
                first = false;
            } else if (part == "nonzero") {
                d.nonzero = true;
            } else if (part == "positive") {
                d.nonzero = true;
                d.positive = true;
            } else {
                throw error("InvalidInput", "unknown symbol attribute \"" + part + "\"");
            }
        }
        if (d.name.empty()) throw error("InvalidInput", "--symbol needs a name");
        out.push_back(std::move(d));
    }
    return out;
}

JetContext build_context(const Common& c, const std::vector<std::string>& texts,
                         const json* module_json) {
    if (!c.context_file.empty()) return io::context_from_json(load_json_file(c.context_file));
    ContextHints h;
    for (const std::string& t : texts) scan_hints(t, h);
    bool time_alias = c.time_alias || h.has_t;
    std::vector<SymbolDecl> symbols = parse_symbol_flags(c.symbol_flags);
    int n = c.n;
    if (module_json) {
        io::ModuleDecl decl = io::module_decl_from_json(*module_json);
        if (n == 0) n = decl.n;
        else if (n != decl.n) throw error("InvalidInput", "--n disagrees with the module file");
        for (const SymbolDecl& d : decl.symbols) {
            bool seen = false;
            for (const SymbolDecl& s : symbols) seen = seen || s.name == d.name;
            if (!seen) symbols.push_back(d);
        }
    }
    if (n == 0) n = std::max(h.jet_width, h.max_x + (time_alias ? 1 : 0));
    if (n == 0)
        throw error("InvalidInput", "cannot infer the number of variables; pass --n or --context");
    return JetContext(n, c.r, time_alias, std::move(symbols));
}

void apply_globals(const Common& c) {
    zero_test_seed().store(c.seed);
    max_expr_nodes().store(c.max_nodes);
}

void emit(const std::string& command, json payload, const Common& c) {
    std::cout << io::render(io::envelope(command, std::move(payload)), c.pretty);
}

std::vector<int> first_slots(int p) {
    std::vector<int> slots(p);
    for (int s = 1; s <= p; ++s) slots[s - 1] = s;
    return slots;
}

// Slots a Phi-family spans when the caller does not say: the spatial
// directions when slot 1 is time, otherwise every slot but the last.
std::vector<int> default_phi_slots(const JetContext& ctx) {
    std::vector<int> slots;
    if (ctx.time_alias()) {
        for (int s = 2; s <= ctx.n(); ++s) slots.push_back(s);
    } else {
        for (int s = 1; s < ctx.n(); ++s) slots.push_back(s);
    }
    if (slots.empty())
        throw error("InvalidInput", "no default family slots in one variable; pass --p");
    return slots;
}

Expr time_jet(const JetContext& ctx) {
    std::vector<int> e(ctx.n(), 0);
    e[0] = 1;
    return Expr(Indet::jet(MultiIndex(std::move(e))));
}

QLKind kind_from_string(const std::string& s) {
    if (s == "elliptic") return QLKind::elliptic;
    if (s == "evolution") return QLKind::evolution;
    if (s == "wave") return QLKind::wave;
    throw error("InvalidInput", "\"kind\" must be elliptic, evolution, or wave");
}

std::vector<Expr> parse_expr_array(const json& arr, std::size_t want, const JetContext& ctx,
                                   const char* what) {
    if (!arr.is_array() || arr.size() != want)
        throw error("InvalidInput", std::string(what) + " must be an array of " +
                                        std::to_string(want) + " expressions");
    std::vector<Expr> out;
    for (const auto& e : arr) out.push_back(parse_expr(e.get<std::string>(), ctx));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"singularity analysis of vector-field modules for differential functions"};
    app.require_subcommand(1);

    // ------------------------------------------------------------- sco ---
    Common sco_c;
    struct {
        std::string eq, module_file;
    } sco_a;
    CLI::App* sco = app.add_subcommand(
        "sco", "strong and weak singularity co-orders of a module for an equation");
    add_common(sco, sco_c);
    sco->add_option("--eq", sco_a.eq, "equation (text or file)")->required();
    sco->add_option("--module", sco_a.module_file, "module JSON file")->required();
    sco->callback([&] {
        apply_globals(sco_c);
        json mj = load_json_file(sco_a.module_file);
        std::string eq = load_text(sco_a.eq);
        JetContext ctx = build_context(sco_c, {eq, mj.dump()}, &mj);
        VFModule m = io::module_from_json(mj, ctx);
        SingularityReport rep = weak_coorder(parse_expr(eq, ctx), m, ctx);
        json out = io::singularity_out(rep, ctx);
        out["module"] = io::module_out(m, ctx);
        emit("sco", std::move(out), sco_c);
    });

    // -------------------------------------------------- check-reduction ---
    Common chk_c;
    struct {
        std::string eq, module_file, phi;
        int p = 0;
    } chk_a;
    CLI::App* chk = app.add_subcommand("check-reduction",
                                       "decide whether a module reduces an equation");
    add_common(chk, chk_c);
    chk->add_option("--eq", chk_a.eq, "equation (text or file)")->required();
    chk->add_option("--module", chk_a.module_file, "module JSON file");
    chk->add_option("--phi", chk_a.phi, "invariant Phi(x, u); its family is the module");
    chk->add_option("--p", chk_a.p, "with --phi: span slots 1..p instead of the default family");
    chk->callback([&] {
        apply_globals(chk_c);
        if (chk_a.module_file.empty() == chk_a.phi.empty())
            throw error("InvalidInput", "pass exactly one of --module and --phi");
        std::string eq = load_text(chk_a.eq);
        std::optional<json> mj;
        std::vector<std::string> texts{eq};
        if (!chk_a.module_file.empty()) {
            mj = load_json_file(chk_a.module_file);
            texts.push_back(mj->dump());
        } else {
            texts.push_back(load_text(chk_a.phi));
        }
        JetContext ctx = build_context(chk_c, texts, mj ? &*mj : nullptr);
        VFModule m = mj ? io::module_from_json(*mj, ctx)
                        : phi_family_member(parse_expr(load_text(chk_a.phi), ctx),
                                            chk_a.p > 0 ? first_slots(chk_a.p)
                                                        : default_phi_slots(ctx),
                                            ctx);
        ReductionVerdict v = conditional_invariance_check(parse_expr(eq, ctx), m, ctx);
        json out = io::verdict_out(v, ctx);
        out["module"] = io::module_out(m, ctx);
        emit("check-reduction", std::move(out), chk_c);
    });

    // ---------------------------------------------------------- reduce ---
    Common red_c;
    struct {
        std::string eq, slots;
        int p = 0;
    } red_a;
    CLI::App* red = app.add_subcommand(
        "reduce", "reduce an equation under a module of coordinate shifts");
    add_common(red, red_c);
    red->add_option("--eq", red_a.eq, "equation (text or file)")->required();
    red->add_option("--p", red_a.p, "shift along slots 1..p");
    red->add_option("--slots", red_a.slots, "comma-separated slot list, e.g. \"1,3\"");
    red->callback([&] {
        apply_globals(red_c);
        if ((red_a.p > 0) == !red_a.slots.empty())
            throw error("InvalidInput", "pass exactly one of --p and --slots");
        std::string eq = load_text(red_a.eq);
        JetContext ctx = build_context(red_c, {eq}, nullptr);
        std::vector<int> checked;
        if (red_a.p > 0) {
            checked = first_slots(red_a.p);
        } else {
            std::stringstream ss(red_a.slots);
            std::string part;
            while (std::getline(ss, part, ',')) checked.push_back(std::stoi(part));
        }
        ShiftReduction rep = reduce_shift_module(parse_expr(eq, ctx), checked, ctx);
        json out = io::shift_out(rep, ctx);
        out["checked_slots"] = checked;
        emit("reduce", std::move(out), red_c);
    });

    // ----------------------------------------------------- ndim-reduce ---
    Common ndr_c;
    struct {
        std::string eq, phi, psi, param = "kappa";
    } ndr_a;
    CLI::App* ndr = app.add_subcommand(
        "ndim-reduce", "reduce through an invariant Phi whose family spans every direction");
    add_common(ndr, ndr_c);
    ndr->add_option("--eq", ndr_a.eq, "equation (text or file)")->required();
    ndr->add_option("--phi", ndr_a.phi, "invariant Phi(x, u)")->required();
    ndr->add_option("--psi", ndr_a.psi, "inverse: u = Psi(x, PARAM) with Phi(x, Psi) = PARAM");
    ndr->add_option("--param", ndr_a.param, "level parameter name used in --psi (default kappa)");
    ndr->callback([&] {
        apply_globals(ndr_c);
        Common c = ndr_c;
        if (!ndr_a.psi.empty()) c.symbol_flags.push_back(ndr_a.param);
        std::string eq = load_text(ndr_a.eq);
        std::string phi = load_text(ndr_a.phi);
        std::string psi = load_text(ndr_a.psi);
        JetContext ctx = build_context(c, {eq, phi, psi}, nullptr);
        std::optional<std::pair<Expr, Expr>> inverse;
        if (!ndr_a.psi.empty())
            inverse = std::make_pair(parse_expr(psi, ctx), parse_expr(ndr_a.param, ctx));
        AlgebraicReduction rep =
            ndim_reduce(parse_expr(eq, ctx), parse_expr(phi, ctx), ctx, inverse);
        emit("ndim-reduce", io::algebraic_out(rep, ctx), ndr_c);
    });

    // ---------------------------------------------------------- deteqs ---
    Common det_c;
    struct {
        std::string eq, phi;
        std::vector<std::string> eta;
    } det_a;
    CLI::App* det = app.add_subcommand(
        "deteqs", "determining system of an eta-tuple or a Phi-family for an evolution equation");
    add_common(det, det_c);
    det->add_option("--eq", det_a.eq, "evolution equation u_t - H (text or file)")->required();
    det->add_option("--eta", det_a.eta,
                    "one eta(t, x, u) per spatial direction; repeat or separate with ';'");
    det->add_option("--phi", det_a.phi, "invariant Phi(t, x, u); etas are derived from it");
    det->callback([&] {
        apply_globals(det_c);
        if (det_a.eta.empty() == det_a.phi.empty())
            throw error("InvalidInput", "pass exactly one of --eta and --phi");
        std::string eq = load_text(det_a.eq);
        std::vector<std::string> eta_texts;
        for (const std::string& chunk : det_a.eta) {
            std::stringstream ss(load_text(chunk));
            std::string part;
            while (std::getline(ss, part, ';'))
                if (part.find_first_not_of(" \t") != std::string::npos) eta_texts.push_back(part);
        }
        std::vector<std::string> texts{eq, load_text(det_a.phi)};
        texts.insert(texts.end(), eta_texts.begin(), eta_texts.end());
        JetContext ctx = build_context(det_c, texts, nullptr);
        EvolutionEquation e = make_evolution(time_jet(ctx) - parse_expr(eq, ctx), ctx);
        json out;
        std::vector<Expr> eta;
        if (!det_a.phi.empty()) {
            PhiEvolutionReport pr =
                phi_residual_evolution(e, parse_expr(load_text(det_a.phi), ctx), ctx);
            eta = pr.eta;
            out["phi"] = io::phi_evolution_out(pr, ctx);
        } else {
            for (const std::string& s : eta_texts) eta.push_back(parse_expr(s, ctx));
        }
        DeterminingSystem ds = determining_system_evolution(e, eta, ctx);
        TildeExtension te = tilde_extension(e, eta, ctx);
        out.update(io::determining_out(ds, ctx));
        out["tilde_extension"] = io::tilde_out(te, ctx);
        emit("deteqs", std::move(out), det_c);
    });

    // -------------------------------------------------------- coorder1 ---
    Common co1_c;
    struct {
        std::string eq, phi;
    } co1_a;
    CLI::App* co1 = app.add_subcommand(
        "coorder1", "co-order-one reduction: G and the residual for a Phi-family");
    add_common(co1, co1_c);
    co1->add_option("--eq", co1_a.eq, "equation in hat-order-one reduced form (text or file)")
        ->required();
    co1->add_option("--phi", co1_a.phi, "invariant Phi(x, u)")->required();
    co1->callback([&] {
        apply_globals(co1_c);
        std::string eq = load_text(co1_a.eq);
        std::string phi = load_text(co1_a.phi);
        JetContext ctx = build_context(co1_c, {eq, phi}, nullptr);
        Coorder1Report rep = coorder1_G(parse_expr(eq, ctx), parse_expr(phi, ctx), ctx);
        emit("coorder1", io::coorder1_out(rep, ctx), co1_c);
    });

    // -------------------------------------------------------- classify ---
    Common cls_c;
    struct {
        std::string input, phi1, phi2;
        int samples = 10;
    } cls_a;
    CLI::App* cls = app.add_subcommand(
        "classify", "second-order quasi-linear analysis from a JSON description");
    add_common(cls, cls_c);
    cls->add_option("--input", cls_a.input,
                    "JSON file {kind, a, b, module?, tau?, eta?, phi1?, phi2?, context?}")
        ->required();
    cls->add_option("--phi1", cls_a.phi1, "first invariant of an evolution-case pair");
    cls->add_option("--phi2", cls_a.phi2, "second invariant of an evolution-case pair");
    cls->add_option("--sample-count", cls_a.samples,
                    "sample points for the definiteness certificate (default 10)");
    cls->callback([&] {
        apply_globals(cls_c);
        json in = load_json_file(cls_a.input);
        if (!in.is_object() || !in.contains("kind") || !in.contains("a"))
            throw error("InvalidInput", "classify input needs \"kind\" and \"a\"");
        QLKind kind = kind_from_string(in.at("kind").get<std::string>());
        std::string phi1 = load_text(!cls_a.phi1.empty() ? cls_a.phi1 : in.value("phi1", ""));
        std::string phi2 = load_text(!cls_a.phi2.empty() ? cls_a.phi2 : in.value("phi2", ""));
        JetContext ctx = [&] {
            if (in.contains("context")) return io::context_from_json(in.at("context"));
            Common c = cls_c;
            if (c.n == 0)
                c.n = static_cast<int>(in.at("a").size()) + (kind == QLKind::elliptic ? 0 : 1);
            c.time_alias = c.time_alias || kind != QLKind::elliptic;
            std::optional<json> mj;
            if (in.contains("module")) mj = in.at("module");
            return build_context(c, {in.dump(), phi1, phi2}, mj ? &*mj : nullptr);
        }();
        QuasiLinear2 q = make_quasilinear2(
            kind, io::matrix_from_json(in.at("a"), ctx),
            parse_expr(in.value("b", std::string("0")), ctx), ctx, cls_a.samples);
        Expr L = quasilinear_lhs(q, ctx);
        json out{{"kind", in.at("kind").get<std::string>()}, {"lhs", ctx.print(L)}};
        if (in.contains("module")) {
            VFModule m = io::module_from_json(in.at("module"), ctx);
            if (kind == QLKind::elliptic) {
                EllipticReport rep = elliptic_coorder(q, m, ctx);
                out["singularity"] = io::singularity_out(rep.base, ctx);
                out["a_hat"] = io::matrix_out(rep.a_hat, ctx);
            } else {
                out["singularity"] = io::singularity_out(weak_coorder(L, m, ctx), ctx);
            }
            out["module"] = io::module_out(m, ctx);
        }
        if (kind == QLKind::wave && in.contains("tau") && in.contains("eta")) {
            std::size_t spatial = static_cast<std::size_t>(ctx.n()) - 1;
            std::vector<Expr> tau = parse_expr_array(in.at("tau"), spatial, ctx, "\"tau\"");
            std::vector<Expr> eta = parse_expr_array(in.at("eta"), spatial, ctx, "\"eta\"");
            out["conditions"] = io::expr_list(wave_singularity_condition(q, tau, eta, ctx), ctx);
        }
        if (!phi1.empty() && !phi2.empty()) {
            VFModule pm = phi_pair_module(parse_expr(phi1, ctx), parse_expr(phi2, ctx), ctx);
            out["phi_pair_module"] = io::module_out(pm, ctx);
            out["phi_pair_singularity"] = io::singularity_out(weak_coorder(L, pm, ctx), ctx);
        }
        emit("classify", std::move(out), cls_c);
    });

    // --------------------------------------------------------- eiconal ---
    Common eic_c;
    struct {
        std::string a, psi;
    } eic_a;
    CLI::App* eic = app.add_subcommand(
        "eiconal", "characteristic-surface residual of Psi for a wave equation");
    add_common(eic, eic_c);
    eic->add_option("--a", eic_a.a, "\"identity\", a JSON matrix file, or inline JSON")->required();
    eic->add_option("--psi", eic_a.psi, "surface function Psi(t, x)")->required();
    eic->callback([&] {
        apply_globals(eic_c);
        std::string psi = load_text(eic_a.psi);
        std::string atext = load_text(eic_a.a);
        Common c = eic_c;
        c.time_alias = true;
        std::optional<json> amat;
        if (atext != "identity") {
            try {
                amat = json::parse(atext);
            } catch (const std::exception& ex) {
                throw error("InvalidInput", std::string("--a: ") + ex.what());
            }
            if (c.n == 0) c.n = static_cast<int>(amat->size()) + 1;
        }
        JetContext ctx = build_context(c, {psi, amat ? amat->dump() : std::string()}, nullptr);
        if (!amat) {
            json rows = json::array();
            for (int i = 1; i < ctx.n(); ++i) {
                json row = json::array();
                for (int j = 1; j < ctx.n(); ++j) row.push_back(i == j ? "1" : "0");
                rows.push_back(std::move(row));
            }
            amat = std::move(rows);
        }
        QuasiLinear2 q =
            make_quasilinear2(QLKind::wave, io::matrix_from_json(*amat, ctx), Expr(0), ctx);
        Expr psi_e = parse_expr(psi, ctx);
        Expr res = eiconal_residual(q, psi_e, ctx);
        bool zero = is_zero(res);
        json out{{"residual", ctx.print(res)}, {"zero", zero}};
        out["module"] = zero ? io::module_out(meta_module_from_eiconal(q, psi_e, ctx), ctx) : json();
        emit("eiconal", std::move(out), eic_c);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: InternalError: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
