// Command layer behind the ws tool. Each command loads its fixtures, runs
// one stage of the library and returns a report: a JSON body that depends
// only on the inputs and the seed, a text table for humans, and an exit code
// (0 pass, 2 mathematical failure, 1 usage or IO error).
#ifndef WHITNEY_CLI_HPP
#define WHITNEY_CLI_HPP

#include "io.hpp"

#include <cstdlib>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>

namespace whitney::cli {

using io::json;

struct CommandArgs {
    std::map<std::string, std::string> files;  // input role -> path
    int max_iter = 16;
    double tol = 1e-9;
    std::optional<int> samples;
    int sphere_samples = 4000;
    int ladder = 24;
    bool force = false;  // patch: glue without the compatibility check
    std::string out;     // synthesize: where to write the fitted traces
    std::optional<std::uint64_t> seed_override;
};

struct RunReport {
    json body;
    std::string table;
    int exit_code = 0;
};

inline constexpr std::uint64_t default_seed = 12345;

// WS_SEED wins over the fixture's own seed.
inline std::optional<std::uint64_t> env_seed() {
    const char* s = std::getenv("WS_SEED");
    if (!s || !*s) return std::nullopt;
    char* end = nullptr;
    const auto v = std::strtoull(s, &end, 10);
    if (*end != '\0') throw std::invalid_argument("WS_SEED must be a nonnegative integer");
    return v;
}

namespace detail {

class Table {
public:
    void row(const std::string& key, const std::string& value) { rows_.push_back({key, value}); }
    template <class T>
    void row(const std::string& key, const T& v) {
        std::ostringstream os;
        os << std::setprecision(6) << v;
        row(key, os.str());
    }
    std::string str() const {
        std::size_t w = 0;
        for (const auto& r : rows_) w = std::max(w, r.first.size());
        std::ostringstream os;
        for (const auto& r : rows_) os << std::left << std::setw(static_cast<int>(w) + 2) << r.first << r.second << "\n";
        return os.str();
    }

private:
    std::vector<std::pair<std::string, std::string>> rows_;
};

inline json point_json(const Point& p) { return io::detail::vector_json(p); }

inline json fit_json(const DecayFit& f) { return json{{"slope", f.slope}, {"all_zero", f.all_zero}, {"samples", f.samples}}; }

inline const std::string& need(const CommandArgs& a, const std::string& role) {
    auto it = a.files.find(role);
    if (it == a.files.end() || it->second.empty()) throw std::invalid_argument("missing --" + role);
    return it->second;
}

inline io::FixtureSpec load(const CommandArgs& a, const std::string& role, const std::string& kind) {
    auto f = io::parse_spec(need(a, role));
    if (f.kind != kind) throw io::SchemaError(need(a, role) + ": expected a " + kind + " fixture, found " + f.kind);
    return f;
}

inline std::uint64_t seed_for(const CommandArgs& a, const io::FixtureSpec& f) {
    if (a.seed_override) return *a.seed_override;
    return f.meta.seed.value_or(default_seed);
}

inline std::string alpha_string(const MultiIndex& a) {
    std::string s = "(";
    for (std::size_t i = 0; i < a.size(); ++i) s += (i ? "," : "") + std::to_string(a[i]);
    return s + ")";
}

inline json cm_json(const CmReport& c) {
    json j{{"pass", c.pass}, {"flat_ok", c.flat_ok}, {"interior_ok", c.interior_ok}, {"worst_rel_error", c.worst_rel_error}};
    if (c.witness) j["witness_alpha"] = *c.witness;
    json fl = json::array();
    for (const auto& e : c.flatness)
        fl.push_back(json{{"alpha", e.alpha}, {"path", e.path}, {"target", e.target}, {"slope", e.fit.slope}, {"all_zero", e.fit.all_zero}, {"pass", e.pass}});
    j["flatness"] = fl;
    j["message"] = c.message;
    return j;
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline RunReport cmd_refine(const CommandArgs& a) {
    const auto f = detail::load(a, "input", "sampled-bundle");
    const auto b = io::to_bundle(f);
    RefinementParams rp;
    rp.offset_tol = a.tol;
    if (a.max_iter < 1) throw std::invalid_argument("--max-iter must be at least 1");
    const auto [refined, rep] = iterate_to_stability(b, a.max_iter, rp);
    RunReport out;
    json emptied = json::array();
    for (int i : rep.emptied_points) emptied.push_back(json{{"index", i}, {"at", detail::point_json(b.points[i])}});
    const bool pass = rep.emptied_points.empty() && rep.stable;
    out.body = json{{"iterations", rep.iterations},
                    {"stable", rep.stable},
                    {"cap_reached", rep.cap_reached},
                    {"emptied_points", emptied},
                    {"fiber_dims_before", rep.fiber_dims_before},
                    {"fiber_dims_after", rep.fiber_dims_after},
                    {"ill_conditioned", rep.ill_conditioned}};
    json offsets = json::array();
    for (const auto& fib : refined.fibers) offsets.push_back(fib.is_empty() ? json(nullptr) : io::detail::vector_json(std::vector<double>(fib.offset.data(), fib.offset.data() + fib.offset.size())));
    out.body["offsets_after"] = offsets;
    detail::Table t;
    t.row("fixture", f.name);
    t.row("points", b.size());
    t.row("iterations", rep.iterations);
    t.row("stable", rep.stable ? "yes" : "no");
    std::string em;
    for (int i : rep.emptied_points) em += (em.empty() ? "" : " ") + std::to_string(i);
    t.row("emptied points", em.empty() ? "none" : em);
    out.table = t.str();
    out.exit_code = pass ? 0 : 2;
    return out;
}

inline RunReport cmd_eliminate(const CommandArgs& a) {
    auto f = detail::load(a, "input", "param-system");
    if (a.samples) {
        auto& s = std::get<io::ParamSystemSpec>(f.payload).samples;
        if (s.kind == io::SampleSpec::Kind::points) throw std::invalid_argument("--samples does not apply to an explicit point list");
        if (*a.samples < (s.kind == io::SampleSpec::Kind::grid ? 2 : 1)) throw std::invalid_argument("--samples is too small");
        s.count = *a.samples;
    }
    const auto seed = detail::seed_for(a, f);
    const auto sys = io::to_param_system(f);
    const auto pts = io::sample_points(f, seed);
    const auto pieces = eliminate(sys, pts);
    const auto eq = verify_equivalence(sys, pieces, pts);
    const auto bundle = io::pointwise_bundle(sys, pts);

    int empty = 0, full = 0, degenerate = 0;
    std::map<int, int> dims;
    json empty_at = json::array(), degenerate_mismatch = json::array();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& fib = bundle.fibers[i];
        const bool deg = sys.coeff_at(pts[i]).cwiseAbs().maxCoeff() <= 1e-12;
        degenerate += deg;
        if (fib.is_empty()) {
            ++empty;
            empty_at.push_back(detail::point_json(pts[i]));
        } else {
            ++dims[fib.dim()];
            full += fib.dim() == sys.M;
        }
        // a full fiber should occur exactly on the degeneracy locus
        if (!fib.is_empty() && (fib.dim() == sys.M) != deg) degenerate_mismatch.push_back(detail::point_json(pts[i]));
    }
    json piece_list = json::array();
    for (const auto& p : pieces)
        piece_list.push_back(json{{"k", p.k}, {"points", p.points.size()}, {"perm", p.perm}, {"min_pivot", p.min_pivot}, {"bound_ok", p.bound_ok}});
    json dim_hist = json::object();
    for (const auto& [d, c] : dims) dim_hist[std::to_string(d)] = c;
    RunReport out;
    out.body = json{{"seed", seed},
                    {"samples", pts.size()},
                    {"pieces", piece_list},
                    {"equivalence", json{{"ok", eq.ok}, {"points_checked", eq.points_checked}, {"worst_residual", eq.worst_residual}, {"message", eq.message}}},
                    {"empty_fibers", empty},
                    {"empty_at", empty_at},
                    {"full_fibers", full},
                    {"degenerate_points", degenerate},
                    {"degeneracy_mismatch", degenerate_mismatch},
                    {"fiber_dims", dim_hist}};
    detail::Table t;
    t.row("fixture", f.name);
    t.row("samples", pts.size());
    t.row("pieces", pieces.size());
    t.row("equivalence", eq.ok ? "ok" : "FAILED: " + eq.message);
    t.row("worst residual", eq.worst_residual);
    t.row("empty fibers", empty);
    t.row("full fibers", full);
    t.row("degenerate points", degenerate);
    out.table = t.str();
    out.exit_code = eq.ok && empty == 0 && degenerate_mismatch.empty() ? 0 : 2;
    return out;
}

inline RunReport cmd_helly(const CommandArgs& a) {
    const auto f = detail::load(a, "input", "seminorm-family");
    const auto seed = detail::seed_for(a, f);
    const auto fam = io::to_family(f);
    SelectionParams sp;
    sp.sphere_samples = a.sphere_samples;
    sp.seed = seed;
    const auto sel = select_representatives(fam, sp);
    const auto dom = verify_domination(fam, sel, std::max(a.sphere_samples, 1000), seed + 1);
    RunReport out;
    out.body = json{{"seed", seed},
                    {"members", fam.members.size()},
                    {"selected", sel.indices},
                    {"L", sel.L},
                    {"C", sel.C},
                    {"sampled_ratio", sel.sampled_ratio},
                    {"degenerate", sel.degenerate},
                    {"verification", json{{"ok", dom.ok}, {"worst_ratio", dom.worst_ratio}, {"message", dom.message}}}};
    detail::Table t;
    t.row("fixture", f.name);
    t.row("members", fam.members.size());
    t.row("selected", sel.L);
    t.row("constant C", sel.C);
    t.row("verified ratio", dom.worst_ratio);
    t.row("domination", dom.ok ? "ok" : "FAILED");
    out.table = t.str();
    out.exit_code = dom.ok ? 0 : 2;
    return out;
}

inline CmVerifyInput strip_probe_input(const CuspRegion& R) {
    CmVerifyInput in;
    for (double c : {0.0, 0.25, 0.4, 0.5, 0.6, 0.75, 1.0})
        in.paths.push_back([R, c](double x) {
            const double lo = R.lower.evaluate(x), hi = R.upper.evaluate(x);
            return PlanePoint{x, lo + c * (hi - lo)};
        });
    const double x0 = 0.45 * R.delta;
    for (double x : {0.45 * x0, 0.65 * x0, x0})
        for (double c : {0.2, 0.45, 0.55, 0.8}) {
            const double lo = R.lower.evaluate(x), hi = R.upper.evaluate(x);
            in.interior.push_back({x, lo + c * (hi - lo)});
        }
    in.ladder.start = 0.5 * R.delta;
    return in;
}

inline RunReport cmd_patch(const CommandArgs& a) {
    const auto pf = detail::load(a, "plus", "field-piece");
    const auto mf = detail::load(a, "minus", "field-piece");
    const auto rf = detail::load(a, "region", "cusp-region");
    const int m = rf.m();
    if (pf.n() != 2 || mf.n() != 2 || pf.D() != 1 || mf.D() != 1) throw io::SchemaError("patch: pieces must be scalar fields in the plane");
    const auto Fp = io::to_field(pf).pieces().front();
    const auto Fm = io::to_field(mf).pieces().front();
    CuspRegion R = io::to_region(rf);
    const auto val = validate_region(R);
    if (!val.valid) throw io::SchemaError("region: " + val.reason);
    R.delta = val.delta_refined;
    const auto prof = make_cutoff(m + 1, m);
    RunReport out;
    const auto compat = compatibility_check(Fp, Fm, R, m);
    json terms = json::array();
    for (const auto& tm : compat.terms) terms.push_back(json{{"l", tm.l}, {"target", tm.target}, {"slope", tm.fit.slope}, {"all_zero", tm.fit.all_zero}, {"pass", tm.pass}});
    out.body["compatibility"] = json{{"pass", compat.pass}, {"failing_l", compat.failing_l}, {"terms", terms}, {"message", compat.message}};
    out.body["forced"] = a.force;
    detail::Table t;
    t.row("region", rf.name);
    t.row("m", m);
    t.row("compatibility", compat.pass ? "ok" : "FAILED: " + compat.message);
    if (!compat.pass && !a.force) {
        out.body["pass"] = false;
        out.table = t.str();
        out.exit_code = 2;
        return out;
    }
    const auto glued = patch_cusp_unchecked(Fp, Fm, R, prof);
    const auto cm = cm_verify(glued, strip_probe_input(R), m);
    out.body["delta"] = R.delta;
    out.body["cm"] = detail::cm_json(cm);
    out.body["pass"] = compat.pass && cm.pass;
    t.row("delta", R.delta);
    t.row("C^m check", cm.pass ? "ok" : "FAILED");
    if (cm.witness) t.row("witness alpha", detail::alpha_string(*cm.witness));
    out.table = t.str();
    out.exit_code = compat.pass && cm.pass ? 0 : 2;
    return out;
}

inline json trace_fits_json(const WedgeNormalForm& nf, const SelectionOutcome& sel) {
    json arr = json::array();
    for (int s = 0; s <= nf.smax(); ++s)
        for (int c = 0; c < nf.D; ++c)
            for (int l = 0; l <= nf.m; ++l) {
                const auto& fit = sel.fits[nf.index(s, c, l)];
                arr.push_back(json{{"curve", s}, {"component", c}, {"order", l}, {"series", io::puiseux_to_json(fit.series)}, {"ok", fit.ok}});
            }
    return arr;
}

inline RunReport cmd_synthesize(const CommandArgs& a) {
    const auto f = detail::load(a, "input", "wedge-normal-form");
    const auto nf = io::to_normal_form(f);
    PipelineParams p;
    if (a.ladder < 8) throw std::invalid_argument("--ladder must be at least 8");
    p.ladder_points = a.ladder;
    p.helly.seed = detail::seed_for(a, f);
    p.helly.sphere_samples = a.sphere_samples;
    const auto rep = run_pipeline(nf, p);
    RunReport out;
    out.body["seed"] = p.helly.seed;
    out.body["delta"] = rep.delta;
    out.body["estimates_ok"] = rep.estimates.ok;
    out.body["F_min_fit"] = detail::fit_json(rep.selection.F_min_fit);
    out.body["F_min"] = rep.selection.F_min;
    out.body["ladder"] = rep.selection.xs;
    out.body["nonexistence"] = json{{"found", rep.selection.nonexistence.found}, {"reason", rep.selection.nonexistence.reason}, {"x", rep.selection.nonexistence.x}};
    if (!rep.selection.fits.empty()) out.body["traces"] = trace_fits_json(nf, rep.selection);
    detail::Table t;
    t.row("fixture", f.name);
    t.row("delta", rep.delta);
    t.row("F_min decay", rep.selection.F_min_fit.all_zero ? std::string("identically zero") : std::to_string(rep.selection.F_min_fit.slope));
    if (rep.synthesis) {
        out.body["trace_error"] = rep.synthesis->trace_error;
        t.row("trace error", rep.synthesis->trace_error);
    }
    if (rep.section) {
        out.body["residuals"] = json{{"strip", rep.section->strip_residual}, {"curve", rep.section->curve_residual}, {"origin_flat", rep.section->origin_flat}};
        t.row("strip residual", rep.section->strip_residual);
        t.row("curve residual", rep.section->curve_residual);
        t.row("origin flat", rep.section->origin_flat ? "yes" : "no");
    }
    json cms = json::array();
    for (std::size_t c = 0; c < rep.cm.size(); ++c) {
        cms.push_back(detail::cm_json(rep.cm[c]));
        t.row("C^m component " + std::to_string(c), rep.cm[c].pass ? "ok" : "FAILED");
    }
    out.body["cm"] = cms;
    out.body["pass"] = rep.pass;
    out.body["message"] = rep.message;
    t.row("result", rep.pass ? std::string("section found") : rep.message);
    out.table = t.str();
    if (!a.out.empty()) {
        json doc{{"name", f.name}, {"delta", rep.delta}, {"pass", rep.pass}};
        doc["traces"] = rep.selection.fits.empty() ? json::array() : trace_fits_json(nf, rep.selection);
        std::ofstream os(a.out, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + a.out);
        os << doc.dump(2) << "\n";
    }
    out.exit_code = rep.pass ? 0 : 2;
    return out;
}

inline RunReport cmd_check(const CommandArgs& a) {
    // a parametric system stands for the order-0 bundle of its pointwise solution sets
    const auto bf = io::parse_spec(detail::need(a, "bundle"));
    if (bf.kind != "sampled-bundle" && bf.kind != "param-system")
        throw io::SchemaError(detail::need(a, "bundle") + ": expected a sampled-bundle or param-system fixture, found " + bf.kind);
    const auto ff = detail::load(a, "field", "field-piece");
    const auto b = bf.kind == "sampled-bundle" ? io::to_bundle(bf)
                                               : io::pointwise_bundle(io::to_param_system(bf), io::sample_points(bf, detail::seed_for(a, bf)));
    const auto F = io::to_field(ff);
    if (ff.n() != b.space.n || ff.D() != b.space.D) throw io::SchemaError("check: field and bundle disagree on n or D");
    const int m = b.space.m;
    const auto rep = verify_membership(b, [&](const Point& p) { return F.flat_jet(p, m); }, 1e-8);
    RunReport out;
    out.body = json{{"pass", rep.pass}, {"worst_distance", rep.worst_distance}, {"worst_point", rep.worst_point}, {"distances", rep.distances}};
    detail::Table t;
    t.row("bundle", bf.name);
    t.row("field", ff.name);
    t.row("points", b.size());
    t.row("worst distance", rep.worst_distance);
    if (rep.worst_point >= 0) t.row("worst point", rep.worst_point);
    t.row("membership", rep.pass ? "ok" : "FAILED");
    out.table = t.str();
    out.exit_code = rep.pass ? 0 : 2;
    return out;
}

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> c{"refine", "eliminate", "helly", "patch", "synthesize", "check"};
    return c;
}

// Usage, schema and IO problems become exit code 1 with the message in the
// table; the JSON body then holds only the error.
inline RunReport run_command(const std::string& cmd, const CommandArgs& args) {
    RunReport r;
    try {
        if (cmd == "refine") r = cmd_refine(args);
        else if (cmd == "eliminate") r = cmd_eliminate(args);
        else if (cmd == "helly") r = cmd_helly(args);
        else if (cmd == "patch") r = cmd_patch(args);
        else if (cmd == "synthesize") r = cmd_synthesize(args);
        else if (cmd == "check") r = cmd_check(args);
        else throw std::invalid_argument("unknown command " + cmd);
    } catch (const io::SchemaError& e) {
        return {json{{"command", cmd}, {"error", e.what()}}, std::string("error: ") + e.what() + "\n", 1};
    } catch (const std::invalid_argument& e) {
        return {json{{"command", cmd}, {"error", e.what()}}, std::string("error: ") + e.what() + "\n", 1};
    } catch (const std::runtime_error& e) {
        return {json{{"command", cmd}, {"error", e.what()}}, std::string("error: ") + e.what() + "\n", 1};
    }
    json body{{"command", cmd}, {"exit_code", r.exit_code}};
    body.update(r.body);
    r.body = body;
    return r;
}

}  // namespace whitney::cli

#endif
