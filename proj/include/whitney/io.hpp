// Fixture files. Every document is a JSON object
//   { "kind": ..., "name": ..., "metadata": {...}, "payload": {...} }
// with one payload layout per kind. Parsing validates the schema and reports
// the first violation with its JSON path (syntax errors with line and
// column); emitting writes the canonical form, so parse -> emit -> parse is
// the identity and shipped fixtures are stored canonically.
#ifndef WHITNEY_IO_HPP
#define WHITNEY_IO_HPP

#include "bundles.hpp"
#include "elimination.hpp"
#include "expr.hpp"
#include "helly.hpp"
#include "patching.hpp"
#include "pipeline.hpp"
#include "puiseux.hpp"

#include <json.hpp>

#include <fstream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace whitney::io {

using json = nlohmann::ordered_json;

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Scalars and series.

// Terminating decimals print as decimals, everything else as "a/b".
inline std::string rational_to_string(const rational& r) {
    using boost::multiprecision::cpp_int;
    const cpp_int num = boost::multiprecision::numerator(r), den = boost::multiprecision::denominator(r);
    cpp_int d = den;
    int twos = 0, fives = 0;
    while (d % 2 == 0) {
        d /= 2;
        ++twos;
    }
    while (d % 5 == 0) {
        d /= 5;
        ++fives;
    }
    if (d != 1) return num.str() + "/" + den.str();
    const int k = std::max(twos, fives);
    cpp_int p10 = 1;
    for (int i = 0; i < k; ++i) p10 *= 10;
    const cpp_int scaled = num * p10 / den;
    const bool neg = scaled < 0;
    std::string digits = (neg ? cpp_int(-scaled) : scaled).str();
    if (k > 0) {
        if (static_cast<int>(digits.size()) <= k) digits.insert(0, static_cast<std::size_t>(k + 1 - digits.size()), '0');
        digits.insert(digits.size() - static_cast<std::size_t>(k), ".");
    }
    return (neg ? "-" : "") + digits;
}

namespace detail {

inline const json& field(const json& j, const char* key, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path + ": expected an object");
    if (!j.contains(key)) throw SchemaError(path + ": missing \"" + key + "\"");
    return j.at(key);
}

inline void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& path) {
    for (const auto& [k, v] : j.items()) {
        bool known = false;
        for (const char* e : keys) known = known || k == e;
        if (!known) throw SchemaError(path + ": unknown key \"" + k + "\"");
    }
}

inline std::int64_t get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw SchemaError(path + ": expected an integer");
    return j.get<std::int64_t>();
}

inline double get_number(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        try {
            return static_cast<double>(parse_decimal(j.get<std::string>()));
        } catch (const std::exception&) {
        }
    }
    throw SchemaError(path + ": expected a number");
}

inline std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw SchemaError(path + ": expected a string");
    return j.get<std::string>();
}

inline const json& get_array(const json& j, const std::string& path) {
    if (!j.is_array()) throw SchemaError(path + ": expected an array");
    return j;
}

inline std::vector<double> get_vector(const json& j, const std::string& path) {
    std::vector<double> out;
    int i = 0;
    for (const auto& e : get_array(j, path)) out.push_back(get_number(e, path + "/" + std::to_string(i++)));
    return out;
}

inline json number_json(double v) {
    if (v == std::floor(v) && std::abs(v) < 9e15) return json(static_cast<std::int64_t>(v));
    return json(v);
}

inline json vector_json(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(number_json(x));
    return a;
}

}  // namespace detail

inline json puiseux_to_json(const Puiseux& p) {
    json a = json::array();
    const Puiseux c = p.canonical();
    for (const auto& [q, coef] : c.terms()) {
        const std::int64_t g = std::gcd(q < 0 ? -q : q, static_cast<std::int64_t>(c.N()));
        a.push_back(json{{"num", q / g}, {"den", c.N() / g}, {"coeff", rational_to_string(coef)}});
    }
    return a;
}

// Terms must be reduced, with positive denominators, nonzero coefficients
// and strictly increasing exponents.
inline Puiseux puiseux_from_json(const json& j, const std::string& path) {
    detail::get_array(j, path);
    std::vector<std::pair<rational, rational>> terms;
    std::int64_t N = 1;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string tp = path + "/" + std::to_string(i);
        detail::only_keys(j[i], {"num", "den", "coeff"}, tp);
        const std::int64_t num = detail::get_int(detail::field(j[i], "num", tp), tp + "/num");
        const std::int64_t den = detail::get_int(detail::field(j[i], "den", tp), tp + "/den");
        const std::string cs = detail::get_string(detail::field(j[i], "coeff", tp), tp + "/coeff");
        if (den < 1) throw SchemaError(tp + ": non-canonical Puiseux term (denominator must be positive)");
        if (std::gcd(num < 0 ? -num : num, den) != 1) throw SchemaError(tp + ": non-canonical Puiseux term (exponent not in lowest terms)");
        rational c;
        try {
            c = parse_decimal(cs);
        } catch (const std::exception&) {
            throw SchemaError(tp + "/coeff: not a decimal or fraction");
        }
        if (c == 0) throw SchemaError(tp + ": non-canonical Puiseux term (zero coefficient)");
        const rational e(num, den);
        if (!terms.empty() && e <= terms.back().first)
            throw SchemaError(tp + ": non-canonical Puiseux term (exponents must be strictly increasing)");
        terms.push_back({e, c});
        N = std::lcm(N, den);
    }
    Puiseux p(static_cast<int>(N));
    for (const auto& [e, c] : terms) {
        const rational q = e * N;
        p.add_term(static_cast<std::int64_t>(boost::multiprecision::numerator(q)), c);
    }
    return p.canonical();
}

// ---------------------------------------------------------------------------
// Payloads.

struct Metadata {
    std::optional<int> m, n, D;
    std::optional<double> delta;
    std::optional<std::uint64_t> seed;
};

// Fiber at one sample point: empty, or cut out by rows [functional..., rhs].
struct PointSpec {
    Point at;
    bool empty = false;
    std::vector<std::vector<double>> rows;
};

struct BundleSpec {
    std::vector<PointSpec> points;
};

struct SampleSpec {
    enum class Kind { points, grid, random } kind = Kind::points;
    std::vector<Point> points;
    double lo = -1.0, hi = 1.0;
    int count = 0;  // per axis for a grid, total for random samples
};

struct ParamSystemSpec {
    std::vector<std::vector<std::string>> coefficients;  // N x M expressions
    std::vector<std::string> rhs;                         // N expressions
    SampleSpec samples;
};

struct FamilySpec {
    std::string mode = "euclidean";
    std::vector<std::vector<std::vector<std::vector<double>>>> members;  // member -> term -> rows
};

struct FieldSpec {
    std::string side = "w";
    std::vector<Puiseux> curves;
    std::vector<std::string> components;
};

struct RegionSpec {
    Puiseux lower, upper;
};

struct StripSpec {
    int k = 0;
    std::vector<int> perm;
    std::vector<std::vector<std::string>> A;
    std::vector<std::string> phi;
};

struct ThetaEntry {
    int component = 0;
    int order = 0;
    Puiseux coeff;
};

struct CurveRowSpec {
    std::vector<ThetaEntry> theta;
    Puiseux rhs;
};

struct NormalFormSpec {
    std::vector<Puiseux> curves;
    std::vector<StripSpec> strips;
    std::vector<std::vector<CurveRowSpec>> curve_rows;
};

using Payload = std::variant<BundleSpec, ParamSystemSpec, FamilySpec, FieldSpec, RegionSpec, NormalFormSpec>;

struct FixtureSpec {
    std::string kind;
    std::string name;
    Metadata meta;
    Payload payload;

    int require(const std::optional<int>& v, const char* what) const {
        if (!v) throw SchemaError("/metadata: missing \"" + std::string(what) + "\" for kind " + kind);
        return *v;
    }
    int m() const { return require(meta.m, "m"); }
    int n() const { return require(meta.n, "n"); }
    int D() const { return require(meta.D, "D"); }
    double delta() const {
        if (!meta.delta) throw SchemaError("/metadata: missing \"delta\" for kind " + kind);
        return *meta.delta;
    }
};

inline const std::vector<std::string>& fixture_kinds() {
    static const std::vector<std::string> k{"sampled-bundle", "param-system", "seminorm-family", "wedge-normal-form", "field-piece", "cusp-region"};
    return k;
}

// ---------------------------------------------------------------------------
// Parsing.

namespace detail {

inline Metadata parse_metadata(const json& j) {
    Metadata md;
    only_keys(j, {"m", "n", "D", "delta", "seed"}, "/metadata");
    if (j.contains("m")) md.m = static_cast<int>(get_int(j["m"], "/metadata/m"));
    if (j.contains("n")) md.n = static_cast<int>(get_int(j["n"], "/metadata/n"));
    if (j.contains("D")) md.D = static_cast<int>(get_int(j["D"], "/metadata/D"));
    if (j.contains("delta")) md.delta = get_number(j["delta"], "/metadata/delta");
    if (j.contains("seed")) md.seed = static_cast<std::uint64_t>(get_int(j["seed"], "/metadata/seed"));
    if (md.m && *md.m < 0) throw SchemaError("/metadata/m: must be nonnegative");
    if (md.n && *md.n < 1) throw SchemaError("/metadata/n: must be positive");
    if (md.D && *md.D < 1) throw SchemaError("/metadata/D: must be positive");
    if (md.delta && !(*md.delta > 0)) throw SchemaError("/metadata/delta: must be positive");
    return md;
}

inline std::vector<std::string> string_list(const json& j, const std::string& path) {
    std::vector<std::string> out;
    int i = 0;
    for (const auto& e : get_array(j, path)) out.push_back(get_string(e, path + "/" + std::to_string(i++)));
    return out;
}

inline std::vector<Puiseux> curve_list(const json& j, const std::string& path) {
    std::vector<Puiseux> out;
    int i = 0;
    for (const auto& e : get_array(j, path)) out.push_back(puiseux_from_json(e, path + "/" + std::to_string(i++)));
    return out;
}

inline void check_expression(const std::string& src, const ExprScope& scope, const std::string& path) {
    try {
        Expression::parse(src, scope);
    } catch (const ExprError& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

inline BundleSpec parse_bundle(const json& p, const FixtureSpec& f) {
    BundleSpec b;
    only_keys(p, {"points"}, "/payload");
    const JetSpace space(f.n(), f.m(), f.D());
    const auto& pts = get_array(field(p, "points", "/payload"), "/payload/points");
    std::set<Point> seen;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::string path = "/payload/points/" + std::to_string(i);
        only_keys(pts[i], {"at", "empty", "rows"}, path);
        PointSpec ps;
        ps.at = get_vector(field(pts[i], "at", path), path + "/at");
        if (static_cast<int>(ps.at.size()) != space.n) throw SchemaError(path + "/at: expected " + std::to_string(space.n) + " coordinates");
        if (!seen.insert(ps.at).second) throw SchemaError(path + ": duplicate point entry");
        if (pts[i].contains("empty")) {
            if (!pts[i]["empty"].is_boolean()) throw SchemaError(path + "/empty: expected a boolean");
            ps.empty = pts[i]["empty"].get<bool>();
        }
        if (pts[i].contains("rows")) {
            const auto& rows = get_array(pts[i]["rows"], path + "/rows");
            for (std::size_t r = 0; r < rows.size(); ++r) {
                auto row = get_vector(rows[r], path + "/rows/" + std::to_string(r));
                if (static_cast<int>(row.size()) != space.total_dim() + 1)
                    throw SchemaError(path + "/rows/" + std::to_string(r) + ": expected " + std::to_string(space.total_dim() + 1) +
                                      " entries (functional then right-hand side)");
                ps.rows.push_back(std::move(row));
            }
        }
        if (ps.empty && !ps.rows.empty()) throw SchemaError(path + ": an empty fiber carries no rows");
        b.points.push_back(std::move(ps));
    }
    if (b.points.empty()) throw SchemaError("/payload/points: at least one point is required");
    return b;
}

inline SampleSpec parse_samples(const json& j, int n, const std::string& path) {
    SampleSpec s;
    only_keys(j, {"points", "grid", "random"}, path);
    if (j.size() != 1) throw SchemaError(path + ": give exactly one of points, grid, random");
    if (j.contains("points")) {
        s.kind = SampleSpec::Kind::points;
        std::set<Point> seen;
        int i = 0;
        for (const auto& e : get_array(j["points"], path + "/points")) {
            const std::string pp = path + "/points/" + std::to_string(i++);
            auto pt = get_vector(e, pp);
            if (static_cast<int>(pt.size()) != n) throw SchemaError(pp + ": expected " + std::to_string(n) + " coordinates");
            if (!seen.insert(pt).second) throw SchemaError(pp + ": duplicate point entry");
            s.points.push_back(std::move(pt));
        }
        return s;
    }
    const bool grid = j.contains("grid");
    const std::string gp = path + (grid ? "/grid" : "/random");
    const json& g = grid ? j["grid"] : j["random"];
    only_keys(g, {"lo", "hi", "count"}, gp);
    s.kind = grid ? SampleSpec::Kind::grid : SampleSpec::Kind::random;
    s.lo = get_number(field(g, "lo", gp), gp + "/lo");
    s.hi = get_number(field(g, "hi", gp), gp + "/hi");
    s.count = static_cast<int>(get_int(field(g, "count", gp), gp + "/count"));
    if (!(s.lo < s.hi)) throw SchemaError(gp + ": need lo < hi");
    if (s.count < 1 || (grid && s.count < 2)) throw SchemaError(gp + "/count: too small");
    return s;
}

inline ParamSystemSpec parse_param_system(const json& p, const FixtureSpec& f) {
    ParamSystemSpec s;
    only_keys(p, {"coefficients", "rhs", "samples"}, "/payload");
    const ExprScope scope{f.n(), {}};
    const auto& rows = get_array(field(p, "coefficients", "/payload"), "/payload/coefficients");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string rp = "/payload/coefficients/" + std::to_string(i);
        s.coefficients.push_back(string_list(rows[i], rp));
        if (s.coefficients.back().size() != s.coefficients.front().size()) throw SchemaError(rp + ": ragged coefficient matrix");
        for (std::size_t j = 0; j < s.coefficients.back().size(); ++j) check_expression(s.coefficients.back()[j], scope, rp + "/" + std::to_string(j));
    }
    if (s.coefficients.empty() || s.coefficients.front().empty()) throw SchemaError("/payload/coefficients: need at least one equation and one unknown");
    s.rhs = string_list(field(p, "rhs", "/payload"), "/payload/rhs");
    if (s.rhs.size() != s.coefficients.size()) throw SchemaError("/payload/rhs: need one entry per equation");
    for (std::size_t i = 0; i < s.rhs.size(); ++i) check_expression(s.rhs[i], scope, "/payload/rhs/" + std::to_string(i));
    s.samples = parse_samples(field(p, "samples", "/payload"), f.n(), "/payload/samples");
    return s;
}

inline FamilySpec parse_family(const json& p, const FixtureSpec& f) {
    FamilySpec s;
    only_keys(p, {"mode", "members"}, "/payload");
    const int dim = f.require(f.meta.n, "n");
    s.mode = get_string(field(p, "mode", "/payload"), "/payload/mode");
    if (s.mode != "euclidean" && s.mode != "max_abs" && s.mode != "sum_abs") throw SchemaError("/payload/mode: unknown mode \"" + s.mode + "\"");
    const auto& members = get_array(field(p, "members", "/payload"), "/payload/members");
    for (std::size_t w = 0; w < members.size(); ++w) {
        const std::string mp = "/payload/members/" + std::to_string(w);
        std::vector<std::vector<std::vector<double>>> terms;
        const auto& tj = get_array(members[w], mp);
        for (std::size_t t = 0; t < tj.size(); ++t) {
            const std::string tp = mp + "/" + std::to_string(t);
            std::vector<std::vector<double>> rows;
            const auto& rj = get_array(tj[t], tp);
            for (std::size_t r = 0; r < rj.size(); ++r) {
                rows.push_back(get_vector(rj[r], tp + "/" + std::to_string(r)));
                if (static_cast<int>(rows.back().size()) != dim) throw SchemaError(tp + "/" + std::to_string(r) + ": expected " + std::to_string(dim) + " entries");
            }
            terms.push_back(std::move(rows));
        }
        s.members.push_back(std::move(terms));
    }
    if (s.members.empty()) throw SchemaError("/payload/members: need at least one member");
    return s;
}

inline FieldSpec parse_field(const json& p, const FixtureSpec& f) {
    FieldSpec s;
    only_keys(p, {"side", "curves", "components"}, "/payload");
    if (p.contains("side")) {
        s.side = get_string(p["side"], "/payload/side");
        if (s.side != "+" && s.side != "-" && s.side != "w") throw SchemaError("/payload/side: expected \"+\", \"-\" or \"w\"");
    }
    if (p.contains("curves")) s.curves = curve_list(p["curves"], "/payload/curves");
    s.components = string_list(field(p, "components", "/payload"), "/payload/components");
    if (static_cast<int>(s.components.size()) != f.D()) throw SchemaError("/payload/components: expected D entries");
    const ExprScope scope{f.n(), s.curves};
    for (std::size_t i = 0; i < s.components.size(); ++i) check_expression(s.components[i], scope, "/payload/components/" + std::to_string(i));
    return s;
}

inline RegionSpec parse_region(const json& p, const FixtureSpec& f) {
    RegionSpec s;
    only_keys(p, {"lower", "upper"}, "/payload");
    s.lower = puiseux_from_json(field(p, "lower", "/payload"), "/payload/lower");
    s.upper = puiseux_from_json(field(p, "upper", "/payload"), "/payload/upper");
    f.delta();
    return s;
}

inline NormalFormSpec parse_normal_form(const json& p, const FixtureSpec& f) {
    NormalFormSpec s;
    only_keys(p, {"curves", "strips", "curve_rows"}, "/payload");
    const int D = f.D(), m = f.m();
    f.delta();
    s.curves = curve_list(field(p, "curves", "/payload"), "/payload/curves");
    const ExprScope scope{2, s.curves};
    const auto& strips = get_array(field(p, "strips", "/payload"), "/payload/strips");
    for (std::size_t i = 0; i < strips.size(); ++i) {
        const std::string sp = "/payload/strips/" + std::to_string(i);
        only_keys(strips[i], {"k", "perm", "A", "phi"}, sp);
        StripSpec st;
        st.k = static_cast<int>(get_int(field(strips[i], "k", sp), sp + "/k"));
        if (st.k < 0 || st.k > D) throw SchemaError(sp + "/k: out of range");
        if (strips[i].contains("perm")) {
            int c = 0;
            for (const auto& e : get_array(strips[i]["perm"], sp + "/perm")) st.perm.push_back(static_cast<int>(get_int(e, sp + "/perm/" + std::to_string(c++))));
        } else {
            for (int c = 0; c < D; ++c) st.perm.push_back(c);
        }
        auto sorted = st.perm;
        std::sort(sorted.begin(), sorted.end());
        for (int c = 0; c < D; ++c)
            if (static_cast<int>(sorted.size()) != D || sorted[c] != c) throw SchemaError(sp + "/perm: not a permutation of the components");
        if (st.k > 0) {
            const auto& A = get_array(field(strips[i], "A", sp), sp + "/A");
            for (std::size_t r = 0; r < A.size(); ++r) {
                st.A.push_back(string_list(A[r], sp + "/A/" + std::to_string(r)));
                if (static_cast<int>(st.A.back().size()) != D - st.k) throw SchemaError(sp + "/A/" + std::to_string(r) + ": expected D - k entries");
                for (std::size_t c = 0; c < st.A.back().size(); ++c) check_expression(st.A.back()[c], scope, sp + "/A/" + std::to_string(r) + "/" + std::to_string(c));
            }
            st.phi = string_list(field(strips[i], "phi", sp), sp + "/phi");
            for (std::size_t c = 0; c < st.phi.size(); ++c) check_expression(st.phi[c], scope, sp + "/phi/" + std::to_string(c));
            if (static_cast<int>(st.A.size()) != st.k || static_cast<int>(st.phi.size()) != st.k) throw SchemaError(sp + ": A and phi need k rows");
        } else if (strips[i].contains("A") || strips[i].contains("phi")) {
            throw SchemaError(sp + ": a strip with k = 0 has no equations");
        }
        s.strips.push_back(std::move(st));
    }
    const auto& cr = get_array(field(p, "curve_rows", "/payload"), "/payload/curve_rows");
    for (std::size_t c = 0; c < cr.size(); ++c) {
        const std::string cp = "/payload/curve_rows/" + std::to_string(c);
        std::vector<CurveRowSpec> rows;
        const auto& rj = get_array(cr[c], cp);
        for (std::size_t r = 0; r < rj.size(); ++r) {
            const std::string rp = cp + "/" + std::to_string(r);
            only_keys(rj[r], {"theta", "rhs"}, rp);
            CurveRowSpec row;
            const auto& th = get_array(field(rj[r], "theta", rp), rp + "/theta");
            std::set<std::pair<int, int>> seen;
            for (std::size_t t = 0; t < th.size(); ++t) {
                const std::string tp = rp + "/theta/" + std::to_string(t);
                only_keys(th[t], {"component", "order", "coeff"}, tp);
                ThetaEntry e;
                e.component = static_cast<int>(get_int(field(th[t], "component", tp), tp + "/component"));
                e.order = static_cast<int>(get_int(field(th[t], "order", tp), tp + "/order"));
                e.coeff = puiseux_from_json(field(th[t], "coeff", tp), tp + "/coeff");
                if (e.component < 0 || e.component >= D || e.order < 0 || e.order > m) throw SchemaError(tp + ": component or order out of range");
                if (!seen.insert({e.component, e.order}).second) throw SchemaError(tp + ": duplicate theta entry");
                row.theta.push_back(std::move(e));
            }
            row.rhs = puiseux_from_json(field(rj[r], "rhs", rp), rp + "/rhs");
            rows.push_back(std::move(row));
        }
        s.curve_rows.push_back(std::move(rows));
    }
    if (s.curve_rows.size() != s.curves.size()) throw SchemaError("/payload/curve_rows: need one list per curve");
    if (s.strips.size() + 1 != s.curves.size()) throw SchemaError("/payload/strips: need one strip per pair of consecutive curves");
    return s;
}

inline std::string line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

inline FixtureSpec parse_spec_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::string msg = e.what();
        const auto colon = msg.find("syntax error");
        throw SchemaError("JSON syntax error at " + detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0) +
                          (colon != std::string::npos ? ": " + msg.substr(colon) : ""));
    }
    FixtureSpec f;
    detail::only_keys(j, {"kind", "name", "metadata", "payload"}, "");
    f.kind = detail::get_string(detail::field(j, "kind", ""), "/kind");
    const auto& kinds = fixture_kinds();
    if (std::find(kinds.begin(), kinds.end(), f.kind) == kinds.end()) throw SchemaError("/kind: unknown kind \"" + f.kind + "\"");
    if (j.contains("name")) f.name = detail::get_string(j["name"], "/name");
    if (j.contains("metadata")) f.meta = detail::parse_metadata(j["metadata"]);
    const json& p = detail::field(j, "payload", "");
    if (f.kind == "sampled-bundle") f.payload = detail::parse_bundle(p, f);
    else if (f.kind == "param-system") f.payload = detail::parse_param_system(p, f);
    else if (f.kind == "seminorm-family") f.payload = detail::parse_family(p, f);
    else if (f.kind == "field-piece") f.payload = detail::parse_field(p, f);
    else if (f.kind == "cusp-region") f.payload = detail::parse_region(p, f);
    else f.payload = detail::parse_normal_form(p, f);
    return f;
}

inline FixtureSpec parse_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_spec_text(ss.str());
}

// ---------------------------------------------------------------------------
// Canonical emission.

inline json to_json(const FixtureSpec& f) {
    using detail::vector_json;
    json j;
    j["kind"] = f.kind;
    j["name"] = f.name;
    json md = json::object();
    if (f.meta.m) md["m"] = *f.meta.m;
    if (f.meta.n) md["n"] = *f.meta.n;
    if (f.meta.D) md["D"] = *f.meta.D;
    if (f.meta.delta) md["delta"] = detail::number_json(*f.meta.delta);
    if (f.meta.seed) md["seed"] = *f.meta.seed;
    j["metadata"] = md;
    json p = json::object();
    if (const auto* b = std::get_if<BundleSpec>(&f.payload)) {
        json pts = json::array();
        for (const auto& ps : b->points) {
            json e;
            e["at"] = vector_json(ps.at);
            if (ps.empty) e["empty"] = true;
            else {
                json rows = json::array();
                for (const auto& r : ps.rows) rows.push_back(vector_json(r));
                e["rows"] = rows;
            }
            pts.push_back(e);
        }
        p["points"] = pts;
    } else if (const auto* s = std::get_if<ParamSystemSpec>(&f.payload)) {
        p["coefficients"] = s->coefficients;
        p["rhs"] = s->rhs;
        json smp;
        if (s->samples.kind == SampleSpec::Kind::points) {
            json pts = json::array();
            for (const auto& pt : s->samples.points) pts.push_back(vector_json(pt));
            smp["points"] = pts;
        } else {
            smp[s->samples.kind == SampleSpec::Kind::grid ? "grid" : "random"] =
                json{{"lo", detail::number_json(s->samples.lo)}, {"hi", detail::number_json(s->samples.hi)}, {"count", s->samples.count}};
        }
        p["samples"] = smp;
    } else if (const auto* fam = std::get_if<FamilySpec>(&f.payload)) {
        p["mode"] = fam->mode;
        json members = json::array();
        for (const auto& mem : fam->members) {
            json terms = json::array();
            for (const auto& t : mem) {
                json rows = json::array();
                for (const auto& r : t) rows.push_back(vector_json(r));
                terms.push_back(rows);
            }
            members.push_back(terms);
        }
        p["members"] = members;
    } else if (const auto* fs = std::get_if<FieldSpec>(&f.payload)) {
        p["side"] = fs->side;
        if (!fs->curves.empty()) {
            json cs = json::array();
            for (const auto& c : fs->curves) cs.push_back(puiseux_to_json(c));
            p["curves"] = cs;
        }
        p["components"] = fs->components;
    } else if (const auto* r = std::get_if<RegionSpec>(&f.payload)) {
        p["lower"] = puiseux_to_json(r->lower);
        p["upper"] = puiseux_to_json(r->upper);
    } else if (const auto* nf = std::get_if<NormalFormSpec>(&f.payload)) {
        json cs = json::array();
        for (const auto& c : nf->curves) cs.push_back(puiseux_to_json(c));
        p["curves"] = cs;
        json strips = json::array();
        for (const auto& st : nf->strips) {
            json sj;
            sj["k"] = st.k;
            sj["perm"] = st.perm;
            if (st.k > 0) {
                sj["A"] = st.A;
                sj["phi"] = st.phi;
            }
            strips.push_back(sj);
        }
        p["strips"] = strips;
        json rows = json::array();
        for (const auto& list : nf->curve_rows) {
            json lj = json::array();
            for (const auto& row : list) {
                json th = json::array();
                for (const auto& e : row.theta) th.push_back(json{{"component", e.component}, {"order", e.order}, {"coeff", puiseux_to_json(e.coeff)}});
                lj.push_back(json{{"theta", th}, {"rhs", puiseux_to_json(row.rhs)}});
            }
            rows.push_back(lj);
        }
        p["curve_rows"] = rows;
    }
    j["payload"] = p;
    return j;
}

inline std::string emit_spec(const FixtureSpec& f) { return to_json(f).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Conversion to library objects.

inline SampledBundle to_bundle(const FixtureSpec& f) {
    const auto& b = std::get<BundleSpec>(f.payload);
    SampledBundle out;
    out.space = JetSpace(f.n(), f.m(), f.D());
    for (const auto& ps : b.points) {
        out.points.push_back(ps.at);
        if (ps.empty) {
            out.fibers.push_back(AffineFiber::empty(out.space.total_dim()));
            continue;
        }
        std::vector<JetConstraint> rows;
        for (const auto& r : ps.rows) {
            JetConstraint c;
            c.functional = to_vector(std::vector<double>(r.begin(), r.end() - 1));
            c.rhs = r.back();
            rows.push_back(c);
        }
        out.fibers.push_back(fiber_from_constraints(out.space, rows));
    }
    return out;
}

inline ParamLinearSystem to_param_system(const FixtureSpec& f) {
    const auto& s = std::get<ParamSystemSpec>(f.payload);
    const ExprScope scope{f.n(), {}};
    auto C = std::make_shared<std::vector<std::vector<Expression>>>();
    auto g = std::make_shared<std::vector<Expression>>();
    for (const auto& row : s.coefficients) {
        C->emplace_back();
        for (const auto& e : row) C->back().push_back(Expression::parse(e, scope));
    }
    for (const auto& e : s.rhs) g->push_back(Expression::parse(e, scope));
    ParamLinearSystem sys;
    sys.N = static_cast<int>(s.coefficients.size());
    sys.M = static_cast<int>(s.coefficients.front().size());
    sys.coeff = [C](const Point& x, int i, int j) { return (*C)[i][j].value(x); };
    sys.rhs = [g](const Point& x, int i) { return (*g)[i].value(x); };
    return sys;
}

// Sample points of a parametric system; random samples come from a seeded
// generator so reruns are reproducible.
inline std::vector<Point> sample_points(const FixtureSpec& f, std::uint64_t seed, std::optional<int> count_override = std::nullopt) {
    const auto& s = std::get<ParamSystemSpec>(f.payload).samples;
    const int n = f.n();
    std::vector<Point> out;
    if (s.kind == SampleSpec::Kind::points) return s.points;
    if (s.kind == SampleSpec::Kind::grid) {
        const int c = s.count;
        std::vector<int> idx(n, 0);
        for (;;) {
            Point p(n);
            for (int i = 0; i < n; ++i) p[i] = s.lo + (s.hi - s.lo) * idx[i] / (c - 1);
            out.push_back(p);
            int k = n - 1;
            while (k >= 0 && ++idx[k] == c) idx[k--] = 0;
            if (k < 0) break;
        }
        return out;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(s.lo, s.hi);
    const int count = count_override.value_or(s.count);
    for (int i = 0; i < count; ++i) {
        Point p(n);
        for (auto& v : p) v = U(rng);
        out.push_back(p);
    }
    return out;
}

// Order-0 bundle of pointwise solution sets of a parametric system.
inline SampledBundle pointwise_bundle(const ParamLinearSystem& sys, const std::vector<Point>& pts) {
    SampledBundle b;
    b.space = JetSpace(static_cast<int>(pts.front().size()), 0, sys.M);
    for (const auto& p : pts) {
        const auto sol = solve_affine(sys.coeff_at(p), sys.rhs_at(p));
        b.points.push_back(p);
        b.fibers.push_back(sol.consistent ? AffineFiber::make(sol.offset, sol.kernel) : AffineFiber::empty(sys.M));
    }
    return b;
}

inline SeminormFamily to_family(const FixtureSpec& f) {
    const auto& s = std::get<FamilySpec>(f.payload);
    SeminormFamily fam;
    fam.dim = f.n();
    fam.mode = s.mode == "euclidean" ? SeminormMode::euclidean : s.mode == "max_abs" ? SeminormMode::max_abs : SeminormMode::sum_abs;
    for (const auto& mem : s.members) {
        Seminorm sn;
        for (const auto& t : mem) {
            Matrix M(static_cast<int>(t.size()), fam.dim);
            for (std::size_t r = 0; r < t.size(); ++r)
                for (int c = 0; c < fam.dim; ++c) M(static_cast<int>(r), c) = t[r][c];
            sn.terms.push_back(M);
        }
        fam.members.push_back(sn);
    }
    return fam;
}

struct FieldComponents {
    int n = 2;
    char side = 'w';
    std::vector<Expression> components;

    // Flat jet (graded-lex Taylor coefficients, component-major) at a point.
    Vector flat_jet(const Point& p, int m) const {
        std::vector<double> out;
        for (const auto& e : components) {
            const auto J = e.jet_at(p, m);
            out.insert(out.end(), J.coeffs().begin(), J.coeffs().end());
        }
        return to_vector(out);
    }
    std::vector<FieldPiece> pieces() const {
        std::vector<FieldPiece> out;
        for (const auto& e : components) out.push_back(expression_field(e, side));
        return out;
    }
};

inline FieldComponents to_field(const FixtureSpec& f) {
    const auto& s = std::get<FieldSpec>(f.payload);
    FieldComponents out;
    out.n = f.n();
    out.side = s.side[0];
    const ExprScope scope{f.n(), s.curves};
    for (const auto& c : s.components) out.components.push_back(Expression::parse(c, scope));
    return out;
}

inline CuspRegion to_region(const FixtureSpec& f) {
    const auto& r = std::get<RegionSpec>(f.payload);
    return {r.lower, r.upper, f.delta()};
}

inline WedgeNormalForm to_normal_form(const FixtureSpec& f) {
    const auto& s = std::get<NormalFormSpec>(f.payload);
    WedgeNormalForm nf;
    nf.name = f.name;
    nf.D = f.D();
    nf.m = f.m();
    nf.ladder.curves = s.curves;
    nf.ladder.delta = f.delta();
    const ExprScope scope{2, s.curves};
    for (const auto& st : s.strips) {
        StripSystem S;
        S.k = st.k;
        S.perm = st.perm;
        for (const auto& row : st.A) {
            S.A.emplace_back();
            for (const auto& e : row) S.A.back().push_back(expression_field(Expression::parse(e, scope)));
        }
        for (const auto& e : st.phi) S.phi.push_back(expression_field(Expression::parse(e, scope)));
        nf.strips.push_back(std::move(S));
    }
    for (const auto& list : s.curve_rows) {
        nf.curve_rows.emplace_back();
        for (const auto& row : list) {
            CurveRow r;
            r.theta.assign(nf.D * (nf.m + 1), Puiseux());
            for (const auto& e : row.theta) r.theta[e.component * (nf.m + 1) + e.order] = e.coeff;
            r.g = row.rhs;
            nf.curve_rows.back().push_back(std::move(r));
        }
    }
    return nf;
}

}  // namespace whitney::io

#endif
