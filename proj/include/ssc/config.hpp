#pragma once

// Run configuration: YAML sections layered as preset < file < --override, then
// validated in one pass so that every problem is reported together.
//
//   plant:      preset | order, length, bc, gamma, coefficients {a1, a2, phi, b, f}
//   partition:  N | breakpoints + sensors [+ delta]
//   shape:      family (constant | raised-cosine | bump), alpha, beta, form, clamp
//   controller: K
//   simulation: cells, dt, enforce_guard, t_end, record_every, diffusion, initial {kind, amplitude}
//   lmi:        tolerance, fx_sq_sup, tuning {K, R, delta, beta1, beta2, p}, grids {K, R, delta, beta1, beta2, p}
//   verify:     threshold, tuning {...}
//   compare:    baseline {shape section}
//   output:     dir, prefix
//
// A coefficient is either `constant: c` or `terms: [...]` with `bounds: [lo, hi]`. Each term is
// `constant: c` or `{scale: s, sin|cos|linear: {x, z, t, shift}}` or `{scale: s, product: [factors]}`.
// Grids are lists or {from, to, count, scale: linear|log}. Numbers may be written as p/q.

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "ssc/error.hpp"
#include "ssc/lmi.hpp"
#include "ssc/plant.hpp"
#include "ssc/sampling.hpp"
#include "ssc/shapes.hpp"
#include "ssc/simulator.hpp"

namespace ssc {

enum class IssueKind { Parse, UnknownKey, Invariant };

inline std::string_view to_string(IssueKind k) {
    switch (k) {
        case IssueKind::Parse: return "parse";
        case IssueKind::UnknownKey: return "unknown-key";
        case IssueKind::Invariant: return "invariant";
    }
    return "?";
}

struct ConfigIssue {
    IssueKind kind;
    std::string path;  ///< dotted key path, empty for document-level problems
    int line = -1;     ///< 1-based, -1 when unknown
    int column = -1;
    std::string message;

    std::string describe() const {
        std::string s = std::string(to_string(kind)) + ": ";
        if (!path.empty()) s += path + ": ";
        s += message;
        if (line > 0) s += " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")";
        return s;
    }
};

class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<ConfigIssue> issues)
        : Error(summarize(issues)), issues_(std::move(issues)) {}

    const std::vector<ConfigIssue>& issues() const { return issues_; }

private:
    static std::string summarize(const std::vector<ConfigIssue>& issues) {
        std::string s = "invalid configuration";
        for (const auto& i : issues) s += "\n  " + i.describe();
        return s;
    }

    std::vector<ConfigIssue> issues_;
};

struct LmiSettings {
    SearchGrids grids;
    bool gain_grid_given = false;
    double tolerance = kDefaultLmiTolerance;
    double fx_sq_sup = 0.0;  ///< a-priori shape-gradient term for lmi-check's gamma
    std::optional<Tuning> tuning;
};

struct VerifySettings {
    double threshold = 1e-3;  ///< allowed violation relative to V(0)
    std::optional<Tuning> tuning;
};

struct OutputSettings {
    std::string dir = ".";
    std::string prefix = "run";
};

struct RunConfig {
    std::string preset;
    PlantSpec plant;
    ActuationPartition partition;
    ShapeSpec shape;
    ShapeSpec baseline_shape;
    double gain;
    SimulationOptions simulation;
    LmiSettings lmi;
    VerifySettings verify;
    OutputSettings output;
};

namespace config_detail {

inline int line_of(const YAML::Node& n) { return !n || n.Mark().is_null() ? -1 : n.Mark().line + 1; }
inline int column_of(const YAML::Node& n) { return !n || n.Mark().is_null() ? -1 : n.Mark().column + 1; }

/// Reads one mapping, remembering which keys were consumed so the rest can be flagged.
class Section {
public:
    Section(YAML::Node node, std::string path, std::vector<ConfigIssue>& issues)
        : node_(std::move(node)), path_(std::move(path)), issues_(issues) {
        if (node_ && !node_.IsNull() && !node_.IsMap()) {
            invalid(node_, path_, "expected a mapping");
            node_ = YAML::Node();
        }
    }

    bool present() const { return node_ && node_.IsMap(); }
    /// Const lookup, so probing a missing key never inserts it.
    YAML::Node at(const std::string& key) const {
        const YAML::Node& c = node_;
        if (!present()) return YAML::Node();
        const auto n = c[key];
        return n ? n : YAML::Node();
    }
    bool has(const std::string& key) {
        seen_.insert(key);
        return present() && at(key) && !at(key).IsNull();
    }
    YAML::Node raw(const std::string& key) {
        seen_.insert(key);
        return present() ? at(key) : YAML::Node();
    }
    std::vector<ConfigIssue>& issues() { return issues_; }
    std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    Section sub(const std::string& key) { return Section(raw(key), child_path(key), issues_); }

    std::optional<double> number(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return to_number(at(key), child_path(key));
    }

    std::optional<long long> integer(const std::string& key) {
        if (!has(key)) return std::nullopt;
        const auto n = at(key);
        try {
            return n.as<long long>();
        } catch (const YAML::Exception&) {
            invalid(n, child_path(key), "expected an integer");
            return std::nullopt;
        }
    }

    std::optional<bool> boolean(const std::string& key) {
        if (!has(key)) return std::nullopt;
        const auto n = at(key);
        try {
            return n.as<bool>();
        } catch (const YAML::Exception&) {
            invalid(n, child_path(key), "expected true or false");
            return std::nullopt;
        }
    }

    std::optional<std::string> text(const std::string& key) {
        if (!has(key)) return std::nullopt;
        const auto n = at(key);
        if (!n.IsScalar()) {
            invalid(n, child_path(key), "expected a string");
            return std::nullopt;
        }
        return n.Scalar();
    }

    /// A scalar or a list of numbers.
    std::optional<std::vector<double>> numbers(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return number_list(at(key), child_path(key));
    }

    std::vector<double> number_list(const YAML::Node& n, const std::string& path) {
        std::vector<double> out;
        if (n.IsScalar()) {
            if (auto v = to_number(n, path)) out.push_back(*v);
            return out;
        }
        if (!n.IsSequence()) {
            invalid(n, path, "expected a number or a list of numbers");
            return out;
        }
        for (std::size_t i = 0; i < n.size(); ++i)
            if (auto v = to_number(n[i], path + "[" + std::to_string(i) + "]")) out.push_back(*v);
        return out;
    }

    std::optional<double> to_number(const YAML::Node& n, const std::string& path) {
        if (n.IsScalar()) {
            if (auto v = parse_number(n.Scalar())) return v;
        }
        invalid(n, path, "expected a number");
        return std::nullopt;
    }

    void invalid(const YAML::Node& at, const std::string& path, std::string message) {
        issues_.push_back({IssueKind::Invariant, path, line_of(at), column_of(at), std::move(message)});
    }
    void invalid_here(const std::string& key, std::string message) {
        const auto n = present() && at(key) ? at(key) : node_;
        issues_.push_back({IssueKind::Invariant, child_path(key), line_of(n), column_of(n), std::move(message)});
    }
    void missing(const std::string& key, std::string message) {
        issues_.push_back({IssueKind::Invariant, key.empty() ? path_ : child_path(key), line_of(node_),
                           column_of(node_), std::move(message)});
    }

    /// Reports every key that was never consumed.
    void finish() {
        if (!present()) return;
        for (const auto& kv : node_) {
            const auto key = kv.first.Scalar();
            if (!seen_.count(key))
                issues_.push_back({IssueKind::UnknownKey, child_path(key), line_of(kv.first), column_of(kv.first),
                                   "unknown key"});
        }
    }

    static std::optional<double> parse_number(const std::string& s) {
        auto full = [](std::string_view v) -> std::optional<double> {
            double x = 0.0;
            while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
            while (!v.empty() && v.back() == ' ') v.remove_suffix(1);
            if (!v.empty() && v.front() == '+') v.remove_prefix(1);
            const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
            if (ec != std::errc() || p != v.data() + v.size() || v.empty()) return std::nullopt;
            return x;
        };
        const auto slash = s.find('/');
        if (slash == std::string::npos) return full(s);
        const auto num = full(std::string_view(s).substr(0, slash));
        const auto den = full(std::string_view(s).substr(slash + 1));
        if (!num || !den || *den == 0.0) return std::nullopt;
        return *num / *den;
    }

private:
    YAML::Node node_;
    std::string path_;
    std::vector<ConfigIssue>& issues_;
    std::set<std::string> seen_;
};

/// Overlays `over` onto `base`, reusing the nodes of `over` so their source marks survive.
inline YAML::Node merge(const YAML::Node& base, YAML::Node over) {
    if (!over || over.IsNull()) return base ? YAML::Clone(base) : YAML::Node();
    if (!base || !base.IsMap() || !over.IsMap()) return over;
    for (const auto& kv : base) {
        const auto key = kv.first.Scalar();
        const YAML::Node& cover = over;
        if (!cover[key]) over[key] = YAML::Clone(kv.second);
        else over[key] = merge(kv.second, cover[key]);
    }
    return over;
}

inline YAML::Node preset_node(const std::string& name) {
    const auto plant = presets::by_name(name);
    if (!plant) return YAML::Node();
    YAML::Node n;
    n["plant"]["preset"] = name;
    n["partition"]["N"] = 10;
    if (name == "heat" || name == "wave") {
        n["shape"]["family"] = "constant";
    } else {
        n["shape"]["family"] = "bump";
        n["shape"]["alpha"] = 1000;
        n["shape"]["beta"] = 0.0125;
    }
    n["controller"]["K"] = 100;
    n["simulation"]["cells"] = 160;
    n["simulation"]["t_end"] = 1.0;
    n["simulation"]["record_every"] = plant->order() == Order::Parabolic ? 256 : 8;
    n["simulation"]["initial"]["kind"] = "sine";
    n["simulation"]["initial"]["amplitude"] = 1.0;
    n["output"]["dir"] = ".";
    n["output"]["prefix"] = name;
    return n;
}

inline void set_path(YAML::Node root, const std::string& dotted, const YAML::Node& value) {
    std::vector<std::string> keys;
    std::size_t start = 0;
    while (true) {
        const auto dot = dotted.find('.', start);
        keys.push_back(dotted.substr(start, dot - start));
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    std::vector<YAML::Node> chain{root};
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
        YAML::Node next = chain.back()[keys[i]];
        if (!next.IsMap()) next = YAML::Node(YAML::NodeType::Map);
        chain.back()[keys[i]] = next;
        chain.push_back(chain.back()[keys[i]]);
    }
    chain.back()[keys.back()] = value;
}

inline AffineArg read_arg(Section& s) {
    AffineArg a;
    a.x = s.number("x").value_or(0.0);
    a.z = s.number("z").value_or(0.0);
    a.t = s.number("t").value_or(0.0);
    a.shift = s.number("shift").value_or(0.0);
    s.finish();
    return a;
}

/// One factor given by exactly one of the keys sin, cos, linear.
inline std::optional<Factor> read_factor(Section& s) {
    std::optional<Factor> f;
    int count = 0;
    for (auto [key, kind] : {std::pair{"sin", FactorKind::Sin}, std::pair{"cos", FactorKind::Cos},
                             std::pair{"linear", FactorKind::Affine}}) {
        if (!s.has(key)) continue;
        ++count;
        auto arg = s.sub(key);
        f = Factor{kind, read_arg(arg)};
    }
    if (count != 1) {
        s.missing("", "a factor needs exactly one of sin, cos, linear");
        return std::nullopt;
    }
    return f;
}

inline std::optional<Term> read_term(Section& s) {
    if (s.has("constant")) {
        const auto c = s.number("constant");
        s.finish();
        if (!c) return std::nullopt;
        return Term{*c, {}};
    }
    Term t;
    t.scale = s.number("scale").value_or(1.0);
    bool ok = true;
    if (s.has("product")) {
        const auto list = s.raw("product");
        if (!list.IsSequence()) {
            s.invalid_here("product", "expected a list of factors");
            ok = false;
        } else {
            for (std::size_t i = 0; i < list.size(); ++i) {
                Section fs(list[i], s.child_path("product") + "[" + std::to_string(i) + "]", s.issues());
                auto f = read_factor(fs);
                fs.finish();
                if (f) t.factors.push_back(*f);
                else ok = false;
            }
        }
    } else {
        auto f = read_factor(s);
        if (f) t.factors.push_back(*f);
        else ok = false;
    }
    s.finish();
    if (!ok) return std::nullopt;
    return t;
}

inline std::optional<Interval> read_bounds(Section& s, const std::string& key) {
    const auto v = s.numbers(key);
    if (!v) return std::nullopt;
    if (v->size() != 2) {
        s.invalid_here(key, "bounds must be [lo, hi]");
        return std::nullopt;
    }
    if ((*v)[0] > (*v)[1]) {
        s.invalid_here(key, "bounds are reversed (lo > hi)");
        return std::nullopt;
    }
    return Interval{(*v)[0], (*v)[1]};
}

inline std::optional<CoefficientField> read_coefficient(Section& s, FieldKind kind) {
    std::optional<CoefficientField> out;
    if (s.has("constant")) {
        if (s.has("terms")) s.invalid_here("terms", "give either constant or terms, not both");
        if (const auto c = s.number("constant")) {
            const auto b = read_bounds(s, "bounds");
            if (b && !b->contains(*c)) s.invalid_here("bounds", "constant value lies outside its bounds");
            out = CoefficientField::from_expression(kind, Expression::constant(*c), b.value_or(Interval{*c, *c}));
        }
        s.finish();
        return out;
    }
    const auto list = s.raw("terms");
    if (!list || list.IsNull()) {
        s.missing("terms", "coefficient needs `constant` or `terms`");
        s.finish();
        return out;
    }
    if (!list.IsSequence() || list.size() == 0) {
        s.invalid_here("terms", "expected a nonempty list of terms");
        s.finish();
        return out;
    }
    std::vector<Term> terms;
    bool ok = true;
    for (std::size_t i = 0; i < list.size(); ++i) {
        Section ts(list[i], s.child_path("terms") + "[" + std::to_string(i) + "]", s.issues());
        if (auto t = read_term(ts)) terms.push_back(std::move(*t));
        else ok = false;
    }
    const auto b = read_bounds(s, "bounds");
    if (!s.has("bounds")) s.missing("bounds", "coefficient given by terms needs bounds [lo, hi]");
    s.finish();
    if (ok && b) out = CoefficientField::from_expression(kind, Expression(std::move(terms)), *b);
    return out;
}

inline std::vector<double> read_grid(Section& parent, const std::string& key, std::vector<double> fallback) {
    if (!parent.has(key)) return fallback;
    const auto node = parent.raw(key);
    const auto path = parent.child_path(key);
    if (!node.IsMap()) {
        auto v = parent.number_list(node, path);
        if (v.empty()) parent.invalid(node, path, "grid must be nonempty");
        return v.empty() ? fallback : v;
    }
    Section g(node, path, parent.issues());
    const auto from = g.number("from"), to = g.number("to");
    const auto count = g.integer("count");
    const auto scale = g.text("scale").value_or("linear");
    g.finish();
    if (!from || !to || !count) {
        g.missing("", "grid needs from, to and count");
        return fallback;
    }
    if (*count < 1) {
        g.invalid_here("count", "count must be >= 1");
        return fallback;
    }
    if (scale == "linear") return linear_grid(*from, *to, static_cast<std::size_t>(*count));
    if (scale == "log") {
        if (!(*from > 0.0 && *to > 0.0)) {
            g.invalid_here("from", "log grid bounds must be > 0");
            return fallback;
        }
        return log_grid(*from, *to, static_cast<std::size_t>(*count));
    }
    g.invalid_here("scale", "scale must be linear or log");
    return fallback;
}

inline std::optional<Tuning> read_tuning(Section& s, double default_gain) {
    Tuning t;
    t.gain = s.number("K").value_or(default_gain);
    const auto R = s.number("R"), d = s.number("delta"), b1 = s.number("beta1"), b2 = s.number("beta2");
    t.cross_weight = s.number("p").value_or(0.0);
    s.finish();
    if (!R || !d || !b1 || !b2) {
        s.missing("", "tuning needs R, delta, beta1 and beta2");
        return std::nullopt;
    }
    t.young_weight = *R;
    t.decay_rate = *d;
    t.beta1 = *b1;
    t.beta2 = *b2;
    if (!(t.gain > 0.0 && t.young_weight > 0.0 && t.decay_rate > 0.0 && t.beta1 > 0.0 && t.beta2 > 0.0)) {
        s.missing("", "tuning values K, R, delta, beta1, beta2 must be > 0");
        return std::nullopt;
    }
    if (!(std::abs(t.cross_weight) < 0.5)) {
        s.invalid_here("p", "p must satisfy |p| < 0.5");
        return std::nullopt;
    }
    return t;
}

inline std::optional<ShapeSpec> read_shape(Section& s, std::size_t intervals) {
    const auto family = s.text("family");
    std::optional<ShapeSpec> out;
    if (!family) {
        s.missing("family", "shape needs a family (constant, raised-cosine, bump)");
        s.finish();
        return out;
    }
    auto alpha = [&]() -> std::optional<double> {
        const auto a = s.number("alpha");
        if (!a) {
            s.missing("alpha", "shape family " + *family + " needs alpha");
            return std::nullopt;
        }
        if (!(*a > 0.0)) {
            s.invalid_here("alpha", "alpha must be > 0");
            return std::nullopt;
        }
        return a;
    };
    if (*family == "constant") {
        out = ConstantShape{};
    } else if (*family == "raised-cosine") {
        const auto a = alpha();
        const auto clamp = s.text("clamp").value_or("warn");
        if (clamp != "warn" && clamp != "reject") s.invalid_here("clamp", "clamp must be warn or reject");
        if (a) out = RaisedCosineShape{*a, clamp == "reject" ? ClampPolicy::Reject : ClampPolicy::Warn};
    } else if (*family == "bump") {
        const auto a = alpha();
        const auto beta = s.numbers("beta");
        const auto form = s.text("form").value_or("normalized");
        if (form != "normalized" && form != "literal") s.invalid_here("form", "form must be normalized or literal");
        bool ok = a.has_value();
        if (!beta) {
            s.missing("beta", "shape family bump needs beta (one value or one per interval)");
            ok = false;
        } else if (beta->size() != 1 && beta->size() != intervals) {
            s.invalid_here("beta", "beta needs one value or one per interval (" + std::to_string(intervals) + ")");
            ok = false;
        } else {
            for (double b : *beta)
                if (!(b > 0.0)) {
                    s.invalid_here("beta", "beta values must be > 0");
                    ok = false;
                    break;
                }
        }
        if (ok) out = BumpShape{*a, *beta, form == "literal" ? BumpForm::PaperLiteral : BumpForm::Normalized};
    } else {
        s.invalid_here("family", "unknown shape family '" + *family + "' (constant, raised-cosine, bump)");
    }
    s.finish();
    return out;
}

inline std::optional<PlantSpec> read_plant(Section& s) {
    std::optional<PlantSpec> base;
    if (const auto name = s.text("preset")) {
        base = presets::by_name(*name);
        if (!base) {
            std::string list;
            for (const auto& n : presets::names()) list += (list.empty() ? "" : ", ") + n;
            s.invalid_here("preset", "unknown plant preset '" + *name + "' (" + list + ")");
        }
    }
    std::optional<Order> order = base ? std::optional(base->order()) : std::nullopt;
    if (const auto o = s.text("order")) {
        if (*o == "parabolic") order = Order::Parabolic;
        else if (*o == "hyperbolic") order = Order::Hyperbolic;
        else s.invalid_here("order", "order must be parabolic or hyperbolic");
    }
    const double length = s.number("length").value_or(base ? base->length() : 1.0);
    if (!(length > 0.0)) s.invalid_here("length", "length must be > 0");

    auto bc = base ? base->boundary() : BoundaryCondition::dirichlet();
    if (const auto kind = s.text("bc")) {
        if (*kind == "dirichlet") bc = BoundaryCondition::dirichlet();
        else if (*kind == "mixed") bc.kind = BoundaryCondition::Kind::Mixed;
        else s.invalid_here("bc", "bc must be dirichlet or mixed");
    }
    if (const auto g = s.number("gamma")) {
        if (!(*g >= 0.0)) s.invalid_here("gamma", "gamma must be >= 0");
        bc.gamma = *g;
    }
    const bool allow = s.boolean("allow_nonpositive_damping")
                           .value_or(base ? base->allows_nonpositive_damping() : false);

    std::optional<PlantSpec::Fields> fields = base ? std::optional(base->fields()) : std::nullopt;
    auto coeffs = s.sub("coefficients");
    const std::pair<const char*, FieldKind> kinds[] = {{"a1", FieldKind::Diffusion},
                                                       {"a2", FieldKind::Convection},
                                                       {"phi", FieldKind::Reaction},
                                                       {"b", FieldKind::Damping},
                                                       {"f", FieldKind::Disturbance}};
    std::map<FieldKind, CoefficientField> given;
    bool coeff_errors = false;
    for (const auto& [key, kind] : kinds) {
        if (!coeffs.has(key)) continue;
        auto cs = coeffs.sub(key);
        if (auto c = read_coefficient(cs, kind)) given.emplace(kind, std::move(*c));
        else coeff_errors = true;
    }
    coeffs.finish();
    if (!fields && (order || !given.empty())) {
        for (const auto& [key, kind] : kinds) {
            if (kind == FieldKind::Damping) continue;
            if (!given.count(kind) && !coeff_errors)
                coeffs.missing(key, std::string("coefficient ") + key + " is required without a preset");
        }
        if (!coeff_errors && given.size() >= 4 && given.count(FieldKind::Diffusion) && given.count(FieldKind::Convection) &&
            given.count(FieldKind::Reaction) && given.count(FieldKind::Disturbance))
            fields = PlantSpec::Fields{given.at(FieldKind::Diffusion), given.at(FieldKind::Convection),
                                       given.at(FieldKind::Reaction), std::nullopt, given.at(FieldKind::Disturbance)};
    }
    const auto name = s.text("name");
    s.finish();
    if (!fields || !order || coeff_errors) {
        const bool named = s.has("preset");  // an unknown preset was already reported
        if (!named && !order && given.empty() && !coeff_errors)
            s.missing("preset", "plant needs a preset or an order with coefficients");
        else if (!named && !order) s.missing("order", "plant needs an order (parabolic or hyperbolic) without a preset");
        return std::nullopt;
    }
    for (auto& [kind, field] : given) {
        switch (kind) {
            case FieldKind::Diffusion: fields->a1 = field; break;
            case FieldKind::Convection: fields->a2 = field; break;
            case FieldKind::Reaction: fields->phi = field; break;
            case FieldKind::Damping: fields->b = field; break;
            case FieldKind::Disturbance: fields->f = field; break;
        }
    }
    if (*order == Order::Parabolic) fields->b.reset();
    try {
        return PlantSpec(name.value_or(base ? base->name() : std::string("custom")), *order, length, *fields, bc,
                         allow);
    } catch (const Error& e) {
        s.missing("", e.what());
        return std::nullopt;
    }
}

inline std::optional<ActuationPartition> read_partition(Section& s, double length) {
    std::optional<ActuationPartition> out;
    const auto n = s.integer("N");
    const auto bp = s.numbers("breakpoints");
    const auto sensors = s.numbers("sensors");
    const auto delta = s.number("delta");
    s.finish();
    try {
        if (n && (bp || sensors)) {
            s.invalid_here("N", "give either N or breakpoints/sensors, not both");
        } else if (n) {
            if (*n < 1) s.invalid_here("N", "N must be >= 1");
            else out = ActuationPartition::uniform(length, static_cast<int>(*n));
        } else if (bp && sensors) {
            if (std::abs(bp->back() - length) > 1e-12 * length)
                s.invalid_here("breakpoints", "last breakpoint must equal the plant length");
            else out = ActuationPartition(*bp, *sensors, delta);
        } else {
            s.missing("N", "partition needs N or breakpoints and sensors");
        }
    } catch (const Error& e) {
        s.missing("", e.what());
    }
    return out;
}

inline void read_simulation(Section& s, SimulationOptions& o, double length) {
    if (const auto c = s.integer("cells")) {
        if (*c < 4) s.invalid_here("cells", "cells must be >= 4");
        else o.cells = static_cast<std::size_t>(*c);
    }
    if (const auto dt = s.number("dt")) {
        if (!(*dt > 0.0)) s.invalid_here("dt", "dt must be > 0");
        else o.dt = *dt;
    }
    if (const auto g = s.boolean("enforce_guard")) o.enforce_guard = *g;
    if (const auto t = s.number("t_end")) {
        if (!(*t > 0.0)) s.invalid_here("t_end", "t_end must be > 0");
        else o.t_end = *t;
    }
    if (const auto r = s.integer("record_every")) {
        if (*r < 1) s.invalid_here("record_every", "record_every must be >= 1");
        else o.record_every = static_cast<std::size_t>(*r);
    }
    if (const auto d = s.text("diffusion")) {
        if (*d == "expanded") o.diffusion = DiffusionForm::Expanded;
        else if (*d == "conservative") o.diffusion = DiffusionForm::Conservative;
        else s.invalid_here("diffusion", "diffusion must be expanded or conservative");
    }
    if (const auto b = s.number("blowup_threshold")) {
        if (!(*b > 0.0)) s.invalid_here("blowup_threshold", "blowup_threshold must be > 0");
        else o.blowup_threshold = *b;
    }
    auto ic = s.sub("initial");
    const auto kind = ic.text("kind").value_or("sine");
    const double amp = ic.number("amplitude").value_or(1.0);
    ic.finish();
    if (kind == "sine") o.initial = InitialCondition::sine(length, amp);
    else if (kind == "zero") o.initial = InitialCondition::zero();
    else ic.invalid_here("kind", "initial kind must be sine or zero");
    s.finish();
}

inline std::vector<std::string> section_names() {
    return {"plant", "partition", "shape", "controller", "simulation", "lmi", "verify", "compare", "output"};
}

inline RunConfig build(const YAML::Node& root, std::string preset) {
    std::vector<ConfigIssue> issues;
    Section top(root, "", issues);
    if (!top.present()) {
        issues.push_back({IssueKind::Invariant, "", line_of(root), column_of(root), "configuration must be a mapping"});
        throw ConfigError(std::move(issues));
    }

    auto plant_s = top.sub("plant");
    auto plant = read_plant(plant_s);
    const double length = plant ? plant->length() : 1.0;

    auto part_s = top.sub("partition");
    auto partition = read_partition(part_s, length);
    const std::size_t intervals = partition ? partition->size() : 0;

    auto shape_s = top.sub("shape");
    std::optional<ShapeSpec> shape;
    if (!shape_s.present()) shape_s.missing("", "shape section is required");
    else shape = read_shape(shape_s, intervals);

    auto ctrl = top.sub("controller");
    const auto gain = ctrl.number("K");
    if (!gain) ctrl.missing("K", "controller needs a gain K");
    else if (!(*gain > 0.0)) ctrl.invalid_here("K", "K must be > 0 (the control is u = -K F)");
    ctrl.finish();

    SimulationOptions sim;
    sim.initial = InitialCondition::sine(length);
    auto sim_s = top.sub("simulation");
    read_simulation(sim_s, sim, length);

    LmiSettings lmi;
    auto lmi_s = top.sub("lmi");
    if (const auto tol = lmi_s.number("tolerance")) {
        if (!(*tol >= 0.0)) lmi_s.invalid_here("tolerance", "tolerance must be >= 0");
        else lmi.tolerance = *tol;
    }
    if (const auto fx = lmi_s.number("fx_sq_sup")) {
        if (!(*fx >= 0.0)) lmi_s.invalid_here("fx_sq_sup", "fx_sq_sup must be >= 0");
        else lmi.fx_sq_sup = *fx;
    }
    const double k = gain && *gain > 0.0 ? *gain : 1.0;
    if (lmi_s.has("tuning")) {
        auto ts = lmi_s.sub("tuning");
        lmi.tuning = read_tuning(ts, k);
    }
    auto grids = lmi_s.sub("grids");
    lmi.gain_grid_given = grids.has("K");
    lmi.grids.gain = read_grid(grids, "K", {k});
    lmi.grids.young_weight = read_grid(grids, "R", lmi.grids.young_weight);
    lmi.grids.decay_rate = read_grid(grids, "delta", lmi.grids.decay_rate);
    lmi.grids.beta1 = read_grid(grids, "beta1", lmi.grids.beta1);
    lmi.grids.beta2 = read_grid(grids, "beta2", lmi.grids.beta2);
    lmi.grids.cross_weight = read_grid(grids, "p", lmi.grids.cross_weight);
    for (double p : lmi.grids.cross_weight)
        if (!(std::abs(p) < 0.5)) {
            grids.invalid_here("p", "p grid values must satisfy |p| < 0.5");
            break;
        }
    grids.finish();
    lmi_s.finish();

    VerifySettings verify;
    auto ver = top.sub("verify");
    if (const auto th = ver.number("threshold")) {
        if (!(*th >= 0.0)) ver.invalid_here("threshold", "threshold must be >= 0");
        else verify.threshold = *th;
    }
    if (ver.has("tuning")) {
        auto ts = ver.sub("tuning");
        verify.tuning = read_tuning(ts, k);
    }
    ver.finish();

    std::optional<ShapeSpec> baseline = ConstantShape{};
    auto cmp = top.sub("compare");
    if (cmp.has("baseline")) {
        auto bs = cmp.sub("baseline");
        baseline = read_shape(bs, intervals);
    }
    cmp.finish();

    OutputSettings output;
    auto out = top.sub("output");
    output.dir = out.text("dir").value_or(output.dir);
    output.prefix = out.text("prefix").value_or(preset.empty() ? output.prefix : preset);
    if (output.prefix.empty() || output.prefix.find('/') != std::string::npos)
        out.invalid_here("prefix", "prefix must be a nonempty file name stem");
    out.finish();

    top.finish();

    // Cross-section checks that need the assembled pieces.
    if (plant && partition && std::abs(partition->length() - plant->length()) > 1e-12 * plant->length())
        part_s.missing("", "partition length differs from the plant length");
    auto bind = [&](const std::optional<ShapeSpec>& sh, Section& where) {
        if (!sh || !partition) return;
        try {
            (void)bind_shape(*sh, *partition);
        } catch (const Error& e) {
            where.missing("", e.what());
        }
    };
    bind(shape, shape_s);
    bind(baseline, cmp);
    if (plant && partition) {
        try {
            const Mesh mesh(plant->length(), sim.cells);
            (void)snap_sensors(*partition, mesh);
            if (sim.dt && sim.enforce_guard && *sim.dt > stability_guard(*plant, mesh) * (1.0 + 1e-12))
                sim_s.invalid_here("dt", "dt exceeds the stability guard " + std::to_string(stability_guard(*plant, mesh)));
        } catch (const Error& e) {
            sim_s.missing("cells", e.what());
        }
    }

    if (!issues.empty() || !plant || !partition || !shape || !gain || !baseline) {
        if (issues.empty()) issues.push_back({IssueKind::Invariant, "", -1, -1, "configuration is incomplete"});
        throw ConfigError(std::move(issues));
    }
    return RunConfig{std::move(preset), std::move(*plant), std::move(*partition), std::move(*shape),
                     std::move(*baseline), *gain, std::move(sim), std::move(lmi), std::move(verify),
                     std::move(output)};
}

}  // namespace config_detail

inline std::vector<std::string> config_presets() { return presets::names(); }

/// Preset defaults, then the document, then `key.path=value` overrides (values parsed as YAML).
inline RunConfig load_config_text(const std::string& text, const std::string& preset = {},
                                  const std::vector<std::string>& overrides = {}) {
    using namespace config_detail;
    std::vector<ConfigIssue> issues;
    YAML::Node base;
    if (!preset.empty()) {
        base = preset_node(preset);
        if (!base) {
            std::string list;
            for (const auto& n : config_presets()) list += (list.empty() ? "" : ", ") + n;
            throw ConfigError({{IssueKind::Invariant, "preset", -1, -1, "unknown preset '" + preset + "' (" + list + ")"}});
        }
    }
    YAML::Node doc;
    try {
        doc = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError({{IssueKind::Parse, "", e.mark.line + 1, e.mark.column + 1, e.msg}});
    }
    if (!doc || doc.IsNull()) doc = YAML::Node(YAML::NodeType::Map);
    for (const auto& o : overrides) {
        if (!doc.IsMap()) break;  // reported by build
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) {
            issues.push_back({IssueKind::Parse, o, -1, -1, "override must look like key.path=value"});
            continue;
        }
        const auto key = o.substr(0, eq);
        try {
            set_path(doc, key, YAML::Clone(YAML::Load(o.substr(eq + 1))));  // clone drops marks of the override text
        } catch (const YAML::ParserException& e) {
            issues.push_back({IssueKind::Parse, key, -1, e.mark.column + 1, "override value: " + e.msg});
        }
    }
    // A user-chosen shape family replaces the preset's shape section instead of inheriting its parameters.
    if (base && doc.IsMap()) {
        const YAML::Node& user = doc;
        if (user["shape"] && user["shape"].IsMap() && user["shape"]["family"]) base.remove("shape");
    }
    YAML::Node root = merge(base, doc);
    if (!issues.empty()) throw ConfigError(std::move(issues));
    return build(root, preset);
}

inline RunConfig load_config(const std::string& path, const std::string& preset = {},
                             const std::vector<std::string>& overrides = {}) {
    std::string text;
    if (!path.empty()) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError({{IssueKind::Parse, "", -1, -1, "cannot open config file '" + path + "'"}});
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    return load_config_text(text, preset, overrides);
}

}  // namespace ssc
