#include "srcimg/config.hpp"

#include <cmath>
#include <set>

#include "srcimg/errors.hpp"
#include "srcimg/io.hpp"

namespace srcimg {

using nlohmann::json;

namespace {

// Reads the members of one JSON object and rejects the ones nobody asked for.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) throw ConfigError(where_, "expected an object");
    }

    std::string at(const std::string& key) const { return where_ + "/" + key; }
    bool has(const std::string& key) {
        seen_.insert(key);
        return obj_.contains(key) && !obj_.at(key).is_null();
    }
    const json& raw(const std::string& key) {
        seen_.insert(key);
        return obj_.at(key);
    }

    void number(const std::string& key, double& dst) {
        if (!has(key)) return;
        const json& v = obj_.at(key);
        if (!v.is_number()) throw ConfigError(at(key), "expected a number");
        dst = v.get<double>();
        if (!std::isfinite(dst)) throw ConfigError(at(key), "must be finite");
    }
    void integer(const std::string& key, int& dst) {
        if (!has(key)) return;
        const json& v = obj_.at(key);
        if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
        dst = v.get<int>();
    }
    void size(const std::string& key, size_t& dst) {
        if (!has(key)) return;
        const json& v = obj_.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(at(key), "expected a non-negative integer");
        dst = v.get<size_t>();
    }
    void u64(const std::string& key, std::uint64_t& dst) {
        if (!has(key)) return;
        const json& v = obj_.at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            throw ConfigError(at(key), "expected a non-negative integer");
        dst = v.get<std::uint64_t>();
    }
    void boolean(const std::string& key, bool& dst) {
        if (!has(key)) return;
        const json& v = obj_.at(key);
        if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
        dst = v.get<bool>();
    }
    void string(const std::string& key, std::string& dst) {
        if (!has(key)) return;
        const json& v = obj_.at(key);
        if (!v.is_string()) throw ConfigError(at(key), "expected a string");
        dst = v.get<std::string>();
    }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "unknown key");
    }

private:
    const json& obj_;
    std::string where_;
    std::set<std::string> seen_;
};

Vec2 point(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError(where, "expected a point [x, y]");
    return {v[0].get<double>(), v[1].get<double>()};
}

RegionPtr region_from_json(const json& doc, const std::string& where) {
    ObjectReader r(doc, where);
    std::string type;
    r.string("type", type);
    RegionPtr out;
    try {
        if (type == "polygon") {
            if (!r.has("vertices") || !r.raw("vertices").is_array()) throw ConfigError(r.at("vertices"), "expected a list of points");
            std::vector<Vec2> v;
            const json& a = r.raw("vertices");
            for (size_t i = 0; i < a.size(); ++i) v.push_back(point(a[i], r.at("vertices") + "/" + std::to_string(i)));
            out = std::make_shared<Polygon>(v);
        } else if (type == "disk" || type == "annulus") {
            if (!r.has("center")) throw ConfigError(r.at("center"), "missing");
            const Vec2 c = point(r.raw("center"), r.at("center"));
            double inner = 0.0, outer = 0.0;
            if (type == "annulus") r.number("r", inner);
            r.number("R", outer);
            out = std::make_shared<Annulus>(c, inner, outer);
        } else if (type == "implicit") {
            std::string g;
            r.string("g", g);
            if (!r.has("bbox") || !r.raw("bbox").is_array() || r.raw("bbox").size() != 4)
                throw ConfigError(r.at("bbox"), "expected [xlo, xhi, ylo, yhi]");
            const json& b = r.raw("bbox");
            out = std::make_shared<Implicit>(Expr::parse(g),
                                             BBox{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>(), true});
        } else if (type == "union" || type == "intersection") {
            if (!r.has("of") || !r.raw("of").is_array()) throw ConfigError(r.at("of"), "expected a list of regions");
            std::vector<RegionPtr> kids;
            const json& a = r.raw("of");
            for (size_t i = 0; i < a.size(); ++i) kids.push_back(region_from_json(a[i], r.at("of") + "/" + std::to_string(i)));
            out = type == "union" ? make_union(kids) : make_intersection(kids);
        } else if (type == "complement") {
            if (!r.has("of")) throw ConfigError(r.at("of"), "missing");
            out = make_complement(region_from_json(r.raw("of"), r.at("of")));
        } else {
            throw ConfigError(r.at("type"), "unknown region type '" + type + "'");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(where, e.what());
    }
    r.finish();
    return out;
}

Amplitude amplitude_from_json(const json& doc, const std::string& where) {
    if (doc.is_number()) return Amplitude::constant(doc.get<double>());
    ObjectReader r(doc, where);
    std::string type;
    r.string("type", type);
    Amplitude a;
    try {
        if (type == "constant") {
            double re = 1.0, im = 0.0;
            r.number("re", re);
            r.number("im", im);
            a = Amplitude::constant({re, im});
        } else if (type == "radial_exponential") {
            double k = 0.0;
            r.number("a", k);
            a = Amplitude::radial_exponential(k);
        } else if (type == "radial_affine") {
            double c = 0.0;
            r.number("c", c);
            a = Amplitude::radial_affine(c);
        } else if (type == "expression") {
            std::string f;
            r.string("f", f);
            a = Amplitude::expression(Expr::parse(f));
        } else {
            throw ConfigError(r.at("type"), "unknown amplitude type '" + type + "'");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(where, e.what());
    }
    r.finish();
    return a;
}

struct PresetDefaults {
    int L, Lambda;
};

PresetDefaults preset_defaults(const std::string& name) {
    if (name == "annulus") return {25, 30};
    if (name == "lshape") return {25, 30};
    if (name == "kite") return {21, 30};
    if (name == "mixed") return {15, 20};
    return {25, 30};
}

}  // namespace

std::vector<std::string> preset_names() { return {"annulus", "lshape", "kite", "mixed"}; }

SourceScene preset_scene(const std::string& name) {
    const auto one = Amplitude::constant(1.0);
    if (name == "annulus") return {{{std::make_shared<Annulus>(Vec2{-1, -1}, 0.5, 1.0), one}}};
    if (name == "lshape")
        return {{{std::make_shared<Polygon>(std::vector<Vec2>{{-1, -1}, {1, -1}, {1, 0}, {0, 0}, {0, 1}, {-1, 1}}), one}}};
    if (name == "kite")
        return {{{std::make_shared<Implicit>(Expr::parse("(x + 13*y^2/15)^2 + y^2 - 1"), BBox{-2, 1.1, -1.1, 1.1, true}),
                  one}}};
    if (name == "mixed") {
        auto disk = std::make_shared<Annulus>(Vec2{-1, -1}, 0.0, 1.0);
        auto big = std::make_shared<Polygon>(std::vector<Vec2>{{0, 0}, {1.5, 0}, {1.5, 1.5}, {0, 1.5}});
        auto small = std::make_shared<Polygon>(std::vector<Vec2>{{0, 0}, {0.75, 0}, {0.75, 0.75}, {0, 0.75}});
        return {{{disk, one}, {make_intersection({big, make_complement(small)}), one}}};
    }
    throw ConfigError("/preset", "unknown preset '" + name + "'");
}

SourceScene scene_from_json(const json& doc, const std::string& where) {
    ObjectReader r(doc, where);
    if (!r.has("components") || !r.raw("components").is_array() || r.raw("components").empty())
        throw ConfigError(r.at("components"), "expected a non-empty list of components");
    SourceScene s;
    const json& a = r.raw("components");
    for (size_t i = 0; i < a.size(); ++i) {
        const std::string w = r.at("components") + "/" + std::to_string(i);
        ObjectReader c(a[i], w);
        if (!c.has("region")) throw ConfigError(c.at("region"), "missing");
        Component comp{region_from_json(c.raw("region"), c.at("region")), Amplitude::constant(1.0)};
        if (c.has("amplitude")) comp.amplitude = amplitude_from_json(c.raw("amplitude"), c.at("amplitude"));
        c.finish();
        s.components.push_back(std::move(comp));
    }
    r.finish();
    return s;
}

ObservationSet ExperimentConfig::observation_set() const {
    if (!directions.empty()) return ObservationSet::from_directions(directions);
    return ObservationSet::make(L, gamma);
}

double ExperimentConfig::mu_value() const {
    if (mu) return *mu;
    return systematic ? systematic->mu : 0.0;
}

ExperimentConfig config_from_json(const json& doc) {
    ExperimentConfig c;
    const json root = doc.is_null() ? json::object() : doc;
    ObjectReader r(root, "");
    std::string description;
    r.string("description", description);
    r.string("preset", c.preset);
    if (r.has("scene")) {
        if (r.has("preset") && c.preset != "custom") throw ConfigError("/scene", "give either a preset or an inline scene");
        c.preset = "custom";
        c.scene_doc = r.raw("scene");
        c.scene = scene_from_json(c.scene_doc, "/scene");
    } else {
        c.scene = preset_scene(c.preset);
        const auto d = preset_defaults(c.preset);
        c.L = d.L;
        c.Lambda = d.Lambda;
    }
    if (r.has("amplitude")) {
        c.amplitude_override = r.raw("amplitude");
        const Amplitude a = amplitude_from_json(*c.amplitude_override, "/amplitude");
        for (auto& comp : c.scene.components) comp.amplitude = a;
    }

    r.integer("L", c.L);
    r.number("gamma", c.gamma);
    r.integer("Lambda", c.Lambda);
    if (r.has("directions")) {
        const json& a = r.raw("directions");
        if (!a.is_array() || a.empty()) throw ConfigError("/directions", "expected a non-empty list of unit vectors");
        for (size_t i = 0; i < a.size(); ++i) c.directions.push_back(point(a[i], "/directions/" + std::to_string(i)));
    }
    r.number("delta", c.delta);
    if (r.has("systematic")) {
        ObjectReader s(r.raw("systematic"), "/systematic");
        Systematic sys;
        s.number("mu", sys.mu);
        s.number("sigma", sys.sigma);
        s.finish();
        if (sys.sigma < 0) throw ConfigError("/systematic/sigma", "must be >= 0");
        c.systematic = sys;
    }
    r.u64("seed", c.seed);
    r.integer("resolution", c.quadrature.resolution);
    r.integer("refine_depth", c.quadrature.refine_depth);

    if (r.has("grid")) {
        ObjectReader g(r.raw("grid"), "/grid");
        g.number("xlo", c.grid.xlo);
        g.number("xhi", c.grid.xhi);
        g.number("ylo", c.grid.ylo);
        g.number("yhi", c.grid.yhi);
        g.size("P", c.grid.P);
        g.size("Q", c.grid.Q);
        g.finish();
    }
    if (r.has("indicators")) {
        const json& a = r.raw("indicators");
        if (!a.is_array()) throw ConfigError("/indicators", "expected a list of indicator names");
        c.indicators.clear();
        for (size_t i = 0; i < a.size(); ++i) {
            if (!a[i].is_string()) throw ConfigError("/indicators/" + std::to_string(i), "expected a string");
            try {
                c.indicators.push_back(indicator_from_string(a[i].get<std::string>()));
            } catch (const ArgumentError& e) {
                throw ConfigError("/indicators/" + std::to_string(i), e.what());
            }
        }
    }
    r.integer("oversample", c.indicator_options.oversample);
    r.number("epsilon", c.epsilon);
    if (r.has("mu")) {
        double m = 0.0;
        r.number("mu", m);
        c.mu = m;
    }
    std::string mode = "both";
    r.string("mu_mode", mode);
    if (mode == "both")
        c.mu_mode = MuMode::Both;
    else if (mode == "real")
        c.mu_mode = MuMode::RealOnly;
    else
        throw ConfigError("/mu_mode", "expected \"both\" or \"real\"");

    if (r.has("recovery")) {
        ObjectReader q(r.raw("recovery"), "/recovery");
        auto& o = c.recover_options;
        q.boolean("enabled", c.recover);
        q.boolean("correct", c.correct_recovery);
        std::string est = "atoms";
        q.string("estimator", est);
        if (est == "atoms")
            o.estimator = LineEstimator::Atoms;
        else if (est == "peaks")
            o.estimator = LineEstimator::Peaks;
        else
            throw ConfigError("/recovery/estimator", "expected \"atoms\" or \"peaks\"");
        q.number("tau_rel", o.detect.tau_rel);
        q.integer("window", o.detect.window);
        q.number("g_min", o.detect.g_min);
        q.integer("class_window", o.detect.class_window);
        q.number("atom_tau", o.atoms.tau);
        q.integer("max_atoms", o.atoms.max_atoms);
        q.number("eps_d", o.eps_d);
        q.number("rho", o.rho);
        q.number("eps_r", o.eps_r);
        q.number("eps_c", o.eps_c);
        q.integer("min_support", o.min_support);
        q.number("tangent_exclusion", o.tangent_exclusion);
        q.boolean("peel", o.peel_annuluses);
        q.boolean("edges", c.identify_edges);
        q.integer("edge_lambda", c.edge_options.lambda);
        q.integer("edge_lambda_cap", c.edge_options.lambda_cap);
        q.integer("edge_budget", c.edge_options.budget);
        q.u64("edge_seed", c.edge_options.seed);
        q.finish();
    }
    r.boolean("profiles", c.profiles);
    r.string("out", c.out);
    r.finish();

    // Invariants.
    if (c.directions.empty() && c.L < 1) throw ConfigError("/L", "must be >= 1");
    if (!(c.gamma > 0 && c.gamma <= 2)) throw ConfigError("/gamma", "must be in (0, 2]");
    if (c.Lambda < 2) throw ConfigError("/Lambda", "must be >= 2");
    if (c.delta < 0) throw ConfigError("/delta", "must be >= 0");
    if (c.quadrature.resolution < 64) throw ConfigError("/resolution", "must be >= 64");
    if (c.quadrature.refine_depth < 0) throw ConfigError("/refine_depth", "must be >= 0");
    if (c.indicator_options.oversample < 1) throw ConfigError("/oversample", "must be >= 1");
    if (!(c.epsilon > 0)) throw ConfigError("/epsilon", "must be > 0");
    try {
        c.grid.validate();
    } catch (const ArgumentError& e) {
        throw ConfigError("/grid", e.what());
    }
    const auto& o = c.recover_options;
    if (!(o.rho > 0 && o.rho <= 1)) throw ConfigError("/recovery/rho", "must be in (0, 1]");
    if (!(o.eps_d > 0)) throw ConfigError("/recovery/eps_d", "must be > 0");
    if (!(o.eps_r > 0) || !(o.eps_c > 0)) throw ConfigError("/recovery", "eps_r and eps_c must be > 0");
    if (o.min_support < 2) throw ConfigError("/recovery/min_support", "must be >= 2");
    if (c.edge_options.lambda < 1 || c.edge_options.lambda_cap < c.edge_options.lambda)
        throw ConfigError("/recovery/edge_lambda", "need 1 <= edge_lambda <= edge_lambda_cap");
    try {
        (void)c.observation_set();
    } catch (const ArgumentError& e) {
        throw ConfigError("/directions", e.what());
    }
    if (!c.scene.bbox().bounded) throw ConfigError("/scene", "scene is unbounded");
    return c;
}

ExperimentConfig load_config_text(const std::string& text) {
    json doc;
    try {
        doc = text.find_first_not_of(" \t\r\n") == std::string::npos ? json::object() : json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("byte " + std::to_string(e.byte), "malformed JSON");
    }
    return config_from_json(doc);
}

ExperimentConfig load_config_file(const std::string& path) { return load_config_text(io::read_text(path)); }

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["preset"] = c.preset;
    if (c.preset == "custom") j["scene"] = c.scene_doc;
    if (c.amplitude_override) j["amplitude"] = *c.amplitude_override;
    json comps = json::array();
    for (const auto& comp : c.scene.components)
        comps.push_back({{"region", comp.region->describe()}, {"amplitude", comp.amplitude.describe()}});
    j["scene_description"] = comps;
    j["L"] = c.L;
    j["gamma"] = c.gamma;
    j["Lambda"] = c.Lambda;
    if (!c.directions.empty()) {
        json d = json::array();
        for (auto v : c.directions) d.push_back({v.x, v.y});
        j["directions"] = d;
    }
    j["delta"] = c.delta;
    j["systematic"] = c.systematic ? json{{"mu", c.systematic->mu}, {"sigma", c.systematic->sigma}} : json(nullptr);
    j["seed"] = c.seed;
    j["resolution"] = c.quadrature.resolution;
    j["refine_depth"] = c.quadrature.refine_depth;
    j["grid"] = {{"xlo", c.grid.xlo}, {"xhi", c.grid.xhi}, {"ylo", c.grid.ylo},
                 {"yhi", c.grid.yhi}, {"P", c.grid.P},     {"Q", c.grid.Q}};
    json ind = json::array();
    for (auto k : c.indicators) ind.push_back(to_string(k));
    j["indicators"] = ind;
    j["oversample"] = c.indicator_options.oversample;
    j["epsilon"] = c.epsilon;
    j["mu"] = c.mu ? json(*c.mu) : json(nullptr);
    j["mu_mode"] = c.mu_mode == MuMode::Both ? "both" : "real";
    const auto& o = c.recover_options;
    j["recovery"] = {{"enabled", c.recover},
                     {"correct", c.correct_recovery},
                     {"estimator", o.estimator == LineEstimator::Atoms ? "atoms" : "peaks"},
                     {"tau_rel", o.detect.tau_rel},
                     {"window", o.detect.window},
                     {"g_min", o.detect.g_min},
                     {"class_window", o.detect.class_window},
                     {"atom_tau", o.atoms.tau},
                     {"max_atoms", o.atoms.max_atoms},
                     {"eps_d", o.eps_d},
                     {"rho", o.rho},
                     {"eps_r", o.eps_r},
                     {"eps_c", o.eps_c},
                     {"min_support", o.min_support},
                     {"tangent_exclusion", o.tangent_exclusion},
                     {"peel", o.peel_annuluses},
                     {"edges", c.identify_edges},
                     {"edge_lambda", c.edge_options.lambda},
                     {"edge_lambda_cap", c.edge_options.lambda_cap},
                     {"edge_budget", c.edge_options.budget},
                     {"edge_seed", c.edge_options.seed}};
    j["profiles"] = c.profiles;
    j["out"] = c.out;
    return j;
}

}  // namespace srcimg
