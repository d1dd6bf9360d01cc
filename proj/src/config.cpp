#include "twolayer/config.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "twolayer/error.hpp"

namespace twolayer {

namespace {

// Keys are consumed as they are read; anything left over is unknown.
class Section {
public:
    Section(const Json& j, std::string path) : path_(std::move(path)) {
        if (!j.is_object()) throw ValidationError("'" + path_ + "' must be an object");
        for (const auto& [key, value] : j.items()) pending_.emplace(key, value);
    }

    std::optional<Json> take(const std::string& key) {
        auto it = pending_.find(key);
        if (it == pending_.end()) return std::nullopt;
        Json v = it->second;
        pending_.erase(it);
        return v;
    }

    void number(const std::string& key, double& out) {
        if (auto v = take(key)) {
            if (!v->is_number()) throw ValidationError("'" + qualified(key) + "' must be a number");
            out = v->get<double>();
        }
    }

    bool optional_number(const std::string& key, double& out) {
        if (!pending_.contains(key)) return false;
        number(key, out);
        return true;
    }

    void integer(const std::string& key, int& out) {
        if (auto v = take(key)) {
            if (!v->is_number_integer()) throw ValidationError("'" + qualified(key) + "' must be an integer");
            out = v->get<int>();
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (auto v = take(key)) {
            if (!v->is_boolean()) throw ValidationError("'" + qualified(key) + "' must be true or false");
            out = v->get<bool>();
        }
    }

    void number_list(const std::string& key, std::vector<double>& out) {
        if (auto v = take(key)) {
            if (!v->is_array()) throw ValidationError("'" + qualified(key) + "' must be an array of numbers");
            out.clear();
            for (const auto& e : *v) {
                if (!e.is_number()) throw ValidationError("'" + qualified(key) + "' must be an array of numbers");
                out.push_back(e.get<double>());
            }
        }
    }

    std::optional<Section> child(const std::string& key) {
        if (auto v = take(key)) return Section(*v, qualified(key));
        return std::nullopt;
    }

    void finish() const {
        if (!pending_.empty()) {
            throw ValidationError("unknown configuration key '" + qualified(pending_.begin()->first) + "'");
        }
    }

    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    std::string path_;
    std::map<std::string, Json> pending_;
};

void read_matrix(Section& s, MatrixParams& m) {
    s.number("alpha0", m.alpha0);
    s.number("k", m.k);
    s.number("eps0", m.eps0);
    s.number("km", m.km);
    s.number("Clim", m.Clim);
    s.number("beta0", m.beta0);
    s.number("delta0", m.delta0);
    s.number("D0", m.D0);
    s.number("l0", m.l0);
    s.number("M", m.M);
    s.finish();
}

void read_tissue(Section& s, TissueParams& t) {
    s.number("ka", t.ka);
    s.number("kd", t.kd);
    s.number("ki", t.ki);
    s.number("kid", t.kid);
    s.number("D1", t.D1);
    s.number("l1", t.l1);
    s.finish();
}

void read_interface(Section& s, InterfaceParams& i) {
    if (auto v = s.take("Pm")) {
        if (v->is_string() && (*v == "infinite" || *v == "inf")) {
            i.Pm = InterfaceParams::kInfinite;
        } else if (v->is_number()) {
            i.Pm = v->get<double>();
        } else {
            throw ValidationError("'" + s.qualified("Pm") + "' must be a number or \"infinite\"");
        }
    }
    s.number("sigma", i.sigma);
    s.finish();
}

void read_solver(Section& s, SolverConfig& c) {
    s.number("dt", c.dt);
    s.number("t_end", c.t_end);
    s.number("theta", c.theta);
    if (auto v = s.take("outer_bc")) {
        if (!v->is_string()) throw ValidationError("'solver.outer_bc' must be \"zero-flux\" or \"sink\"");
        c.outer_bc = outer_boundary_from_string(v->get<std::string>());
    }
    s.integer("sample_every", c.sample_every);
    s.boolean("clamp_nonnegative", c.clamp_nonnegative);
    s.finish();
}

std::string locate_parse_error(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t n = 0; n + 1 < byte && n < text.size(); ++n) {
        if (text[n] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

RunSpec parse_config(const std::string& text) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ValidationError("configuration parse error at " + locate_parse_error(text, e.byte) + ": " +
                              e.what());
    }
    if (root.is_object() && root.contains("manifest_version")) {
        if (!root.contains("config")) throw ValidationError("run manifest has no 'config' object");
        root = Json(root["config"]);
    }

    RunSpec spec = default_run_spec();
    Section top(root, "");
    if (auto s = top.child("matrix")) read_matrix(*s, spec.params.matrix);
    if (auto s = top.child("tissue")) read_tissue(*s, spec.params.tissue);
    if (auto s = top.child("interface")) read_interface(*s, spec.params.interface);
    if (auto s = top.child("solver")) read_solver(*s, spec.solver);
    if (auto s = top.child("grid")) {
        s->integer("nx0", spec.grid.nx0);
        s->integer("nx1", spec.grid.nx1);
        s->finish();
    }
    spec.probes = default_probes(spec.params);
    if (auto s = top.child("probes")) {
        s->number_list("matrix", spec.probes.matrix);
        s->number_list("tissue", spec.probes.tissue);
        s->finish();
    }
    if (auto s = top.child("analytic")) {
        double a = 0.0, b = 0.0;
        if (s->optional_number("a", a)) spec.analytic.a = a;
        if (s->optional_number("b", b)) spec.analytic.b = b;
        s->number("E1", spec.analytic.E1);
        s->number("E2", spec.analytic.E2);
        s->finish();
    }
    top.finish();
    validate_run_spec(spec);
    return spec;
}

RunSpec load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open configuration file '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

Json write_config(const RunSpec& spec) {
    const MatrixParams& m = spec.params.matrix;
    const TissueParams& t = spec.params.tissue;
    const InterfaceParams& i = spec.params.interface;
    Json j;
    j["matrix"] = {{"alpha0", m.alpha0}, {"k", m.k},   {"eps0", m.eps0}, {"km", m.km},
                   {"Clim", m.Clim},     {"beta0", m.beta0}, {"delta0", m.delta0},
                   {"D0", m.D0},         {"l0", m.l0}, {"M", m.M}};
    j["tissue"] = {{"ka", t.ka}, {"kd", t.kd}, {"ki", t.ki}, {"kid", t.kid}, {"D1", t.D1}, {"l1", t.l1}};
    j["interface"] = Json::object();
    if (i.perfect_contact()) {
        j["interface"]["Pm"] = "infinite";
    } else {
        j["interface"]["Pm"] = i.Pm;
    }
    j["interface"]["sigma"] = i.sigma;
    const SolverConfig& c = spec.solver;
    j["solver"] = {{"dt", c.dt},
                   {"t_end", c.t_end},
                   {"theta", c.theta},
                   {"outer_bc", to_string(c.outer_bc)},
                   {"sample_every", c.sample_every},
                   {"clamp_nonnegative", c.clamp_nonnegative}};
    j["grid"] = {{"nx0", spec.grid.nx0}, {"nx1", spec.grid.nx1}};
    j["probes"] = {{"matrix", spec.probes.matrix}, {"tissue", spec.probes.tissue}};
    Json an = Json::object();
    if (spec.analytic.a) an["a"] = *spec.analytic.a;
    if (spec.analytic.b) an["b"] = *spec.analytic.b;
    an["E1"] = spec.analytic.E1;
    an["E2"] = spec.analytic.E2;
    j["analytic"] = an;
    return j;
}

void validate_run_spec(const RunSpec& spec) {
    ValidationReport r = validate(spec.params);
    r.merge(validate(spec.solver));
    if (spec.grid.nx0 < 4) r.add("grid.nx0", "needs at least 4 cells");
    if (spec.grid.nx1 < 4) r.add("grid.nx1", "needs at least 4 cells");
    const double l0 = spec.params.matrix.l0;
    const double l1 = spec.params.tissue.l1;
    for (double x : spec.probes.matrix) {
        if (!(x >= 0.0 && x <= l0)) r.add("probes.matrix", "probe " + std::to_string(x) + " outside [0, l0]");
    }
    for (double x : spec.probes.tissue) {
        if (!(x >= l0 && x <= l1)) r.add("probes.tissue", "probe " + std::to_string(x) + " outside [l0, l1]");
    }
    if (spec.analytic.a && !(*spec.analytic.a >= 0.0)) r.add("analytic.a", "must be >= 0");
    if (spec.analytic.b && !(*spec.analytic.b >= 0.0)) r.add("analytic.b", "must be >= 0");
    require_valid(r);
}

}  // namespace twolayer
