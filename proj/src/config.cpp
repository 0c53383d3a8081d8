#include "hjbopt/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hjbopt/error.hpp"

namespace hjbopt::config {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { fail(errkind::config, what); }

double num(const json& j, const char* key, std::optional<double> def = std::nullopt) {
    if (!j.contains(key)) {
        if (def) return *def;
        bad(std::string("missing numeric field: ") + key);
    }
    if (!j[key].is_number()) bad(std::string("field is not numeric: ") + key);
    return j[key].get<double>();
}

Vec vec_field(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_array()) bad(std::string("missing array field: ") + key);
    std::vector<double> v = j[key].get<std::vector<double>>();
    if (v.empty() || v.size() > kMaxDim) bad(std::string("bad dimension in field: ") + key);
    return Vec::from(v);
}

geometry::MinimizerSet parse_set(const json& j, const Box& box) {
    if (!j.is_object() || !j.contains("type")) bad("minimizer set needs a type");
    std::string type = j["type"].get<std::string>();
    if (type == "finite_points") {
        if (!j.contains("points") || !j["points"].is_array()) bad("finite_points needs points");
        std::vector<Vec> pts;
        for (const auto& p : j["points"]) pts.push_back(Vec::from(p.get<std::vector<double>>()));
        return geometry::MinimizerSet::finite(std::move(pts), box);
    }
    if (type == "affine_diagonal") return geometry::MinimizerSet::affine_diagonal(box);
    if (type == "axis_lattice")
        return geometry::MinimizerSet::axis_lattice(
            num(j, "period", 6.283185307179586476925286766559), box);
    if (type == "product_hyperbola") return geometry::MinimizerSet::product_hyperbola(box);
    bad("unknown minimizer set type: " + type);
}

}  // namespace

objective::ObjectiveSpec ExperimentConfig::make_objective() const {
    return objective::builtin_objective(objective_name, objective_params, domain);
}

grid::RectGrid ExperimentConfig::make_grid(bool quick) const {
    std::vector<std::size_t> n = nodes;
    if (quick)
        for (auto& v : n) v = v / 2 + 1;
    return grid::RectGrid::make(domain, n);
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& e) {
        bad(std::string("config is not valid JSON: ") + e.what());
    }

    ExperimentConfig cfg;
    if (!j.contains("objective") || !j["objective"].is_object())
        bad("missing objective section");
    if (!j.contains("domain") || !j["domain"].is_object()) bad("missing domain section");

    const json& dom = j["domain"];
    cfg.domain.lower = vec_field(dom, "lower");
    cfg.domain.upper = vec_field(dom, "upper");
    if (cfg.domain.lower.dim() != cfg.domain.upper.dim()) bad("domain lower/upper dim mismatch");
    for (int i = 0; i < cfg.domain.dim(); ++i)
        if (!(cfg.domain.lower[i] < cfg.domain.upper[i])) bad("domain has empty extent");
    if (!dom.contains("nodes") || !dom["nodes"].is_array()) bad("domain needs nodes");
    for (const auto& v : dom["nodes"]) {
        if (!v.is_number_unsigned() || v.get<std::uint64_t>() < 3) bad("nodes must be >= 3");
        cfg.nodes.push_back(v.get<std::size_t>());
    }
    if (cfg.nodes.size() != static_cast<std::size_t>(cfg.domain.dim()))
        bad("nodes list does not match domain dimension");

    const json& ob = j["objective"];
    if (!ob.contains("name")) bad("objective needs a name");
    cfg.objective_name = ob["name"].get<std::string>();
    if (ob.contains("params")) {
        const json& p = ob["params"];
        cfg.objective_params.c = num(p, "c", 1.0);
        cfg.objective_params.mu = num(p, "mu", 0.1);
        cfg.objective_params.dim = static_cast<int>(num(p, "dim", cfg.domain.dim()));
        if (p.contains("center")) cfg.objective_params.center = vec_field(p, "center");
        if (p.contains("set")) cfg.objective_params.set = parse_set(p["set"], cfg.domain);
    }

    cfg.lambda = num(j, "lambda");
    if (!(cfg.lambda > 0)) bad("lambda must be positive");

    if (j.contains("solver")) {
        const json& s = j["solver"];
        cfg.solver.dtau = num(s, "dtau", cfg.solver.dtau);
        cfg.solver.tol = num(s, "tol", cfg.solver.tol);
        cfg.solver.max_iters = static_cast<std::size_t>(num(s, "max_iters", 50000));
        cfg.solver.control_magnitudes =
            static_cast<int>(num(s, "control_magnitudes", cfg.solver.control_magnitudes));
        cfg.solver.control_directions =
            static_cast<int>(num(s, "control_directions", cfg.solver.control_directions));
        cfg.solver.control_bound = num(s, "control_bound", 0.0);
        if (!(cfg.solver.dtau > 0) || !(cfg.solver.tol > 0)) bad("solver dtau/tol must be positive");
        if (cfg.solver.control_magnitudes < 2) bad("control_magnitudes must be >= 2");
    }

    if (j.contains("trajectory")) {
        const json& t = j["trajectory"];
        cfg.traj.x0 = vec_field(t, "x0");
        if (cfg.traj.x0.dim() != cfg.domain.dim()) bad("x0 dimension mismatch");
        cfg.traj.T = num(t, "T", cfg.traj.T);
        cfg.traj.dt = num(t, "dt", cfg.traj.dt);
        if (!(cfg.traj.T > 0) || !(cfg.traj.dt > 0) || cfg.traj.dt > cfg.traj.T)
            bad("trajectory needs 0 < dt <= T");
        if (t.contains("policy")) {
            const json& p = t["policy"];
            std::string kind = p.contains("type") ? p["type"].get<std::string>() : "optimal";
            if (kind == "optimal") {
                cfg.traj.policy = PolicyKind::optimal;
            } else if (kind == "quasi") {
                cfg.traj.policy = PolicyKind::quasi;
                cfg.traj.quasi.eta = num(p, "eta");
                cfg.traj.quasi.eps0 = num(p, "eps0");
                if (!p.contains("seed")) bad("quasi policy needs a seed");
                cfg.traj.quasi.seed = p["seed"].get<std::uint64_t>();
                cfg.traj.quasi.bias_rel = num(p, "bias_rel", cfg.traj.quasi.bias_rel);
                if (cfg.traj.quasi.eta < 0 || cfg.traj.quasi.eps0 < 0)
                    bad("quasi policy needs eta, eps0 >= 0");
            } else if (kind == "sampled") {
                cfg.traj.policy = PolicyKind::sampled;
                cfg.traj.sampled.delta_min = num(p, "delta_min");
                cfg.traj.sampled.delta_max = num(p, "delta_max");
                cfg.traj.sampled.sigma = num(p, "sigma");
                if (!p.contains("seed")) bad("sampled policy needs a seed");
                cfg.traj.sampled.seed = p["seed"].get<std::uint64_t>();
                if (!(cfg.traj.sampled.delta_min > 0) ||
                    cfg.traj.sampled.delta_min > cfg.traj.sampled.delta_max)
                    bad("sampled policy needs 0 < delta_min <= delta_max");
                if (!(cfg.traj.sampled.sigma > 0)) bad("sampled policy needs sigma > 0");
            } else {
                bad("unknown policy type: " + kind);
            }
        }
    }

    if (j.contains("analysis")) {
        const json& a = j["analysis"];
        cfg.analysis.r = num(a, "r", cfg.analysis.r);
        cfg.analysis.floor = num(a, "floor", cfg.analysis.floor);
        cfg.analysis.tol_rate = num(a, "tol_rate", cfg.analysis.tol_rate);
        cfg.analysis.scan_step = num(a, "scan_step", cfg.analysis.scan_step);
        if (a.contains("deltas")) cfg.analysis.deltas = a["deltas"].get<std::vector<double>>();
        if (!(cfg.analysis.r > 0)) bad("analysis r must be positive");
    }

    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    require(static_cast<bool>(is), errkind::config, "cannot open config: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

std::string text_checksum(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string file_checksum(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(static_cast<bool>(is), errkind::io, "cannot open for checksum: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return text_checksum(ss.str());
}

void RunManifest::add_file(const std::string& dir, const std::string& name) {
    std::string path = dir + "/" + name;
    std::ifstream is(path, std::ios::binary | std::ios::ate);
    require(static_cast<bool>(is), errkind::io, "manifest: missing file " + path);
    ManifestEntry e;
    e.name = name;
    e.bytes = static_cast<std::uint64_t>(is.tellg());
    e.checksum = file_checksum(path);
    files.push_back(e);
}

void RunManifest::save(const std::string& path) const {
    json j;
    j["config_hash"] = config_hash;
    j["tool_version"] = tool_version;
    json stages = json::object();
    for (const auto& [k, v] : stage_seconds) stages[k] = v;
    j["stage_seconds"] = stages;
    json fl = json::array();
    for (const auto& f : files)
        fl.push_back({{"name", f.name}, {"bytes", f.bytes}, {"checksum", f.checksum}});
    j["files"] = fl;
    std::ofstream os(path, std::ios::trunc);
    require(static_cast<bool>(os), errkind::io, "cannot write manifest: " + path);
    os << j.dump(2) << "\n";
}

}  // namespace hjbopt::config
