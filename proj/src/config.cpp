#include "tracefem/config.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace tracefem {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& section, const std::set<std::string>& allowed)
{
    if (!j.is_object()) {
        throw ConfigurationError("config: section '" + section + "' must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (allowed.count(key) == 0) {
            throw ConfigurationError("config: unknown key '" + key + "' in section '" + section + "'");
        }
    }
}

std::vector<json> as_list(const json& j)
{
    if (j.is_array()) {
        return {j.begin(), j.end()};
    }
    return {j};
}

}  // namespace

std::array<int, 3> root_lattice(const Box& domain, int n0)
{
    if (n0 < 1) {
        throw ConfigurationError("config: mesh.n0 must be positive");
    }
    const Vec3 ext = domain.extent();
    const double h = ext[0] / n0;
    std::array<int, 3> out{n0, 0, 0};
    for (int a = 1; a < 3; ++a) {
        const double n = ext[a] / h;
        out[a] = static_cast<int>(std::lround(n));
        if (out[a] < 1 || std::abs(n - out[a]) > 1e-9 * n) {
            throw ConfigurationError("config: mesh.n0 does not give cubic cells for this domain");
        }
    }
    return out;
}

RunConfig parse_config(std::istream& in)
{
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw ConfigurationError(std::string("config: ") + e.what());
    }
    check_keys(j, "root", {"case", "mesh", "params", "solver", "output", "kernels"});
    RunConfig cfg;
    try {
        if (j.contains("case")) {
            const json& c = j["case"];
            if (c.is_string()) {
                cfg.case_name = c.get<std::string>();
            } else {
                check_keys(c, "case", {"name", "alpha", "beta", "x0"});
                cfg.case_name = c.value("name", cfg.case_name);
                cfg.case_params.alpha = c.value("alpha", cfg.case_params.alpha);
                cfg.case_params.beta = c.value("beta", cfg.case_params.beta);
                cfg.case_params.x0 = c.value("x0", cfg.case_params.x0);
            }
        }
        if (j.contains("mesh")) {
            const json& m = j["mesh"];
            check_keys(m, "mesh", {"n0", "refine_levels", "band"});
            cfg.default_levels = false;
            const auto n0 = as_list(m.value("n0", json()));
            const auto rl = as_list(m.value("refine_levels", json(0)));
            const double band = m.value("band", 1.0);
            const std::size_t count = std::max(n0.size(), rl.size());
            if ((n0.size() != 1 && n0.size() != count) || (rl.size() != 1 && rl.size() != count)) {
                throw ConfigurationError("config: mesh.n0 and mesh.refine_levels lists differ in length");
            }
            for (std::size_t k = 0; k < count; ++k) {
                const json& nj = n0.size() == 1 ? n0[0] : n0[k];
                MeshLevel level;
                level.roots = {nj.is_null() ? 0 : nj.get<int>(), 0, 0};
                level.refine_levels = (rl.size() == 1 ? rl[0] : rl[k]).get<int>();
                level.band = band;
                if (level.refine_levels < 0) {
                    throw ConfigurationError("config: mesh.refine_levels must be non-negative");
                }
                cfg.levels.push_back(level);
            }
        }
        if (j.contains("params")) {
            const json& p = j["params"];
            check_keys(p, "params", {"rho_e", "rho_u", "rho_p", "rho_dir", "penalty_h", "dirichlet"});
            FormParameters& fp = cfg.options.params;
            fp.rho_e = p.value("rho_e", fp.rho_e);
            fp.rho_u = p.value("rho_u", fp.rho_u);
            fp.rho_p = p.value("rho_p", fp.rho_p);
            fp.rho_dir = p.value("rho_dir", fp.rho_dir);
            const std::string ph = p.value("penalty_h", std::string("local"));
            if (ph == "local") {
                fp.penalty_h = PenaltyScale::local;
            } else if (ph == "global") {
                fp.penalty_h = PenaltyScale::global;
            } else {
                throw ConfigurationError("config: params.penalty_h must be 'local' or 'global'");
            }
            fp.validate();
            if (p.contains("dirichlet")) {
                cfg.dirichlet = parse_dirichlet_treatment(p["dirichlet"].get<std::string>());
            }
        }
        if (j.contains("solver")) {
            const json& s = j["solver"];
            check_keys(s, "solver", {"method", "direct_limit", "tol", "max_iterations", "restart"});
            SolverOptions& so = cfg.options.solver;
            so.method = parse_solver_method(s.value("method", std::string("auto")));
            so.direct_limit = s.value("direct_limit", so.direct_limit);
            so.tolerance = s.value("tol", so.tolerance);
            so.max_iterations = s.value("max_iterations", so.max_iterations);
            so.restart = s.value("restart", so.restart);
            if (!(so.tolerance > 0.0)) {
                throw ConfigurationError("config: solver.tol must be positive");
            }
        }
        if (j.contains("output")) {
            const json& o = j["output"];
            check_keys(o, "output", {"csv", "vtk"});
            cfg.csv_path = o.value("csv", std::string());
            cfg.vtk_path = o.value("vtk", std::string());
        }
        if (j.contains("kernels")) {
            cfg.kernels = j["kernels"].get<std::string>();
            if (cfg.kernels != "auto" && cfg.kernels != "scalar" && cfg.kernels != "avx2") {
                throw ConfigurationError("config: kernels must be auto, scalar or avx2");
            }
        }
    } catch (const json::exception& e) {
        throw ConfigurationError(std::string("config: ") + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigurationError("config: cannot open " + path);
    }
    return parse_config(in);
}

RunOptions resolve_options(const RunConfig& config, const BenchmarkCase& bc)
{
    RunOptions options = config.options;
    options.params.dirichlet = config.dirichlet.value_or(bc.dirichlet);
    return options;
}

std::vector<MeshLevel> resolve_levels(const RunConfig& config, const BenchmarkCase& bc)
{
    if (config.default_levels) {
        return bc.levels;
    }
    std::vector<MeshLevel> out = config.levels;
    for (MeshLevel& level : out) {
        if (level.roots[0] == 0) {
            level.roots = bc.levels.front().roots;
        } else {
            level.roots = root_lattice(bc.network.domain(), level.roots[0]);
        }
    }
    return out;
}

}  // namespace tracefem
