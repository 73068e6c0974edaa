#include "gf/config.hpp"

#include "gf/errors.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gf {

namespace {

double require_number(const nlohmann::json& j, const std::string& field) {
    if (!j.contains(field) || !j[field].is_number())
        throw ConfigError("config: missing or non-numeric field '" + field + "'");
    return j[field].get<double>();
}

double number_or(const nlohmann::json& j, const std::string& field, double def) {
    if (!j.contains(field)) return def;
    if (j[field].is_string() && j[field].get<std::string>() == "auto") return def;
    if (!j[field].is_number()) throw ConfigError("config: field '" + field + "' must be a number");
    return j[field].get<double>();
}

}  // namespace

RateFunction parse_rate(const nlohmann::json& j, const std::string& which) {
    if (!j.is_object() || !j.contains("family"))
        throw ConfigError("config: rate '" + which + "' needs a 'family'");
    const std::string fam = j["family"].get<std::string>();
    if (fam == "constant") return RateFunction::constant(require_number(j, "c"));
    if (fam == "power") return RateFunction::power(require_number(j, "c"), require_number(j, "p"));
    if (fam == "two_term")
        return RateFunction::two_term(require_number(j, "c1"), require_number(j, "p1"),
                                      require_number(j, "c2"), require_number(j, "p2"));
    if (fam == "table") {
        if (!j.contains("x") || !j.contains("y"))
            throw ConfigError("config: table rate '" + which + "' needs 'x' and 'y' arrays");
        std::vector<double> x = j["x"].get<std::vector<double>>();
        std::vector<double> y = j["y"].get<std::vector<double>>();
        std::optional<RateAsymptotics> declared;
        if (j.contains("asymptotics")) {
            const auto& a = j["asymptotics"];
            declared = RateAsymptotics{{require_number(a, "coeff0"), require_number(a, "exp0")},
                                       {require_number(a, "coeff_inf"), require_number(a, "exp_inf")}};
        }
        return RateFunction::tabulated(x, y, declared);
    }
    throw ConfigError("config: unknown rate family '" + fam + "' for '" + which + "'");
}

FragmentationKernel parse_kernel(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("variant"))
        throw ConfigError("config: kernel needs a 'variant'");
    const std::string v = j["variant"].get<std::string>();
    if (v == "point_mass") return FragmentationKernel::point_mass(require_number(j, "r"));
    if (v == "uniform") return FragmentationKernel::uniform();
    if (v == "beta_shape")
        return FragmentationKernel::beta_shape(require_number(j, "mu0"), require_number(j, "mu1"));
    if (v == "tabulated") {
        if (!j.contains("knots") || !j.contains("values"))
            throw ConfigError("config: tabulated kernel needs 'knots' and 'values'");
        return FragmentationKernel::tabulated(j["knots"].get<std::vector<double>>(),
                                              j["values"].get<std::vector<double>>());
    }
    throw ConfigError("config: unknown kernel variant '" + v + "'");
}

RunConfig parse_config(const nlohmann::json& j) {
    if (!j.contains("model") || !j["model"].is_object())
        throw ConfigError("config: missing 'model' object");
    const auto& m = j["model"];
    if (!m.contains("tau")) throw ConfigError("config: model missing 'tau'");
    if (!m.contains("beta")) throw ConfigError("config: model missing 'beta'");
    if (!m.contains("kernel")) throw ConfigError("config: model missing 'kernel'");

    RunConfig cfg{RateModel{parse_rate(m["tau"], "tau"), parse_rate(m["beta"], "beta")},
                  parse_kernel(m["kernel"])};
    cfg.raw = j;
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();

    if (j.contains("simulation")) {
        const auto& s = j["simulation"];
        cfg.simulation.horizon = number_or(s, "horizon", cfg.simulation.horizon);
        cfg.simulation.burn_in = number_or(s, "burn_in", -1.0);
        cfg.simulation.stride = number_or(s, "stride", -1.0);
        cfg.simulation.n_chains = static_cast<int>(number_or(s, "n_chains", 0));
        cfg.simulation.x0 = number_or(s, "x0", 1.0);
    }
    if (j.contains("lyapunov")) {
        const auto& l = j["lyapunov"];
        cfg.lyap_a = number_or(l, "a", -1.0);
        cfg.lyap_b = number_or(l, "b", -1.0);
        cfg.lyap_eps = number_or(l, "epsilon", 0.1);
        cfg.lyap_C = number_or(l, "C", 0.5);
    }
    if (j.contains("pde")) {
        const auto& p = j["pde"];
        cfg.pde_x_min = number_or(p, "x_min", cfg.pde_x_min);
        cfg.pde_x_max = number_or(p, "x_max", cfg.pde_x_max);
        cfg.pde_cells = static_cast<int>(number_or(p, "cells", cfg.pde_cells));
        cfg.pde_tol = number_or(p, "tol", cfg.pde_tol);
        cfg.pde_max_time = number_or(p, "max_time", cfg.pde_max_time);
    }
    cfg.compare_bound = number_or(j, "compare_bound", cfg.compare_bound);
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config: parse error in '" + path + "': " + e.what());
    }
    return parse_config(j);
}

std::pair<double, double> RunConfig::lyapunov_exponents() const {
    if (lyap_a > 0.0 && lyap_b > 0.0) return {lyap_a, lyap_b};
    auto [a, b] = LyapunovSpec::select_exponents(kernel);
    return {lyap_a > 0.0 ? lyap_a : a, lyap_b > 0.0 ? lyap_b : b};
}

std::string RunConfig::hash() const {
    const std::string dump = raw.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const ConditionCheck& c) {
    return {{"name", c.name},
            {"lhs", c.lhs},
            {"rhs", c.rhs},
            {"satisfied", c.satisfied},
            {"margin", c.margin}};
}

nlohmann::json to_json(const BalanceClassification& c) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& chk : c.checks) checks.push_back(to_json(chk));
    return {{"harris_recurrent", c.harris_recurrent},
            {"positive_recurrent", c.positive_recurrent},
            {"exp_ergodic", c.exp_ergodic},
            {"critical_at_zero", c.critical_at_zero},
            {"critical_at_infinity", c.critical_at_infinity},
            {"checks", checks}};
}

nlohmann::json to_json(const DriftReport& r) {
    return {{"grid", r.grid},
            {"drift", r.drift},
            {"slope_at_zero", r.slope_at_zero},
            {"slope_at_infinity", r.slope_at_infinity},
            {"compact_found", r.compact_found},
            {"A", r.A},
            {"alpha", r.alpha},
            {"alpha_prime", r.alpha_prime}};
}

nlohmann::json to_json(const LeftTailFit& f) {
    return {{"alpha0", f.alpha0},    {"std_error", f.std_error},
            {"x_lo", f.x_lo},        {"x_hi", f.x_hi},
            {"r_squared", f.r_squared}, {"sample_count", f.sample_count}};
}

nlohmann::json to_json(const RightTailFit& f) {
    nlohmann::json j = {{"theta", f.theta},     {"theta_se", f.theta_se},
                        {"eta", f.eta},         {"eta_se", f.eta_se},
                        {"x_lo", f.x_lo},       {"x_hi", f.x_hi},
                        {"r_squared", f.r_squared}, {"sample_count", f.sample_count}};
    if (f.alpha_inf) j["alpha_inf_low_confidence"] = *f.alpha_inf;
    return j;
}

nlohmann::json to_json(const TailPrediction& p) {
    nlohmann::json j = {{"theta", p.theta}, {"eta", p.eta}, {"left_valid", p.left_valid}};
    if (p.left_valid)
        j["alpha0"] = p.alpha0;
    else
        j["left_invalid_reason"] = p.left_invalid_reason;
    return j;
}

nlohmann::json to_json(const StationarityResidual& r) {
    if (r.skipped) return {{"f", r.name}, {"skipped", true}, {"reason", r.skip_reason}};
    return {{"f", r.name}, {"residual", r.residual}, {"std_error", r.std_error}};
}

nlohmann::json to_json(const Provenance& p) {
    return {{"seed", p.seed},       {"horizon", p.horizon}, {"burn_in", p.burn_in},
            {"stride", p.stride},   {"n_chains", p.n_chains}, {"model", p.model},
            {"kernel", p.kernel}};
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << content;
}

void write_histogram_csv(const std::string& path, const EmpiricalDistribution& dist, int bins) {
    std::ostringstream os;
    os << "bin_left,bin_right,mass\n";
    for (const auto& b : dist.histogram(bins))
        os << format_double(b.left) << ',' << format_double(b.right) << ','
           << format_double(b.mass) << '\n';
    write_text_file(path, os.str());
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj, const FlowMap&) {
    std::ostringstream os;
    os << "t,x_pre,y,x_post\n";
    for (const auto& ev : traj.events)
        os << format_double(ev.time) << ',' << format_double(ev.x_pre) << ','
           << format_double(ev.y) << ',' << format_double(ev.y * ev.x_pre) << '\n';
    write_text_file(path, os.str());
}

void write_profile_csv(const std::string& path, const SizeGrid& grid, const DensityField& field) {
    std::ostringstream os;
    os << "x_center,G\n";
    for (int i = 0; i < grid.cells(); ++i)
        os << format_double(grid.centers[i]) << ',' << format_double(field.density(grid, i))
           << '\n';
    write_text_file(path, os.str());
}

void write_residual_history_csv(const std::string& path, const std::vector<double>& history) {
    std::ostringstream os;
    os << "check_index,l1_change_rate\n";
    for (std::size_t i = 0; i < history.size(); ++i)
        os << i << ',' << format_double(history[i]) << '\n';
    write_text_file(path, os.str());
}

}  // namespace gf
