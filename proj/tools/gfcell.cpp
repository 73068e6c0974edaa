#include "gf/config.hpp"
#include "gf/errors.hpp"
#include "gf/flow.hpp"
#include "gf/lyapunov.hpp"
#include "gf/pde.hpp"
#include "gf/pdmp.hpp"
#include "gf/tails.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>

namespace {

// Exit codes: 0 success, 2 assumption/config failure, 3 numerical failure,
// 4 acceptance-threshold failure.
constexpr int kOk = 0;
constexpr int kAssumptionFailure = 2;
constexpr int kNumericalFailure = 3;
constexpr int kThresholdFailure = 4;

struct CommonOpts {
    std::string config_path;
    std::string output_dir;  // overrides the config when nonempty
    std::uint64_t seed = 0;  // overrides when nonzero
    bool force = false;
};

gf::RunConfig load(const CommonOpts& o) {
    gf::RunConfig cfg = gf::load_config(o.config_path);
    if (!o.output_dir.empty()) cfg.output_dir = o.output_dir;
    if (o.seed != 0) {
        cfg.seed = o.seed;
        cfg.raw["seed"] = o.seed;
    }
    cfg.model.validate();
    return cfg;
}

nlohmann::json metadata(const gf::RunConfig& cfg) {
    return {{"tool_version", gf::kToolVersion},
            {"config_hash", cfg.hash()},
            {"seed", cfg.seed},
            {"config", cfg.raw}};
}

void write_json(const gf::RunConfig& cfg, const std::string& name, nlohmann::json body) {
    body["meta"] = metadata(cfg);
    gf::write_text_file(cfg.output_dir + "/" + name, body.dump(2) + "\n");
}

gf::BalanceClassification classify(const gf::RunConfig& cfg) {
    const auto [a, b] = cfg.lyapunov_exponents();
    return gf::classify_balance(cfg.model, cfg.kernel, a, b);
}

gf::EmpiricalDistribution simulate(const gf::RunConfig& cfg, bool force) {
    gf::FlowMap fm(cfg.model);
    gf::StationaryConfig sim = cfg.simulation;
    sim.force = force;
    return gf::sample_stationary(fm, cfg.kernel, sim, cfg.seed);
}

int cmd_validate(const CommonOpts& o) {
    const auto cfg = load(o);
    const auto cls = classify(cfg);
    auto j = gf::to_json(cls);
    write_json(cfg, "validate.json", j);
    std::cout << j.dump(2) << "\n";
    if (!cls.harris_recurrent) {
        std::cerr << "assumption failure: " << cls.failing_condition() << "\n";
        return kAssumptionFailure;
    }
    return kOk;
}

int cmd_simulate(const CommonOpts& o) {
    const auto cfg = load(o);
    if (!o.force) {
        const auto cls = classify(cfg);
        if (!cls.positive_recurrent) {
            std::cerr << "refusing to simulate: " << cls.failing_condition()
                      << " (use --force to override)\n";
            return kAssumptionFailure;
        }
    }
    const auto dist = simulate(cfg, o.force);
    gf::write_histogram_csv(cfg.output_dir + "/histogram.csv", dist, 64);
    write_json(cfg, "simulate.json",
               {{"provenance", gf::to_json(dist.provenance())},
                {"sample_count", dist.count()},
                {"mean", dist.mean([](double x) { return x; })}});
    std::cout << "wrote " << cfg.output_dir << "/histogram.csv (" << dist.count()
              << " samples)\n";
    return kOk;
}

int cmd_drift(const CommonOpts& o) {
    const auto cfg = load(o);
    const auto [a, b] = cfg.lyapunov_exponents();
    const gf::LyapunovSpec spec(a, b);
    const auto rep = gf::drift_report(cfg.model, cfg.kernel, spec);
    auto j = gf::to_json(rep);
    j["a"] = a;
    j["b"] = b;
    j["splice_convex"] = spec.splice_convex();
    write_json(cfg, "drift.json", j);
    std::cout << "drift negative outside [" << 1.0 / rep.A << ", " << rep.A
              << "]: " << (rep.compact_found ? "yes" : "no") << "\n";
    return kOk;
}

int cmd_tails(const CommonOpts& o) {
    const auto cfg = load(o);
    const auto dist = simulate(cfg, o.force);
    const auto pred = gf::predict_tails(cfg.model, cfg.kernel, cfg.lyap_C);
    nlohmann::json j{{"prediction", gf::to_json(pred)}};

    const auto right = gf::fit_right_tail(dist);
    j["right_fit"] = gf::to_json(right);
    std::string comparison = "quantity,predicted,fitted\n";
    comparison += "theta," + gf::format_double(pred.theta) + "," +
                  gf::format_double(right.theta) + "\n";
    if (pred.left_valid) {
        const auto left = gf::fit_left_tail(dist);
        j["left_fit"] = gf::to_json(left);
        comparison += "alpha0," + gf::format_double(pred.alpha0) + "," +
                      gf::format_double(left.alpha0) + "\n";
        if (left.alpha0 > pred.alpha0 + 3.0 * left.std_error)
            j["left_overshoot_flag"] = true;  // one-sided bound, flagged not failed
    }
    nlohmann::json residuals = nlohmann::json::array();
    for (const auto& r : gf::stationarity_residual(cfg.model, cfg.kernel, dist,
                                                   gf::default_test_functions(cfg.kernel)))
        residuals.push_back(gf::to_json(r));
    j["stationarity_residuals"] = residuals;
    write_json(cfg, "tails.json", j);
    gf::write_text_file(cfg.output_dir + "/tails_comparison.csv", comparison);
    std::cout << "theta: predicted " << pred.theta << ", fitted " << right.theta << "\n";
    return kOk;
}

int cmd_pde(const CommonOpts& o) {
    const auto cfg = load(o);
    gf::SizeGrid grid =
        cfg.kernel.variant() == gf::FragmentationKernel::Variant::PointMass
            ? gf::SizeGrid::log_spaced_halving_aligned(cfg.pde_x_min, cfg.pde_x_max, cfg.pde_cells)
            : gf::SizeGrid::log_spaced(cfg.pde_x_min, cfg.pde_x_max, cfg.pde_cells);
    gf::ConservativeSolver solver(cfg.model, cfg.kernel, grid);
    const auto res = solver.steady_state(cfg.pde_tol, cfg.pde_max_time);
    gf::write_profile_csv(cfg.output_dir + "/steady_profile.csv", grid, res.field);
    gf::write_residual_history_csv(cfg.output_dir + "/pde_residuals.csv", res.residual_history);
    write_json(cfg, "pde.json",
               {{"converged", res.converged},
                {"time", res.field.time},
                {"leakage", res.field.leakage},
                {"cells", grid.cells()}});
    if (!res.converged) {
        std::cerr << "steady state not converged within max_time; residual history written\n";
        return kNumericalFailure;
    }
    std::cout << "steady state at t=" << res.field.time << ", leakage " << res.field.leakage
              << "\n";
    return kOk;
}

int cmd_compare(const CommonOpts& o) {
    const auto cfg = load(o);
    const auto dist = simulate(cfg, o.force);
    gf::SizeGrid grid =
        cfg.kernel.variant() == gf::FragmentationKernel::Variant::PointMass
            ? gf::SizeGrid::log_spaced_halving_aligned(cfg.pde_x_min, cfg.pde_x_max, cfg.pde_cells)
            : gf::SizeGrid::log_spaced(cfg.pde_x_min, cfg.pde_x_max, cfg.pde_cells);
    gf::ConservativeSolver solver(cfg.model, cfg.kernel, grid);
    const auto res = solver.steady_state(cfg.pde_tol, cfg.pde_max_time);
    if (!res.converged) {
        std::cerr << "PDE steady state did not converge\n";
        return kNumericalFailure;
    }
    const double l1 = gf::compare_distributions(grid, res.field, dist);
    write_json(cfg, "compare.json",
               {{"l1_distance", l1}, {"bound", cfg.compare_bound}, {"pass", l1 <= cfg.compare_bound}});
    std::cout << "L1 distance " << l1 << " (bound " << cfg.compare_bound << ")\n";
    return l1 <= cfg.compare_bound ? kOk : kThresholdFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"growth-fragmentation cell process toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", opts.config_path, "path to the run configuration (JSON)")
            ->required();
        sub->add_option("--out", opts.output_dir, "output directory override");
        sub->add_option("--seed", opts.seed, "seed override (nonzero)");
        sub->add_flag("--force", opts.force, "run even when the recurrence gate fails");
    };

    int (*handler)(const CommonOpts&) = nullptr;
    for (auto [name, desc, fn] :
         {std::tuple{"validate", "check assumptions and classify the model", &cmd_validate},
          std::tuple{"simulate", "sample the stationary law by Monte Carlo", &cmd_simulate},
          std::tuple{"drift", "evaluate the Lyapunov drift on a grid", &cmd_drift},
          std::tuple{"tails", "fit tail exponents and compare to predictions", &cmd_tails},
          std::tuple{"pde", "solve for the PDE steady state", &cmd_pde},
          std::tuple{"compare", "cross-validate Monte Carlo against the PDE", &cmd_compare}}) {
        auto* sub = app.add_subcommand(name, desc);
        add_common(sub);
        sub->callback([&handler, fn] { handler = fn; });
    }

    CLI11_PARSE(app, argc, argv);
    try {
        return handler(opts);
    } catch (const gf::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kAssumptionFailure;
    } catch (const gf::DomainError& e) {
        std::cerr << e.what() << "\n";
        return kAssumptionFailure;
    } catch (const gf::ModelInconsistency& e) {
        std::cerr << e.what() << "\n";
        return kAssumptionFailure;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericalFailure;
    }
}
