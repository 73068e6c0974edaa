#include "gf/pdmp.hpp"

#include "gf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace gf {

namespace {

void check_size(double x) {
    if (!(x > 1e-100 && x < 1e100))
        throw ModelInconsistency("trajectory size left the representable range at x=" +
                                 std::to_string(x));
}

}  // namespace

double Trajectory::at(const FlowMap& fm, double t) const {
    if (t < 0.0 || t > horizon) throw DomainError("Trajectory::at: t outside [0, horizon]");
    double x = x0;
    double t_last = 0.0;
    for (const auto& ev : events) {
        if (ev.time > t) break;
        x = ev.y * ev.x_pre;  // right-continuity: X at the jump epoch is post-jump
        t_last = ev.time;
    }
    return fm.flow(x, t - t_last);
}

Trajectory simulate_trajectory(const FlowMap& fm, const FragmentationKernel& kernel, double x0,
                               double horizon, Rng& rng) {
    if (!(x0 > 0.0)) throw DomainError("simulate_trajectory: x0 must be positive");
    if (!(horizon > 0.0)) throw DomainError("simulate_trajectory: horizon must be positive");
    Trajectory traj;
    traj.x0 = x0;
    traj.horizon = horizon;
    double t = 0.0;
    double x = x0;
    while (true) {
        const auto dt = fm.sample_jump_time_before(x, horizon - t, rng);
        if (!dt) break;
        t += *dt;
        const double x_pre = fm.flow(x, *dt);
        const double y = kernel.sample(rng);
        traj.events.push_back({t, x_pre, y});
        x = y * x_pre;
        check_size(x);
    }
    return traj;
}

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples, Provenance prov)
    : samples_(std::move(samples)), prov_(std::move(prov)) {
    if (samples_.empty()) throw DomainError("EmpiricalDistribution: no samples");
    for (double s : samples_)
        if (!(s > 0.0)) throw DomainError("EmpiricalDistribution: nonpositive sample");
    sorted_ = samples_;
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalDistribution::mean(const std::function<double(double)>& g) const {
    double acc = 0.0;
    for (double s : samples_) acc += g(s);
    return acc / static_cast<double>(samples_.size());
}

double EmpiricalDistribution::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile: p outside [0,1]");
    const double idx = p * static_cast<double>(sorted_.size() - 1);
    const auto lo = static_cast<std::size_t>(idx);
    const std::size_t hi = std::min(lo + 1, sorted_.size() - 1);
    const double w = idx - static_cast<double>(lo);
    return sorted_[lo] * (1.0 - w) + sorted_[hi] * w;
}

std::vector<EmpiricalDistribution::Bin> EmpiricalDistribution::histogram(int bins) const {
    if (bins < 1) throw DomainError("histogram: need at least one bin");
    const double lo = sorted_.front();
    const double hi = sorted_.back() * (1.0 + 1e-12);
    const double llo = std::log(lo), lhi = std::log(hi);
    std::vector<Bin> out(bins);
    for (int i = 0; i < bins; ++i) {
        out[i].left = std::exp(llo + (lhi - llo) * i / bins);
        out[i].right = std::exp(llo + (lhi - llo) * (i + 1) / bins);
        out[i].mass = 0.0;
    }
    const double w = 1.0 / static_cast<double>(samples_.size());
    for (double s : sorted_) {
        int idx = static_cast<int>((std::log(s) - llo) / (lhi - llo) * bins);
        idx = std::clamp(idx, 0, bins - 1);
        out[idx].mass += w;
    }
    return out;
}

EmpiricalDistribution sample_stationary(const FlowMap& fm, const FragmentationKernel& kernel,
                                        const StationaryConfig& config,
                                        std::uint64_t master_seed) {
    const double horizon = config.horizon;
    const double burn_in = config.burn_in < 0.0 ? horizon / 5.0 : config.burn_in;
    if (!(burn_in < horizon))
        throw DomainError("sample_stationary: burn_in must be smaller than horizon");
    const double stride =
        config.stride < 0.0 ? 1.0 / std::max(fm.model().beta(config.x0), 1.0) : config.stride;
    if (!(stride > 0.0)) throw DomainError("sample_stationary: stride must be positive");
    int n_chains = config.n_chains;
    if (n_chains <= 0) n_chains = std::max(1u, std::thread::hardware_concurrency());

    if (!config.force) {
        const auto [a, b] = LyapunovSpec::select_exponents(kernel);
        const auto cls = classify_balance(fm.model(), kernel, a, b);
        if (!cls.positive_recurrent)
            throw ModelInconsistency(
                "sample_stationary: model not positive recurrent; failing condition: " +
                cls.failing_condition());
    }

    auto run_chain = [&](std::uint64_t chain, std::vector<double>& out) {
        Rng rng = make_chain_rng(master_seed, chain);
        double t = 0.0;
        double x = config.x0;
        double next_sample = burn_in + stride;
        while (next_sample <= horizon) {
            const auto dt = fm.sample_jump_time_before(x, horizon - t, rng);
            const double t_jump = dt ? t + *dt : horizon;
            while (next_sample <= t_jump && next_sample <= horizon) {
                out.push_back(fm.flow(x, next_sample - t));
                next_sample += stride;
            }
            if (!dt) break;
            const double x_pre = fm.flow(x, *dt);
            x = kernel.sample(rng) * x_pre;
            check_size(x);
            t = t_jump;
        }
    };

    std::vector<std::vector<double>> per_chain(n_chains);
    if (n_chains == 1) {
        run_chain(0, per_chain[0]);
    } else {
        std::vector<std::thread> workers;
        workers.reserve(n_chains);
        for (int c = 0; c < n_chains; ++c)
            workers.emplace_back([&, c] { run_chain(c, per_chain[c]); });
        for (auto& w : workers) w.join();
    }
    // Deterministic pooling in chain order.
    std::vector<double> pooled;
    for (const auto& v : per_chain) pooled.insert(pooled.end(), v.begin(), v.end());
    if (pooled.empty()) throw DomainError("sample_stationary: configuration yields no samples");

    Provenance prov;
    prov.seed = master_seed;
    prov.horizon = horizon;
    prov.burn_in = burn_in;
    prov.stride = stride;
    prov.n_chains = n_chains;
    prov.model = "tau=" + fm.model().tau.describe() + "; beta=" + fm.model().beta.describe();
    prov.kernel = kernel.describe();
    return EmpiricalDistribution(std::move(pooled), std::move(prov));
}

ResidualEstimate generator_residual(const FlowMap& fm, const FragmentationKernel& kernel,
                                    const GenFunction& f, double x, double h, std::size_t n,
                                    Rng& rng) {
    if (!(h > 0.0)) throw DomainError("generator_residual: h must be positive");
    const double lf = apply_generator(fm.model(), kernel, f, x);
    const double fx = f.f(x);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double t = 0.0;
        double z = x;
        while (true) {
            const auto dt = fm.sample_jump_time_before(z, h - t, rng);
            if (!dt) {
                z = fm.flow(z, h - t);
                break;
            }
            t += *dt;
            z = kernel.sample(rng) * fm.flow(z, *dt);
        }
        const double v = (f.f(z) - fx) / h - lf;
        sum += v;
        sum_sq += v * v;
    }
    const double nn = static_cast<double>(n);
    const double mean = sum / nn;
    const double var = std::max(0.0, sum_sq / nn - mean * mean);
    return {mean, std::sqrt(var / nn)};
}

}  // namespace gf
