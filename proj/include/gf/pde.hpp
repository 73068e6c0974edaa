#pragma once

#include "gf/pdmp.hpp"
#include "gf/rates.hpp"

#include <vector>

namespace gf {

struct SizeGrid {
    std::vector<double> edges;    // cells+1, strictly increasing, edges[0] > 0
    std::vector<double> centers;  // geometric cell midpoints
    std::vector<double> widths;

    static SizeGrid log_spaced(double x_min, double x_max, int cells);
    // Log spacing with an integer number of cells per octave so that the
    // halving map r = 1/2 sends cell centers onto cell centers exactly.
    static SizeGrid log_spaced_halving_aligned(double x_min, double x_max, int approx_cells);

    int cells() const { return static_cast<int>(widths.size()); }
    // Cell containing x, or -1 outside the grid.
    int locate(double x) const;
};

// Cell-averaged density u with the mass per cell stored; tracks simulated
// time and cumulative boundary leakage.
struct DensityField {
    std::vector<double> mass;
    double time = 0.0;
    double leakage = 0.0;

    double total_mass() const;
    double density(const SizeGrid& grid, int cell) const {
        return mass[cell] / grid.widths[cell];
    }
    void normalize();
};

// Explicit first-order finite-volume solver for the conservative
// growth-fragmentation equation: upwind transport of tau*u, pointwise sink
// beta*u, and fragmentation gain redistributed by the kernel's CDF weights.
class ConservativeSolver {
public:
    ConservativeSolver(RateModel model, FragmentationKernel kernel, SizeGrid grid);

    const SizeGrid& grid() const { return grid_; }

    double max_stable_dt() const { return max_dt_; }

    // One explicit Euler step; rejects dt above the CFL bound.
    void step(DensityField& field, double dt) const;

    // Unit-mass bump in log-size centered at `center`.
    DensityField initial_bump(double center, double log_sigma = 0.3) const;

    struct SteadyResult {
        DensityField field;       // normalized to unit mass on the grid
        bool converged = false;
        std::vector<double> residual_history;  // L1 change per unit time
    };
    // Time-march until the L1 change rate drops below tol (per unit time).
    SteadyResult steady_state(double tol = 1e-8, double max_time = 1e4,
                              double check_interval = 1.0) const;

private:
    RateModel model_;
    FragmentationKernel kernel_;
    SizeGrid grid_;

    std::vector<double> edge_speed_;   // tau at interior+boundary edges
    double max_dt_ = 0.0;
    // Fragmentation redistribution, CSR-like per source cell.
    std::vector<std::vector<int>> frag_dest_;
    std::vector<std::vector<double>> frag_weight_;
    std::vector<double> frag_leak_;    // mass fraction falling below the grid
    std::vector<double> beta_center_;
};

// L1 distance between the PDE density and the histogram density of the
// empirical law on the common range, both renormalized to that range.
double compare_distributions(const SizeGrid& grid, const DensityField& field,
                             const EmpiricalDistribution& dist, int histogram_bins = 64);

}  // namespace gf
