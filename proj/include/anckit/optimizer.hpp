#ifndef ANCKIT_OPTIMIZER_HPP
#define ANCKIT_OPTIMIZER_HPP

#include <functional>
#include <string>
#include <vector>

#include "anckit/constraints.hpp"
#include "anckit/types.hpp"
#include "anckit/uncertainty.hpp"

namespace anckit::optimizer {

struct SolverSettings {
    std::size_t max_outer = 40;
    std::size_t max_inner = 200;
    double barrier_decrease = 10.0;  // geometric reduction of the barrier mu
    double tol_rel = 1e-6;           // duality-gap target relative to max(L0, 1)
    double mu_min = 1e-9;
    std::size_t lbfgs_memory = 10;
    std::size_t max_sharpness_bumps = 4;  // hull polish: rho multiplied by 8 per bump
    unsigned long long seed = 0;
    // one line per outer iteration, plus one header line
    std::function<void(const std::string&)> trace_sink;
};

/// Full problem statement: minimize the frequency-weighted nominal
/// sensitivity L(w) = (1/K) sum_k |W_k (1 - Ghat_k Q_k(w))|^2 over real FIR
/// coefficients w (length num_taps), subject to the per-bin robust-stability
/// constraints of the chosen uncertainty model.
struct DesignSpec {
    FrequencyGrid grid;
    std::vector<double> internal_model;  // FIR ghat; leading coefficient must be 0
    PerformanceWeight weight;
    uncertainty::UncertaintyModel model;
    constraints::ConstraintConfig constraint_config;
    SolverSettings solver;
    std::size_t num_taps = 256;

    void validate() const;
    std::vector<cplx> internal_response() const;  // ghat on the grid
};

struct ControllerDesign {
    std::vector<double> w;
    std::vector<double> internal_model;
    double loss = 0.0;
    std::vector<double> constraint_values;  // exact per-bin values at w
};

enum class SolveStatus { converged, max_iter, infeasible };
std::string to_string(SolveStatus status);

struct OptimizationResult {
    ControllerDesign design;
    SolveStatus status = SolveStatus::max_iter;
    std::size_t iterations = 0;  // outer (barrier) iterations
    double kkt_grad_norm = 0.0;  // inf-norm of the projected Lagrangian gradient
    double kkt_slack = 0.0;      // max_k |lambda_k * g_k|
    std::vector<std::size_t> infeasible_bins;  // populated when status == infeasible
};

std::pair<double, std::vector<double>> loss_and_gradient(const std::vector<double>& w,
                                                         const DesignSpec& spec);

/// Log-barrier interior-point solve from w = 0 (strictly feasible for disk
/// kinds; the removable-degeneracy kinds should go through the ladder).
OptimizationResult solve(const DesignSpec& spec);

/// Same, warm-started. The returned loss never exceeds the loss at w0 when
/// w0 is feasible (descent guarantee).
OptimizationResult solve(const DesignSpec& spec, const std::vector<double>& w0);

/// Solve the norm-bounded (disk) problem first from w = 0, assert its optimum
/// is strictly feasible for the target kind (set nesting), then solve the
/// target problem from that point.
OptimizationResult warm_start_ladder(const DesignSpec& spec,
                                     const uncertainty::UncertaintyModel& disk_model);

}  // namespace anckit::optimizer

#endif
