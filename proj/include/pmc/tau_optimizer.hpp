#pragma once

#include <functional>
#include <vector>

#include "pmc/diagnostics.hpp"

namespace pmc {

// Scalar cost of one unresolved mode as a function of tau.
// Costs hold references to the model and trajectory they were built from.
struct ModeCost {
    std::function<double(double)> value;
    std::function<double(double)> derivative;  // empty when unavailable
};

// Q_n for LIA through the moment recast (exact derivative).
ModeCost qn_cost_moments(const MomentSet& ms, const EigenModel& model, int n, bool normalized = false);
// Q_n or J_n for QSA/KTAU: Psi_n = c(tau) P_n(xi), reduced to three time averages.
ModeCost balance_cost(const Trajectory& traj, const EigenModel& model, Family f, int n, bool jn);
// Direct quadrature; any family, any size (derivative by central differences).
ModeCost direct_cost(const Trajectory& traj, const EigenModel& model, Family f, int n, bool jn);
// Picks the cheapest exact evaluator for (family, cost).
ModeCost make_cost(const Trajectory& traj, const EigenModel& model, Family f, int n, bool jn,
                   int max_moment_size = 400);

struct DescentOptions {
    double tau0 = 0.0;
    double dtau0 = 0.1;
    double eps = 1e-10;
    long max_iter = 100000;
    double tau_max = 1e300;
};

struct DescentResult {
    double tau = 0.0;
    double value = 0.0;
    long iterations = 0;
    bool converged = false;
    bool max_iter_exceeded = false;
};

DescentResult minimize_qn_descent(const ModeCost& cost, const DescentOptions& opt = {});

struct Candidate {
    double tau;
    double value;
};
std::vector<Candidate> minimize_qn_global(const ModeCost& cost, double tau_max, int grid_points = 2000);

struct JnOptions {
    double tau_max = 1.0;
    int grid_points = 2000;
    int smooth_width = 5;
};
double minimize_jn(const ModeCost& jcost, const JnOptions& opt = {});

// Default upper bound of the tau domain: 50 / |Re beta_{m+1}|.
double default_tau_max(const EigenModel& model);

struct Selection {
    std::vector<double> taus;
    double mean_correlation = 0.0;
};
// candidates[r] for unresolved mode m + r, ascending by value; at most `per_mode` are combined.
Selection discriminate_by_correlation(const Trajectory& traj, const EigenModel& model, Family f,
                                      const std::vector<std::vector<Candidate>>& candidates, int per_mode = 2);

}  // namespace pmc
