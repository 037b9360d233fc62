#pragma once

#include <optional>
#include <vector>

#include "pmc/parameterization.hpp"

namespace pmc {

// Uniformly sampled states; column k is the state at t0 + k*dt.
struct Trajectory {
    double dt = 0.0;
    double t0 = 0.0;
    CMat samples;

    int dim() const { return static_cast<int>(samples.rows()); }
    int count() const { return static_cast<int>(samples.cols()); }
    double duration() const { return dt * (count() - 1); }
    double time(int k) const { return t0 + dt * k; }
    // samples in [t_begin, t_begin + T], inclusive of endpoints within half a step
    Trajectory window(double t_begin, double T) const;
    Trajectory every(int stride) const;
    void validate() const;
};

// Composite trapezoid weights normalized so that sum(w) = 1.
RVec trapezoid_weights(int count);
double time_mean(const RVec& f);
cplx time_mean(const CVec& f);

// Unresolved-mode amplitudes Phi_n(xi(t)) along the trajectory, one row per unresolved mode.
CMat parameterized_series(const Trajectory& traj, const Parameterization& p);

double defect_qn(const Trajectory& traj, const Parameterization& p, int n, bool normalized);
double defect_jn(const Trajectory& traj, const Parameterization& p, int n);
// Norm of the unresolved part: physical coordinates when `basis` carries vectors.
double defect_global(const Trajectory& traj, const Parameterization& p, const SpectralBasis* basis = nullptr);

struct CorrelationSeries {
    std::vector<double> t, c, alpha;
    int dropped = 0;
};
CorrelationSeries correlation(const Trajectory& traj, const Parameterization& p, const SpectralBasis* basis = nullptr);
// Pair (n, n+1), e.g. cosine/sine partners of one wavenumber.
CorrelationSeries correlation_modewise(const Trajectory& traj, const Parameterization& p, int n);

// lexicographic index p = i*m + j (0-based) <-> (i, j)
inline std::pair<int, int> lex_pair(int p, int m) { return {p / m, p % m}; }
// 1-based form of the map: returns (i, j) for k in 1..m^2
std::pair<int, int> lex_pair_1based(int k, int m);

struct MomentSet {
    int mode = 0;
    int m = 0;
    CVec Q1, Q2, Q2hat, Q3;
    CMat Q2tilde, Q3tilde, Q4;
    double unun = 0.0;
    cplx un = 0.0;
};

MomentSet moments(const Trajectory& traj, int n, int m);
double qn_recast(const MomentSet& ms, const EigenModel& model, int n, double tau);
double qn_derivative(const MomentSet& ms, const EigenModel& model, int n, double tau);
// <|Phi_n|^2> from the moments; used by the variance-matching cost
double lia_variance(const MomentSet& ms, const EigenModel& model, int n, double tau);

}  // namespace pmc
