#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "finset/errors.hpp"
#include "finset/linalg.hpp"
#include "finset/lti.hpp"
#include "finset/matrix.hpp"

namespace finset {

/// Squared one-step prediction residual of a candidate model, weighted by
/// the inverse noise covariance:
///   || sigma_w^{-1/2} (x_next - A x - B u) ||^2.
inline double transition_cost(const SystemParams& candidate, const NoiseConfig& noise,
                              const Vector& x_t, const Vector& u_t, const Vector& x_next) {
    const std::size_t nx = candidate.state_dim();
    if (x_t.size() != nx || x_next.size() != nx || u_t.size() != candidate.input_dim()) {
        throw DimensionMismatch("transition_cost: vector dimensions do not match candidate");
    }
    const Matrix& a = candidate.a;
    const Matrix& b = candidate.b;
    Vector r(nx);
    for (std::size_t i = 0; i < nx; ++i) {
        double s = x_next[i];
        for (std::size_t j = 0; j < nx; ++j) s -= a(i, j) * x_t[j];
        for (std::size_t j = 0; j < u_t.size(); ++j) s -= b(i, j) * u_t[j];
        r[i] = s;
    }
    // Whiten by forward substitution with the Cholesky factor of sigma_w.
    if (!noise.has_inv_sqrt_w()) {
        throw NotPositiveDefinite("transition_cost: sigma_w must be positive-definite");
    }
    const Matrix& l = noise.sqrt_w().lower();
    double cost = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
        double s = r[i];
        for (std::size_t j = 0; j < i; ++j) s -= l(i, j) * r[j];
        r[i] = s / l(i, i);
        cost += r[i] * r[i];
    }
    return cost;
}

/// Mean transition_cost over all T transitions of the trajectory.
inline double empirical_risk(const SystemParams& candidate, const NoiseConfig& noise,
                             const Trajectory& traj) {
    const std::size_t horizon = traj.horizon();
    if (horizon == 0) {
        throw EmptyTrajectory("empirical_risk: trajectory has no transitions");
    }
    double total = 0.0;
    for (std::size_t t = 0; t < horizon; ++t) {
        total += transition_cost(candidate, noise, traj.states[t], traj.inputs[t],
                                 traj.states[t + 1]);
    }
    return total / static_cast<double>(horizon);
}

/// Per-candidate empirical risks with the minimizing index. Exact ties go
/// to the lowest index and set the tie flag.
struct RiskProfile {
    std::vector<double> risks;
    std::size_t argmin = 0;
    bool tie = false;
};

inline RiskProfile empirical_risk_profile(const HypothesisSet& set, const NoiseConfig& noise,
                                          const Trajectory& traj) {
    RiskProfile profile;
    profile.risks.reserve(set.size());
    for (const auto& candidate : set.candidates()) {
        profile.risks.push_back(empirical_risk(candidate, noise, traj));
    }
    for (std::size_t i = 1; i < profile.risks.size(); ++i) {
        if (profile.risks[i] < profile.risks[profile.argmin]) {
            profile.argmin = i;
        } else if (profile.risks[i] == profile.risks[profile.argmin]) {
            profile.tie = true;
        }
    }
    return profile;
}

enum class EstimatorKind { kMle, kOlsProjection };

inline const char* estimator_name(EstimatorKind kind) {
    return kind == EstimatorKind::kMle ? "mle" : "ols";
}

/// Outcome of one estimator run. `scores` holds the per-candidate
/// empirical risks (MLE) or spectral projection distances (OLS).
struct EstimateOutcome {
    std::size_t chosen = 0;
    EstimatorKind method = EstimatorKind::kMle;
    std::vector<double> scores;
    bool tie = false;
};

/// Maximum likelihood estimate over the hypothesis set: the candidate
/// minimizing the empirical risk. Deterministic given the trajectory.
inline EstimateOutcome mle_estimate(const HypothesisSet& set, const NoiseConfig& noise,
                                    const Trajectory& traj) {
    RiskProfile profile = empirical_risk_profile(set, noise, traj);
    EstimateOutcome outcome;
    outcome.chosen = profile.argmin;
    outcome.method = EstimatorKind::kMle;
    outcome.scores = std::move(profile.risks);
    outcome.tie = profile.tie;
    return outcome;
}

/// Nearest candidate to an unconstrained estimate (a_hat, b_hat) in the
/// spectral norm of the stacked difference [a_hat - A_i, b_hat - B_i].
inline EstimateOutcome nearest_candidate_spectral(const HypothesisSet& set, const Matrix& a_hat,
                                                  const Matrix& b_hat) {
    EstimateOutcome outcome;
    outcome.method = EstimatorKind::kOlsProjection;
    outcome.scores.reserve(set.size());
    for (const auto& candidate : set.candidates()) {
        outcome.scores.push_back(
            spectral_norm(hstack(a_hat - candidate.a, b_hat - candidate.b)));
    }
    for (std::size_t i = 1; i < outcome.scores.size(); ++i) {
        if (outcome.scores[i] < outcome.scores[outcome.chosen]) {
            outcome.chosen = i;
        } else if (outcome.scores[i] == outcome.scores[outcome.chosen]) {
            outcome.tie = true;
        }
    }
    return outcome;
}

/// Ordinary least squares of x_{t+1} on (x_t, u_t), projected onto the
/// hypothesis set by spectral distance. RankDeficient signals insufficient
/// excitation (in particular T < n_x + n_u).
inline EstimateOutcome ols_project_estimate(const HypothesisSet& set, const Trajectory& traj) {
    const std::size_t horizon = traj.horizon();
    if (horizon == 0) {
        throw EmptyTrajectory("ols_project_estimate: trajectory has no transitions");
    }
    const std::size_t nx = set.state_dim();
    const std::size_t nu = set.input_dim();
    Matrix regressors(horizon, nx + nu);
    Matrix targets(horizon, nx);
    for (std::size_t t = 0; t < horizon; ++t) {
        for (std::size_t j = 0; j < nx; ++j) regressors(t, j) = traj.states[t][j];
        for (std::size_t j = 0; j < nu; ++j) regressors(t, nx + j) = traj.inputs[t][j];
        for (std::size_t j = 0; j < nx; ++j) targets(t, j) = traj.states[t + 1][j];
    }
    Matrix theta = least_squares(regressors, targets);  // (nx+nu) x nx
    Matrix a_hat(nx, nx);
    Matrix b_hat(nx, nu);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < nx; ++j) a_hat(i, j) = theta(j, i);
        for (std::size_t j = 0; j < nu; ++j) b_hat(i, j) = theta(nx + j, i);
    }
    return nearest_candidate_spectral(set, a_hat, b_hat);
}

}  // namespace finset
