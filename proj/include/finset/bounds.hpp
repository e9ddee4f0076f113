#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "finset/errors.hpp"
#include "finset/linalg.hpp"
#include "finset/lti.hpp"
#include "finset/matrix.hpp"
#include "finset/rng.hpp"

namespace finset {

/// Indexing convention for the state covariance sequence.
///
/// kZeroStart is the library default: Sigma_{x_0} = 0, so Sigma_{x_t} is
/// the covariance of the state reached after t noisy steps from a
/// deterministic start. kInclusive shifts the sequence by one extra
/// process-noise term (Sigma_{x_0} = B Sigma_u B^T + Sigma_w); it exists
/// so the two plausible readings of the covariance sum can be compared.
enum class CovarianceConvention { kZeroStart, kInclusive };

/// How the per-candidate excitation terms are aggregated.
///
/// kTrace evaluates the exact residual-covariance trace (equivalently the
/// sum of per-power Frobenius norms). kGramianNorm takes Frobenius norms
/// of the accumulated Gramians instead, which differs by cross terms; it
/// is kept as a diagnostic, not used by default.
enum class SnrRoute { kTrace, kGramianNorm };

/// State covariances Sigma_{x_0} .. Sigma_{x_tmax} of one system under
/// the recursion Sigma_{x_{t+1}} = A Sigma_{x_t} A^T + B Sigma_u B^T + Sigma_w.
struct CovarianceSeries {
    SystemParams system;
    CovarianceConvention convention;
    std::vector<Matrix> state_cov;

    const Matrix& at(std::size_t t) const {
        if (t >= state_cov.size()) {
            throw DimensionMismatch("CovarianceSeries: t beyond computed range");
        }
        return state_cov[t];
    }
    std::size_t t_max() const { return state_cov.size() - 1; }
};

inline CovarianceSeries state_covariance(const SystemParams& system, const NoiseConfig& noise,
                                         long t_max,
                                         CovarianceConvention convention =
                                             CovarianceConvention::kZeroStart) {
    if (t_max < 0) throw DimensionMismatch("state_covariance: t_max must be >= 0");
    if (noise.state_dim() != system.state_dim() || noise.input_dim() != system.input_dim()) {
        throw DimensionMismatch("state_covariance: noise dimensions do not match system");
    }
    const Matrix process_cov =
        system.b * noise.sigma_u() * system.b.transpose() + noise.sigma_w();
    CovarianceSeries series{system, convention, {}};
    series.state_cov.reserve(static_cast<std::size_t>(t_max) + 1);
    Matrix cov = convention == CovarianceConvention::kZeroStart
                     ? Matrix(system.state_dim(), system.state_dim())
                     : process_cov;
    series.state_cov.push_back(cov);
    for (long t = 0; t < t_max; ++t) {
        cov = system.a * cov * system.a.transpose() + process_cov;
        series.state_cov.push_back(cov);
    }
    return series;
}

namespace detail {

inline Matrix delta_a(const HypothesisSet& set, std::size_t i) {
    return set.true_system().a - set.candidate(i).a;
}

inline Matrix delta_b(const HypothesisSet& set, std::size_t i) {
    return set.true_system().b - set.candidate(i).b;
}

/// Tr(W M W^T) for the whitening matrix W = sigma_w^{-1/2}.
inline double whitened_trace(const Matrix& w, const Matrix& m) {
    return (w * m * w.transpose()).trace();
}

inline double sq(double x) { return x * x; }

}  // namespace detail

/// Covariance of the whitened candidate-i residual at time t:
///   Sigma_z^i(t) = I + W (dB Sigma_u dB^T + dA Sigma_{x_t} dA^T) W^T,
/// with W = sigma_w^{-1/2} and Sigma_{x_t} taken from the TRUE system.
struct ResidualCovariance {
    Matrix sigma_z;
    double trace;
    std::size_t candidate;
    long t;
};

inline Matrix residual_covariance_matrix(const HypothesisSet& set, const NoiseConfig& noise,
                                         std::size_t i, const Matrix& state_cov_t) {
    const Matrix& w = noise.inv_sqrt_w();
    const Matrix da = detail::delta_a(set, i);
    const Matrix db = detail::delta_b(set, i);
    const Matrix inner = db * noise.sigma_u() * db.transpose() +
                         da * state_cov_t * da.transpose();
    return Matrix::identity(set.state_dim()) + w * inner * w.transpose();
}

inline ResidualCovariance residual_covariance(const HypothesisSet& set, const NoiseConfig& noise,
                                              std::size_t i, long t,
                                              CovarianceConvention convention =
                                                  CovarianceConvention::kZeroStart) {
    if (t < 0) throw DimensionMismatch("residual_covariance: t must be >= 0");
    const CovarianceSeries series = state_covariance(set.true_system(), noise, t, convention);
    Matrix sigma_z = residual_covariance_matrix(set, noise, i, series.at(t));
    const double tr = sigma_z.trace();
    return ResidualCovariance{std::move(sigma_z), tr, i, t};
}

/// Accumulated excitation projected on the difference dA between the true
/// system and candidate i:
///   input_gramian(t) = dA * (sum_{s=0}^{t} A^s B) * Sigma_u^{1/2}
///   noise_gramian(t) = dA * (sum_{s=0}^{t} A^s) * Sigma_w^{1/2}
struct ExcitationGramians {
    Matrix input_gramian;
    Matrix noise_gramian;
    std::size_t candidate;
    long t;
};

inline ExcitationGramians excitation_gramians(const HypothesisSet& set, const NoiseConfig& noise,
                                              std::size_t i, long t) {
    if (t < 0) throw DimensionMismatch("excitation_gramians: t must be >= 0");
    const SystemParams& truth = set.true_system();
    const std::size_t nx = set.state_dim();
    Matrix power = Matrix::identity(nx);
    Matrix power_sum = Matrix(nx, nx);
    for (long s = 0; s <= t; ++s) {
        power_sum += power;
        power = truth.a * power;
    }
    const Matrix da = detail::delta_a(set, i);
    return ExcitationGramians{da * power_sum * truth.b * noise.sqrt_u().lower(),
                              da * power_sum * noise.sqrt_w().lower(), i, t};
}

/// Tr(Sigma_z^i(half_block)): the signal-to-noise trace entering the
/// sufficient identification condition.
inline double snr_trace(const HypothesisSet& set, const NoiseConfig& noise, std::size_t i,
                        long half_block,
                        CovarianceConvention convention = CovarianceConvention::kZeroStart) {
    return residual_covariance(set, noise, i, half_block, convention).trace;
}

/// Threshold sqrt(n_x) + n_x: the high-probability envelope of the true
/// system's empirical risk (a normalized chi-square mean plus deviation).
inline double chi_square_risk_threshold(std::size_t n_x) {
    if (n_x < 1) throw DimensionMismatch("chi_square_risk_threshold: n_x must be >= 1");
    return std::sqrt(static_cast<double>(n_x)) + static_cast<double>(n_x);
}

/// Minimum number of length-k blocks required by the burn-in condition:
/// floor(T/k) >= (320/3) log(2 n_x N / delta).
inline double burn_in_blocks_required(std::size_t n_x, std::size_t n_alternatives,
                                      double delta) {
    return 320.0 / 3.0 *
           std::log(2.0 * static_cast<double>(n_x) *
                    static_cast<double>(n_alternatives) / delta);
}

/// Block martingale small-ball parameters of the candidate-i residual
/// process: block length k, scale matrix Sigma_z^i(floor(k/2)), and
/// small-ball probability 3/20.
struct BmsbParams {
    long block_length;
    Matrix small_ball_matrix;
    double probability;
};

inline BmsbParams bmsb_params(const HypothesisSet& set, const NoiseConfig& noise, std::size_t i,
                              long k,
                              CovarianceConvention convention =
                                  CovarianceConvention::kZeroStart) {
    if (k < 1) throw DimensionMismatch("bmsb_params: k must be >= 1");
    Matrix gamma = residual_covariance(set, noise, i, k / 2, convention).sigma_z;
    return BmsbParams{k, std::move(gamma), 3.0 / 20.0};
}

/// Tail bound for a scalar process satisfying the (k, nu, p) small-ball
/// condition: the probability that sum_t z_t^2 stays below
/// (nu^2 p^2 / 8) k floor(T/k) is at most exp(-floor(T/k) p / 16).
struct SmallBallTail {
    double threshold;
    double prob_bound;
};

inline SmallBallTail small_ball_tail_bound(long k, double nu, double p, long t_total) {
    if (k < 1 || t_total < k) throw DimensionMismatch("small_ball_tail_bound: need 1 <= k <= T");
    if (!(nu > 0.0) || !(p > 0.0) || p > 1.0) {
        throw DimensionMismatch("small_ball_tail_bound: need nu > 0 and p in (0, 1]");
    }
    const double blocks = static_cast<double>(t_total / k);
    return SmallBallTail{nu * nu * p * p / 8.0 * static_cast<double>(k) * blocks,
                         std::exp(-blocks * p / 16.0)};
}

/// Accumulated identification SNR of candidate i over `horizon` steps:
///   horizon * ||W dB Sigma_u^{1/2}||_F^2
///     + sum_{s=0}^{horizon-1} Tr(W dA Sigma_{x_s} dA^T W^T),
/// with W = sigma_w^{-1/2}. This equals twice the KL divergence between
/// the true and candidate trajectory distributions; an estimator that
/// reliably separates the two needs it to be large. kGramianNorm replaces
/// the trace terms by Frobenius norms of the accumulated Gramians.
inline double lower_bound_lhs(const HypothesisSet& set, const NoiseConfig& noise, std::size_t i,
                              long horizon,
                              CovarianceConvention convention = CovarianceConvention::kZeroStart,
                              SnrRoute route = SnrRoute::kTrace) {
    if (horizon < 1) throw DimensionMismatch("lower_bound_lhs: horizon must be >= 1");
    const Matrix& w = noise.inv_sqrt_w();
    const Matrix da = detail::delta_a(set, i);
    const Matrix db = detail::delta_b(set, i);
    const double input_term =
        static_cast<double>(horizon) *
        detail::sq((w * db * noise.sqrt_u().lower()).frobenius_norm());

    double dynamic_term = 0.0;
    if (route == SnrRoute::kTrace) {
        const CovarianceSeries series =
            state_covariance(set.true_system(), noise, horizon - 1, convention);
        for (long s = 0; s < horizon; ++s) {
            dynamic_term += detail::whitened_trace(w, da * series.at(s) * da.transpose());
        }
    } else {
        for (long s = 0; s < horizon; ++s) {
            const ExcitationGramians grams = excitation_gramians(set, noise, i, s);
            dynamic_term += detail::sq((w * grams.input_gramian).frobenius_norm()) +
                            detail::sq((w * grams.noise_gramian).frobenius_norm());
        }
    }
    return input_term + dynamic_term;
}

/// The SNR level any reliable estimator must accumulate: 2 log(1/(2.4 delta)).
inline double lower_bound_threshold(double delta) {
    if (!(delta > 0.0) || !(delta < 1.0)) {
        throw ConfigInvalid("lower_bound_threshold: delta must be in (0, 1)");
    }
    return 2.0 * std::log(1.0 / (2.4 * delta));
}

/// Smallest horizon at which every wrong candidate's accumulated SNR
/// reaches the lower-bound threshold; nullopt if none up to horizon_max.
/// Below the returned horizon no estimator can be delta-reliable, so it
/// is a sample-size lower bound. Incremental over the covariance
/// recursion, so the scan is linear in horizon_max.
inline std::optional<long> minimal_lower_bound_horizon(
    const HypothesisSet& set, const NoiseConfig& noise, double delta, long horizon_max,
    CovarianceConvention convention = CovarianceConvention::kZeroStart,
    SnrRoute route = SnrRoute::kTrace) {
    const double threshold = lower_bound_threshold(delta);
    if (set.size() == 1) return 1;  // no wrong candidate to separate
    if (horizon_max < 1) return std::nullopt;

    const Matrix& w = noise.inv_sqrt_w();
    std::vector<std::size_t> rivals;
    std::vector<Matrix> das;
    std::vector<double> input_rates;  // per-step contribution of dB
    std::vector<double> acc;          // accumulated dynamic terms
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (i == set.true_index()) continue;
        rivals.push_back(i);
        das.push_back(detail::delta_a(set, i));
        input_rates.push_back(detail::sq(
            (w * detail::delta_b(set, i) * noise.sqrt_u().lower()).frobenius_norm()));
        acc.push_back(0.0);
    }

    const SystemParams& truth = set.true_system();
    const Matrix process_cov =
        truth.b * noise.sigma_u() * truth.b.transpose() + noise.sigma_w();
    Matrix cov = convention == CovarianceConvention::kZeroStart
                     ? Matrix(set.state_dim(), set.state_dim())
                     : process_cov;

    for (long horizon = 1; horizon <= horizon_max; ++horizon) {
        const long s = horizon - 1;  // newly included covariance index
        bool all_reached = true;
        for (std::size_t r = 0; r < rivals.size(); ++r) {
            if (route == SnrRoute::kTrace) {
                acc[r] += detail::whitened_trace(w, das[r] * cov * das[r].transpose());
            } else {
                const ExcitationGramians grams =
                    excitation_gramians(set, noise, rivals[r], s);
                acc[r] += detail::sq((w * grams.input_gramian).frobenius_norm()) +
                          detail::sq((w * grams.noise_gramian).frobenius_norm());
            }
            if (static_cast<double>(horizon) * input_rates[r] + acc[r] < threshold) {
                all_reached = false;
            }
        }
        if (all_reached) return horizon;
        cov = truth.a * cov * truth.a.transpose() + process_cov;
    }
    return std::nullopt;
}

/// Per-candidate terms of the sufficient-condition check at a given k.
struct CandidateBound {
    std::size_t index;
    double snr_trace;        // Tr Sigma_z at the witness half-block
    double condition_lhs;    // sqrt(n_x) + n_x
    double condition_rhs;    // (9 k floor(T/k) / 3200 T) * trace term
    double lower_bound_lhs;  // accumulated SNR at this horizon
    double margin;           // condition_rhs - condition_lhs
};

/// Result of searching k for the sufficient identification condition.
struct UpperBoundCheck {
    long horizon = 0;
    double delta = 0.0;
    bool burn_in_satisfied = false;
    bool satisfied = false;
    long witness_k = 1;  // satisfying k, or the best-margin k when unsatisfied
    std::vector<CandidateBound> candidates;
};

/// Diagnostic counterpart of snr_trace that aggregates Frobenius norms of
/// the accumulated Gramians instead of expanding the covariance trace:
///   n_x + ||W dB Su^{1/2}||_F^2 + ||W input_gramian||_F^2 + ||W noise_gramian||_F^2.
/// Differs from the trace by cross terms between matrix powers.
inline double snr_gramian_norm(const HypothesisSet& set, const NoiseConfig& noise,
                               std::size_t i, long half_block) {
    const Matrix& w = noise.inv_sqrt_w();
    const Matrix db = detail::delta_b(set, i);
    const ExcitationGramians grams = excitation_gramians(set, noise, i, half_block);
    return static_cast<double>(set.state_dim()) +
           detail::sq((w * db * noise.sqrt_u().lower()).frobenius_norm()) +
           detail::sq((w * grams.input_gramian).frobenius_norm()) +
           detail::sq((w * grams.noise_gramian).frobenius_norm());
}

/// Checks whether some block length k in [1, T] simultaneously meets the
/// burn-in condition floor(T/k) >= (320/3) log(2 n_x N / delta) and, for
/// every wrong candidate i,
///   sqrt(n_x) + n_x <= (9 k floor(T/k)) / (3200 T) * Tr(Sigma_z^i(floor(k/2))).
/// When both hold, the MLE returns the true system with probability at
/// least 1 - delta. Unsatisfied is a valid result; the best-margin k is
/// reported for diagnostics.
inline UpperBoundCheck upper_bound_check(const HypothesisSet& set, const NoiseConfig& noise,
                                         double delta, long horizon,
                                         CovarianceConvention convention =
                                             CovarianceConvention::kZeroStart) {
    if (!(delta > 0.0) || !(delta < 1.0)) {
        throw ConfigInvalid("upper_bound_check: delta must be in (0, 1)");
    }
    if (horizon < 1) throw DimensionMismatch("upper_bound_check: T must be >= 1");

    UpperBoundCheck check;
    check.horizon = horizon;
    check.delta = delta;

    const std::size_t nx = set.state_dim();
    const std::size_t n_alt = set.size() - 1;
    if (n_alt == 0) {
        // Singleton set: the MLE is trivially correct.
        check.burn_in_satisfied = true;
        check.satisfied = true;
        return check;
    }

    const double blocks_required = burn_in_blocks_required(nx, n_alt, delta);
    const double lhs = chi_square_risk_threshold(nx);

    // Everything needed is Tr Sigma_z^i(t) for t <= floor(T/2); build the
    // per-candidate trace tables once.
    const long t_top = horizon / 2;
    const CovarianceSeries series =
        state_covariance(set.true_system(), noise, t_top, convention);
    std::vector<std::size_t> rivals;
    std::vector<std::vector<double>> trace_table;  // [rival][t]
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (i == set.true_index()) continue;
        rivals.push_back(i);
        std::vector<double> traces(static_cast<std::size_t>(t_top) + 1);
        const Matrix& w = noise.inv_sqrt_w();
        const Matrix da = detail::delta_a(set, i);
        const Matrix db = detail::delta_b(set, i);
        const double base = static_cast<double>(nx) +
                            detail::whitened_trace(w, db * noise.sigma_u() * db.transpose());
        for (long t = 0; t <= t_top; ++t) {
            traces[static_cast<std::size_t>(t)] =
                base + detail::whitened_trace(w, da * series.at(t) * da.transpose());
        }
        trace_table.push_back(std::move(traces));
    }

    double best_min_margin = 0.0;
    bool have_best = false;
    long best_k = 1;

    for (long k = 1; k <= horizon; ++k) {
        const double blocks = static_cast<double>(horizon / k);
        if (blocks < blocks_required) continue;
        check.burn_in_satisfied = true;
        const double factor = 9.0 * static_cast<double>(k) * blocks /
                              (3200.0 * static_cast<double>(horizon));
        double min_margin = 0.0;
        bool ok = true;
        bool first = true;
        for (const auto& traces : trace_table) {
            const double rhs = factor * traces[static_cast<std::size_t>(k / 2)];
            const double margin = rhs - lhs;
            if (margin < 0.0) ok = false;
            if (first || margin < min_margin) min_margin = margin;
            first = false;
        }
        if (!have_best || min_margin > best_min_margin) {
            have_best = true;
            best_min_margin = min_margin;
            best_k = k;
        }
        if (ok) {
            check.satisfied = true;
            best_k = k;
            break;
        }
    }

    check.witness_k = best_k;
    if (check.satisfied &&
        static_cast<double>(horizon) < 8.0 * std::log(2.0 / delta)) {
        // The burn-in condition provably implies T >= 8 log(2/delta).
        throw Error("upper_bound_check: internal consistency violated");
    }

    const double factor_at_best =
        9.0 * static_cast<double>(best_k) * static_cast<double>(horizon / best_k) /
        (3200.0 * static_cast<double>(horizon));
    for (std::size_t r = 0; r < rivals.size(); ++r) {
        const double tr = trace_table[r][static_cast<std::size_t>(best_k / 2)];
        const double rhs = factor_at_best * tr;
        check.candidates.push_back(CandidateBound{
            rivals[r], tr, lhs, rhs,
            lower_bound_lhs(set, noise, rivals[r], horizon, convention, SnrRoute::kTrace),
            rhs - lhs});
    }
    return check;
}

/// Smallest horizon at which the sufficient condition can be met, or
/// nullopt if none up to horizon_max. For a fixed block length k the
/// binding horizon is k * ceil(blocks_required) (block count exactly at
/// the burn-in level and no partial block), where the condition factor
/// collapses to 9/3200; scanning k in ascending order therefore yields
/// the minimum.
inline std::optional<long> minimal_upper_bound_horizon(
    const HypothesisSet& set, const NoiseConfig& noise, double delta, long horizon_max,
    CovarianceConvention convention = CovarianceConvention::kZeroStart) {
    if (!(delta > 0.0) || !(delta < 1.0)) {
        throw ConfigInvalid("minimal_upper_bound_horizon: delta must be in (0, 1)");
    }
    if (set.size() == 1) return 1;
    const std::size_t nx = set.state_dim();
    const double blocks_required = burn_in_blocks_required(nx, set.size() - 1, delta);
    const long m0 = static_cast<long>(std::ceil(blocks_required));
    if (m0 < 1 || m0 > horizon_max) return std::nullopt;
    const double lhs = chi_square_risk_threshold(nx);

    const long k_max = horizon_max / m0;
    const CovarianceSeries series =
        state_covariance(set.true_system(), noise, k_max / 2, convention);
    const Matrix& w = noise.inv_sqrt_w();
    for (long k = 1; k <= k_max; ++k) {
        bool ok = true;
        for (std::size_t i = 0; i < set.size() && ok; ++i) {
            if (i == set.true_index()) continue;
            const Matrix da = detail::delta_a(set, i);
            const Matrix db = detail::delta_b(set, i);
            const double trace =
                static_cast<double>(nx) +
                detail::whitened_trace(w, db * noise.sigma_u() * db.transpose()) +
                detail::whitened_trace(w, da * series.at(k / 2) * da.transpose());
            if (9.0 / 3200.0 * trace < lhs) ok = false;
        }
        if (ok) return k * m0;
    }
    return std::nullopt;
}

/// Evaluated bound conditions for one configuration: one sufficient-
/// condition check per requested horizon plus the minimal-horizon
/// searches in both directions. The gramian_* tables are parallel to
/// checks/candidates and only filled when diagnostics are requested.
struct BoundReport {
    double delta = 0.0;
    CovarianceConvention convention = CovarianceConvention::kZeroStart;
    std::vector<UpperBoundCheck> checks;
    long lower_search_max = 0;
    std::optional<long> minimal_lower_bound;
    long upper_search_max = 0;
    std::optional<long> minimal_upper_bound;
    bool with_gramian_diagnostics = false;
    std::vector<std::vector<double>> gramian_condition_rhs;
    std::vector<std::vector<double>> gramian_lower_lhs;
};

/// Empirically verifies the anti-concentration inequality: simulates
/// n_trials trajectories from the true system, forms the whitened
/// candidate-i residuals z_t, and returns for each coordinate l the
/// fraction of trials with
///   sum_{t} [z_t]_l^2 <= (9 k floor(T/k) / 3200) * [Sigma_z^i(floor(k/2))]_{ll}.
/// Each fraction should stay below exp(-(3/320) floor(T/k)) plus sampling
/// error. Trial j draws from stream rng.stream() + 1 + j of rng.seed(),
/// so the result is independent of evaluation order.
inline Vector verify_anticoncentration(const HypothesisSet& set, const NoiseConfig& noise,
                                       std::size_t i, long k, long horizon, long n_trials,
                                       const RngState& rng,
                                       CovarianceConvention convention =
                                           CovarianceConvention::kZeroStart) {
    if (n_trials < 100) {
        throw Error("verify_anticoncentration: n_trials must be >= 100");
    }
    if (k < 1 || k > horizon) {
        throw DimensionMismatch("verify_anticoncentration: need 1 <= k <= T");
    }
    const std::size_t nx = set.state_dim();
    const Matrix gamma = residual_covariance(set, noise, i, k / 2, convention).sigma_z;
    const double factor = 9.0 * static_cast<double>(k) *
                          static_cast<double>(horizon / k) / 3200.0;
    Vector thresholds(nx);
    for (std::size_t l = 0; l < nx; ++l) thresholds[l] = factor * gamma(l, l);

    const Matrix da = detail::delta_a(set, i);
    const Matrix db = detail::delta_b(set, i);
    const Matrix& lw = noise.sqrt_w().lower();
    const Vector x0(nx, 0.0);

    std::vector<long> violations(nx, 0);
    for (long trial = 0; trial < n_trials; ++trial) {
        RngState trial_rng(rng.seed(), rng.stream() + 1 + static_cast<std::uint64_t>(trial));
        const Trajectory traj = simulate(set.true_system(), noise, x0, horizon, trial_rng);
        Vector sums(nx, 0.0);
        Vector z(nx);
        for (long t = 0; t < horizon; ++t) {
            const Vector& x = traj.states[static_cast<std::size_t>(t)];
            const Vector& u = traj.inputs[static_cast<std::size_t>(t)];
            const Vector& wt = traj.noises[static_cast<std::size_t>(t)];
            for (std::size_t r = 0; r < nx; ++r) {
                double s = wt[r];
                for (std::size_t c = 0; c < nx; ++c) s += da(r, c) * x[c];
                for (std::size_t c = 0; c < u.size(); ++c) s += db(r, c) * u[c];
                z[r] = s;
            }
            for (std::size_t r = 0; r < nx; ++r) {  // whiten in place
                double s = z[r];
                for (std::size_t c = 0; c < r; ++c) s -= lw(r, c) * z[c];
                z[r] = s / lw(r, r);
                sums[r] += z[r] * z[r];
            }
        }
        for (std::size_t l = 0; l < nx; ++l) {
            if (sums[l] <= thresholds[l]) ++violations[l];
        }
    }
    Vector rates(nx);
    for (std::size_t l = 0; l < nx; ++l) {
        rates[l] = static_cast<double>(violations[l]) / static_cast<double>(n_trials);
    }
    return rates;
}

}  // namespace finset
