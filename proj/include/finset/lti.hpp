#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <istream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "finset/errors.hpp"
#include "finset/linalg.hpp"
#include "finset/matrix.hpp"
#include "finset/rng.hpp"

namespace finset {

/// One candidate model: state transition matrix `a` and input matrix `b`.
struct SystemParams {
    Matrix a;
    Matrix b;

    SystemParams(Matrix a_in, Matrix b_in) : a(std::move(a_in)), b(std::move(b_in)) {
        if (a.rows() != a.cols()) {
            throw DimensionMismatch("SystemParams: a must be square, got " + a.shape_string());
        }
        if (b.rows() != a.rows()) {
            throw DimensionMismatch("SystemParams: b has " + std::to_string(b.rows()) +
                                    " rows, expected " + std::to_string(a.rows()));
        }
    }

    std::size_t state_dim() const { return a.rows(); }
    std::size_t input_dim() const { return b.cols(); }
};

/// Ordered finite set of candidate systems with a designated true one.
/// All candidates share dimensions and must be pairwise distinct.
class HypothesisSet {
public:
    HypothesisSet(std::vector<SystemParams> candidates, std::size_t true_index)
        : candidates_(std::move(candidates)), true_index_(true_index) {
        if (candidates_.empty()) {
            throw DimensionMismatch("HypothesisSet: no candidates");
        }
        if (true_index_ >= candidates_.size()) {
            throw DimensionMismatch("HypothesisSet: true_index out of range");
        }
        const std::size_t nx = candidates_.front().state_dim();
        const std::size_t nu = candidates_.front().input_dim();
        for (const auto& c : candidates_) {
            if (c.state_dim() != nx || c.input_dim() != nu) {
                throw DimensionMismatch("HypothesisSet: candidates have mixed dimensions");
            }
        }
        for (std::size_t i = 0; i < candidates_.size(); ++i) {
            for (std::size_t j = i + 1; j < candidates_.size(); ++j) {
                const double diff = (candidates_[i].a - candidates_[j].a).frobenius_norm() +
                                    (candidates_[i].b - candidates_[j].b).frobenius_norm();
                if (diff == 0.0) {
                    throw DimensionMismatch("HypothesisSet: candidates " + std::to_string(i) +
                                            " and " + std::to_string(j) + " are identical");
                }
            }
        }
    }

    const std::vector<SystemParams>& candidates() const { return candidates_; }
    const SystemParams& candidate(std::size_t i) const { return candidates_.at(i); }
    std::size_t size() const { return candidates_.size(); }
    std::size_t true_index() const { return true_index_; }
    const SystemParams& true_system() const { return candidates_[true_index_]; }
    std::size_t state_dim() const { return candidates_.front().state_dim(); }
    std::size_t input_dim() const { return candidates_.front().input_dim(); }

private:
    std::vector<SystemParams> candidates_;
    std::size_t true_index_;
};

/// Known noise and input covariances with their derived factors.
///
/// Both covariances must be symmetric positive-definite; the exact zero
/// matrix is additionally accepted as a degenerate setting for
/// deterministic tests (forward simulation works, but anything needing
/// the whitening factor sigma_w^{-1/2} then throws NotPositiveDefinite).
class NoiseConfig {
public:
    NoiseConfig(Matrix sigma_w, Matrix sigma_u)
        : sigma_w_(std::move(sigma_w)),
          sigma_u_(std::move(sigma_u)),
          sqrt_w_(factor_of("sigma_w", sigma_w_)),
          sqrt_u_(factor_of("sigma_u", sigma_u_)) {
        if (!sigma_w_.is_zero()) {
            // Whitening factor: with sigma_w = L L^T, L^{-1} satisfies
            // (L^{-1})^T L^{-1} = sigma_w^{-1}.
            inv_sqrt_w_ = lower_inverse(sqrt_w_.lower());
        }
    }

    const Matrix& sigma_w() const { return sigma_w_; }
    const Matrix& sigma_u() const { return sigma_u_; }
    const CholeskyFactor& sqrt_w() const { return sqrt_w_; }
    const CholeskyFactor& sqrt_u() const { return sqrt_u_; }

    bool has_inv_sqrt_w() const { return inv_sqrt_w_.has_value(); }

    /// sigma_w^{-1/2} as a lower-triangular matrix.
    const Matrix& inv_sqrt_w() const {
        if (!inv_sqrt_w_) {
            throw NotPositiveDefinite("NoiseConfig: sigma_w is degenerate, no inverse factor");
        }
        return *inv_sqrt_w_;
    }

    std::size_t state_dim() const { return sigma_w_.rows(); }
    std::size_t input_dim() const { return sigma_u_.rows(); }

private:
    static CholeskyFactor factor_of(const char* name, const Matrix& m) {
        if (m.rows() != m.cols()) {
            throw DimensionMismatch(std::string("NoiseConfig: ") + name + " not square");
        }
        if (m.is_zero()) {
            return CholeskyFactor(Matrix(m.rows(), m.cols()));
        }
        try {
            return cholesky(m);
        } catch (const NotPositiveDefinite&) {
            throw NotPositiveDefinite(std::string("NoiseConfig: ") + name +
                                      " is not positive-definite");
        } catch (const NotSymmetric&) {
            throw NotSymmetric(std::string("NoiseConfig: ") + name + " is not symmetric");
        }
    }

    Matrix sigma_w_;
    Matrix sigma_u_;
    CholeskyFactor sqrt_w_;
    CholeskyFactor sqrt_u_;
    std::optional<Matrix> inv_sqrt_w_;
};

/// States x_0..x_T, inputs u_0..u_{T-1} and the noise realizations
/// w_0..w_{T-1} of one simulation run. With the stored noises,
/// x_{t+1} = A x_t + B u_t + w_t holds exactly for the generating system.
struct Trajectory {
    std::vector<Vector> states;
    std::vector<Vector> inputs;
    std::vector<Vector> noises;

    std::size_t horizon() const { return inputs.size(); }
    std::size_t state_dim() const { return states.empty() ? 0 : states.front().size(); }
    std::size_t input_dim() const { return inputs.empty() ? 0 : inputs.front().size(); }
};

/// Rolls the dynamics x_{t+1} = A x_t + B u_t + w_t forward `horizon`
/// steps, drawing u_t and w_t i.i.d. from the configured Gaussians (in
/// that order, once per step). No stability requirement on A.
inline Trajectory simulate(const SystemParams& system, const NoiseConfig& noise,
                           const Vector& x0, long horizon, RngState& rng) {
    const std::size_t nx = system.state_dim();
    const std::size_t nu = system.input_dim();
    if (noise.state_dim() != nx || noise.input_dim() != nu) {
        throw DimensionMismatch("simulate: noise dimensions do not match system");
    }
    if (x0.size() != nx) {
        throw DimensionMismatch("simulate: x0 has length " + std::to_string(x0.size()) +
                                ", expected " + std::to_string(nx));
    }
    if (horizon < 1) {
        throw DimensionMismatch("simulate: horizon must be >= 1");
    }

    Trajectory traj;
    traj.states.reserve(static_cast<std::size_t>(horizon) + 1);
    traj.inputs.reserve(static_cast<std::size_t>(horizon));
    traj.noises.reserve(static_cast<std::size_t>(horizon));
    traj.states.push_back(x0);

    const Vector zero_u(nu, 0.0);
    const Vector zero_w(nx, 0.0);
    for (long t = 0; t < horizon; ++t) {
        Vector u = sample_gaussian(zero_u, noise.sqrt_u(), rng);
        Vector w = sample_gaussian(zero_w, noise.sqrt_w(), rng);
        Vector next = matvec(system.a, traj.states.back());
        add_in_place(next, matvec(system.b, u));
        add_in_place(next, w);
        traj.states.push_back(std::move(next));
        traj.inputs.push_back(std::move(u));
        traj.noises.push_back(std::move(w));
    }
    return traj;
}

struct Transition {
    Vector state;
    Vector input;
    Vector next_state;
};

/// The T triples (x_t, u_t, x_{t+1}), t = 0..T-1, in time order.
inline std::vector<Transition> transitions(const Trajectory& traj) {
    if (traj.states.size() != traj.inputs.size() + 1) {
        throw DimensionMismatch("transitions: malformed trajectory");
    }
    std::vector<Transition> out;
    out.reserve(traj.inputs.size());
    for (std::size_t t = 0; t < traj.inputs.size(); ++t) {
        out.push_back({traj.states[t], traj.inputs[t], traj.states[t + 1]});
    }
    return out;
}

/// CSV with columns t, x0.., u0..; the final row carries x_T and blank
/// input fields.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    const std::size_t nx = traj.state_dim();
    const std::size_t nu = traj.input_dim();
    os << "t";
    for (std::size_t i = 0; i < nx; ++i) os << ",x" << i;
    for (std::size_t i = 0; i < nu; ++i) os << ",u" << i;
    os << "\n";
    os.precision(17);
    for (std::size_t t = 0; t < traj.states.size(); ++t) {
        os << t;
        for (std::size_t i = 0; i < nx; ++i) os << "," << traj.states[t][i];
        for (std::size_t i = 0; i < nu; ++i) {
            os << ",";
            if (t < traj.inputs.size()) os << traj.inputs[t][i];
        }
        os << "\n";
    }
}

/// Parses the write_trajectory_csv format (dimensions inferred from the
/// header row). Stored noises are not part of the format.
inline Trajectory read_trajectory_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) {
        throw EmptyTrajectory("trajectory CSV: missing header");
    }
    std::size_t nx = 0, nu = 0;
    {
        std::stringstream header(line);
        std::string field;
        while (std::getline(header, field, ',')) {
            if (!field.empty() && field[0] == 'x') ++nx;
            if (!field.empty() && field[0] == 'u') ++nu;
        }
    }
    if (nx == 0) {
        throw ConfigInvalid("trajectory CSV: header has no state columns");
    }
    Trajectory traj;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string field;
        std::getline(row, field, ',');  // t index, implied by position
        Vector x(nx);
        for (std::size_t i = 0; i < nx; ++i) {
            if (!std::getline(row, field, ',')) {
                throw ConfigInvalid("trajectory CSV: short row");
            }
            x[i] = std::stod(field);
        }
        traj.states.push_back(std::move(x));
        Vector u(nu);
        bool have_u = nu > 0;
        for (std::size_t i = 0; i < nu; ++i) {
            if (!std::getline(row, field, ',') || field.empty()) {
                have_u = false;
                break;
            }
            u[i] = std::stod(field);
        }
        if (have_u) traj.inputs.push_back(std::move(u));
    }
    if (traj.states.size() != traj.inputs.size() + 1) {
        throw ConfigInvalid("trajectory CSV: expected one more state row than input rows");
    }
    return traj;
}

}  // namespace finset
