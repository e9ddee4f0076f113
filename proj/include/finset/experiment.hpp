#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "finset/bounds.hpp"
#include "finset/errors.hpp"
#include "finset/estimators.hpp"
#include "finset/lti.hpp"
#include "finset/report_json.hpp"

namespace finset {

/// Everything one experiment run needs: the hypothesis set, noise levels,
/// the horizons to sweep, the trial budget, and the seed.
struct ExperimentConfig {
    HypothesisSet set;
    NoiseConfig noise;
    std::vector<long> horizons;
    long n_trials = 1;
    double delta = 0.05;
    std::uint64_t seed = 1;
    bool run_mle = true;
    bool run_ols = true;
    Vector x0;

    void validate() const {
        if (n_trials < 1) throw ConfigInvalid("n_trials: must be >= 1");
        if (horizons.empty()) throw ConfigInvalid("horizons: must be nonempty");
        for (long t : horizons) {
            if (t < 1) throw ConfigInvalid("horizons: all values must be positive");
        }
        if (!(delta > 0.0) || !(delta < 1.0)) throw ConfigInvalid("delta: must be in (0, 1)");
        if (!run_mle && !run_ols) throw ConfigInvalid("estimators: must enable at least one");
        if (x0.size() != set.state_dim()) {
            throw ConfigInvalid("x0: length does not match the state dimension");
        }
        if (noise.state_dim() != set.state_dim() || noise.input_dim() != set.input_dim()) {
            throw ConfigInvalid("sigma_w/sigma_u: dimensions do not match the candidates");
        }
    }
};

namespace detail {

inline Matrix parse_matrix(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array() || j.empty() || !j.front().is_array()) {
        throw ConfigInvalid(field + ": expected a nonempty array of rows");
    }
    const std::size_t rows = j.size();
    const std::size_t cols = j.front().size();
    Vector entries;
    entries.reserve(rows * cols);
    for (const auto& row : j) {
        if (!row.is_array() || row.size() != cols) {
            throw ConfigInvalid(field + ": rows have inconsistent lengths");
        }
        for (const auto& e : row) {
            if (!e.is_number()) throw ConfigInvalid(field + ": entries must be numbers");
            entries.push_back(e.get<double>());
        }
    }
    try {
        return Matrix(rows, cols, std::move(entries));
    } catch (const NonFiniteValue&) {
        throw ConfigInvalid(field + ": entries must be finite");
    }
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace detail

namespace detail {

inline ExperimentConfig parse_config_checked(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigInvalid("config: expected a JSON object");
    if (!j.contains("candidates") || !j["candidates"].is_array() || j["candidates"].empty()) {
        throw ConfigInvalid("candidates: expected a nonempty array");
    }
    std::vector<SystemParams> systems;
    for (std::size_t i = 0; i < j["candidates"].size(); ++i) {
        const auto& c = j["candidates"][i];
        const std::string tag = "candidates[" + std::to_string(i) + "]";
        if (!c.is_object() || !c.contains("A") || !c.contains("B")) {
            throw ConfigInvalid(tag + ": expected an object with A and B");
        }
        try {
            systems.emplace_back(detail::parse_matrix(c["A"], tag + ".A"),
                                 detail::parse_matrix(c["B"], tag + ".B"));
        } catch (const DimensionMismatch& e) {
            throw ConfigInvalid(tag + ": " + e.what());
        }
    }
    std::size_t true_index = 0;
    if (j.contains("true_index")) {
        if (!j["true_index"].is_number_unsigned()) {
            throw ConfigInvalid("true_index: expected a nonnegative integer");
        }
        true_index = j["true_index"].get<std::size_t>();
    }

    std::optional<HypothesisSet> set;
    try {
        set.emplace(std::move(systems), true_index);
    } catch (const DimensionMismatch& e) {
        throw ConfigInvalid(std::string("candidates: ") + e.what());
    }

    if (!j.contains("sigma_w") || !j.contains("sigma_u")) {
        throw ConfigInvalid("sigma_w/sigma_u: both covariances are required");
    }
    std::optional<NoiseConfig> noise;
    try {
        noise.emplace(detail::parse_matrix(j["sigma_w"], "sigma_w"),
                      detail::parse_matrix(j["sigma_u"], "sigma_u"));
    } catch (const NotPositiveDefinite& e) {
        throw ConfigInvalid(e.what());
    } catch (const NotSymmetric& e) {
        throw ConfigInvalid(e.what());
    } catch (const DimensionMismatch& e) {
        throw ConfigInvalid(e.what());
    }

    if (!j.contains("horizons") || !j["horizons"].is_array()) {
        throw ConfigInvalid("horizons: expected an array of integers");
    }
    std::vector<long> horizons;
    for (const auto& t : j["horizons"]) {
        if (!t.is_number_integer()) throw ConfigInvalid("horizons: entries must be integers");
        horizons.push_back(t.get<long>());
    }

    bool run_mle = true, run_ols = true;
    if (j.contains("estimators")) {
        if (!j["estimators"].is_array()) {
            throw ConfigInvalid("estimators: expected an array of names");
        }
        run_mle = run_ols = false;
        for (const auto& e : j["estimators"]) {
            const std::string name = e.get<std::string>();
            if (name == "mle") {
                run_mle = true;
            } else if (name == "ols") {
                run_ols = true;
            } else {
                throw ConfigInvalid("estimators: unknown estimator '" + name + "'");
            }
        }
    }

    Vector x0(set->state_dim(), 0.0);
    if (j.contains("x0")) {
        if (!j["x0"].is_array()) throw ConfigInvalid("x0: expected an array of numbers");
        x0.clear();
        for (const auto& e : j["x0"]) x0.push_back(e.get<double>());
    }

    if (j.contains("n_trials") && !j["n_trials"].is_number_integer()) {
        throw ConfigInvalid("n_trials: expected an integer");
    }
    if (j.contains("delta") && !j["delta"].is_number()) {
        throw ConfigInvalid("delta: expected a number");
    }
    if (j.contains("seed") && !j["seed"].is_number_integer()) {
        throw ConfigInvalid("seed: expected an integer");
    }

    ExperimentConfig cfg{std::move(*set),
                         std::move(*noise),
                         std::move(horizons),
                         j.value("n_trials", 1L),
                         j.value("delta", 0.05),
                         j.value("seed", std::uint64_t{1}),
                         run_mle,
                         run_ols,
                         std::move(x0)};
    cfg.validate();
    return cfg;
}

}  // namespace detail

/// Parses the JSON configuration document. Shape:
/// {
///   "candidates": [{"A": [[...]], "B": [[...]]}, ...],
///   "true_index": 0,
///   "sigma_u": [[...]], "sigma_w": [[...]],
///   "horizons": [250, 500],
///   "n_trials": 1000, "delta": 0.05, "seed": 1,
///   "estimators": ["mle", "ols"],
///   "x0": [0, 0, 0]            // optional, defaults to zero
/// }
inline ExperimentConfig parse_config(const nlohmann::json& j) {
    try {
        return detail::parse_config_checked(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigInvalid(std::string("config: ") + e.what());
    }
}

inline nlohmann::json to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["candidates"] = nlohmann::json::array();
    for (const auto& c : cfg.set.candidates()) {
        j["candidates"].push_back(
            {{"A", detail::matrix_to_json(c.a)}, {"B", detail::matrix_to_json(c.b)}});
    }
    j["true_index"] = cfg.set.true_index();
    j["sigma_w"] = detail::matrix_to_json(cfg.noise.sigma_w());
    j["sigma_u"] = detail::matrix_to_json(cfg.noise.sigma_u());
    j["horizons"] = cfg.horizons;
    j["n_trials"] = cfg.n_trials;
    j["delta"] = cfg.delta;
    j["seed"] = cfg.seed;
    nlohmann::json estimators = nlohmann::json::array();
    if (cfg.run_mle) estimators.push_back("mle");
    if (cfg.run_ols) estimators.push_back("ols");
    j["estimators"] = std::move(estimators);
    j["x0"] = cfg.x0;
    return j;
}

/// FNV-1a over the canonical serialized config; identifies a run in the
/// emitted tables.
inline std::string config_digest(const ExperimentConfig& cfg) {
    const std::string dump = to_json(cfg).dump();
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

/// FINSET_SEED overrides the config seed when set (explicit --seed flags
/// are applied after this, so they win).
inline void apply_env_seed_override(ExperimentConfig& cfg) {
    const char* env = std::getenv("FINSET_SEED");
    if (!env || *env == '\0') return;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
        throw ConfigInvalid("FINSET_SEED: expected an unsigned integer");
    }
    cfg.seed = v;
}

/// The built-in three-candidate benchmark set: upper-triangular 3x3
/// dynamics differing in one diagonal entry each, a shared tall input
/// matrix, and three covariance settings that excite different state
/// directions. Five horizons, 1000 trials, delta 0.05.
inline ExperimentConfig builtin_paper_config(int experiment) {
    if (experiment < 1 || experiment > 3) {
        throw UnknownExperiment("builtin experiment must be 1, 2 or 3, got " +
                                std::to_string(experiment));
    }
    auto make_a = [](double a, double b) {
        return Matrix{{a, 0.1, 0.0}, {0.0, 0.2, 0.0}, {0.0, 0.0, b}};
    };
    const Matrix b{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    std::vector<SystemParams> candidates;
    candidates.emplace_back(make_a(0.2, 0.5), b);
    candidates.emplace_back(make_a(0.1, 0.5), b);
    candidates.emplace_back(make_a(0.2, 0.6), b);

    Matrix sigma_u = experiment == 2 ? Matrix::diagonal({0.1, 10.0})
                                     : Matrix::diagonal({10.0, 0.1});
    Matrix sigma_w = experiment == 3 ? Matrix::diagonal({10.0, 0.1, 0.001})
                                     : Matrix(Matrix::identity(3) * 0.1);

    ExperimentConfig cfg{HypothesisSet(std::move(candidates), 0),
                         NoiseConfig(std::move(sigma_w), std::move(sigma_u)),
                         {250, 500, 750, 1000, 1250},
                         1000,
                         0.05,
                         1,
                         true,
                         true,
                         Vector(3, 0.0)};
    cfg.validate();
    return cfg;
}

/// Selection tallies for one (estimator, horizon) pair.
struct TrialCounts {
    EstimatorKind estimator;
    long horizon = 0;
    std::vector<long> counts;  // per candidate index
    long failed = 0;           // OLS runs aborted by rank deficiency
};

/// Monte Carlo results: counts per estimator, horizon and candidate, with
/// the seed and config digest that produced them.
struct TrialTable {
    std::vector<TrialCounts> rows;
    long n_trials = 0;
    std::uint64_t seed = 0;
    std::string digest;
};

/// Runs n_trials independent trajectories per horizon and tallies which
/// candidate each enabled estimator selects. Trial j of horizon index h
/// draws from stream (h << 32) | j, and both estimators see the same
/// trajectory, so tables are reproducible and estimator comparisons are
/// paired. Trials run on n_threads threads (0 = hardware concurrency);
/// counting is order-independent so the table does not depend on the
/// thread count.
inline TrialTable run_montecarlo(const ExperimentConfig& cfg, unsigned n_threads = 0) {
    cfg.validate();
    const std::size_t n_candidates = cfg.set.size();
    if (n_threads == 0) {
        n_threads = std::max(1u, std::thread::hardware_concurrency());
    }
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(cfg.n_trials));

    TrialTable table;
    table.n_trials = cfg.n_trials;
    table.seed = cfg.seed;
    table.digest = config_digest(cfg);

    std::vector<TrialCounts> mle_rows;
    std::vector<TrialCounts> ols_rows;
    for (std::size_t h = 0; h < cfg.horizons.size(); ++h) {
        const long horizon = cfg.horizons[h];
        TrialCounts mle_counts{EstimatorKind::kMle, horizon,
                               std::vector<long>(n_candidates, 0), 0};
        TrialCounts ols_counts{EstimatorKind::kOlsProjection, horizon,
                               std::vector<long>(n_candidates, 0), 0};

        auto worker = [&](long begin, long end, TrialCounts& mle_local,
                          TrialCounts& ols_local) {
            for (long trial = begin; trial < end; ++trial) {
                const std::uint64_t stream =
                    (static_cast<std::uint64_t>(h) << 32) | static_cast<std::uint64_t>(trial);
                RngState rng(cfg.seed, stream);
                const Trajectory traj =
                    simulate(cfg.set.true_system(), cfg.noise, cfg.x0, horizon, rng);
                if (cfg.run_mle) {
                    ++mle_local.counts[mle_estimate(cfg.set, cfg.noise, traj).chosen];
                }
                if (cfg.run_ols) {
                    try {
                        ++ols_local.counts[ols_project_estimate(cfg.set, traj).chosen];
                    } catch (const RankDeficient&) {
                        ++ols_local.failed;
                    }
                }
            }
        };

        if (n_threads <= 1) {
            worker(0, cfg.n_trials, mle_counts, ols_counts);
        } else {
            std::vector<TrialCounts> mle_parts(
                n_threads, TrialCounts{EstimatorKind::kMle, horizon,
                                       std::vector<long>(n_candidates, 0), 0});
            std::vector<TrialCounts> ols_parts(
                n_threads, TrialCounts{EstimatorKind::kOlsProjection, horizon,
                                       std::vector<long>(n_candidates, 0), 0});
            std::vector<std::thread> threads;
            const long chunk = (cfg.n_trials + n_threads - 1) / n_threads;
            for (unsigned w = 0; w < n_threads; ++w) {
                const long begin = static_cast<long>(w) * chunk;
                const long end = std::min<long>(begin + chunk, cfg.n_trials);
                if (begin >= end) break;
                threads.emplace_back(worker, begin, end, std::ref(mle_parts[w]),
                                     std::ref(ols_parts[w]));
            }
            for (auto& t : threads) t.join();
            for (unsigned w = 0; w < n_threads; ++w) {
                for (std::size_t c = 0; c < n_candidates; ++c) {
                    mle_counts.counts[c] += mle_parts[w].counts[c];
                    ols_counts.counts[c] += ols_parts[w].counts[c];
                }
                ols_counts.failed += ols_parts[w].failed;
            }
        }
        if (cfg.run_mle) mle_rows.push_back(std::move(mle_counts));
        if (cfg.run_ols) ols_rows.push_back(std::move(ols_counts));
    }
    for (auto& r : mle_rows) table.rows.push_back(std::move(r));
    for (auto& r : ols_rows) table.rows.push_back(std::move(r));
    return table;
}

/// CSV with columns estimator,T,candidate,count,pct,failed (one row per
/// candidate; `failed` repeats the per-(estimator,T) failure count).
/// Percentages are over n_trials, printed with one decimal.
inline std::string to_csv(const TrialTable& table) {
    std::ostringstream os;
    os << "# seed=" << table.seed << " n_trials=" << table.n_trials
       << " config=" << table.digest << "\n";
    os << "estimator,T,candidate,count,pct,failed\n";
    char pct[32];
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.counts.size(); ++c) {
            std::snprintf(pct, sizeof(pct), "%.1f",
                          100.0 * static_cast<double>(row.counts[c]) /
                              static_cast<double>(table.n_trials));
            os << estimator_name(row.estimator) << "," << row.horizon << "," << c << ","
               << row.counts[c] << "," << pct << "," << row.failed << "\n";
        }
    }
    return os.str();
}

inline nlohmann::json to_json(const TrialTable& table) {
    nlohmann::json j;
    j["seed"] = table.seed;
    j["n_trials"] = table.n_trials;
    j["config"] = table.digest;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : table.rows) {
        nlohmann::json jr;
        jr["estimator"] = estimator_name(row.estimator);
        jr["T"] = row.horizon;
        jr["counts"] = row.counts;
        jr["failed"] = row.failed;
        nlohmann::json pcts = nlohmann::json::array();
        for (long c : row.counts) {
            pcts.push_back(100.0 * static_cast<double>(c) /
                           static_cast<double>(table.n_trials));
        }
        jr["pct"] = std::move(pcts);
        j["rows"].push_back(std::move(jr));
    }
    return j;
}

/// Evaluates the sufficient condition at every configured horizon and
/// searches the minimal horizons in both directions, with the search
/// capped at 100x the largest configured horizon.
inline BoundReport run_bounds(const ExperimentConfig& cfg, bool gramian_diagnostics = false,
                              CovarianceConvention convention =
                                  CovarianceConvention::kZeroStart) {
    cfg.validate();
    BoundReport report;
    report.delta = cfg.delta;
    report.convention = convention;
    long max_horizon = 0;
    for (long t : cfg.horizons) max_horizon = std::max(max_horizon, t);
    report.lower_search_max = max_horizon * 100;
    report.upper_search_max = max_horizon * 100;

    for (long t : cfg.horizons) {
        report.checks.push_back(upper_bound_check(cfg.set, cfg.noise, cfg.delta, t, convention));
    }
    report.minimal_lower_bound = minimal_lower_bound_horizon(
        cfg.set, cfg.noise, cfg.delta, report.lower_search_max, convention);
    report.minimal_upper_bound = minimal_upper_bound_horizon(
        cfg.set, cfg.noise, cfg.delta, report.upper_search_max, convention);

    if (gramian_diagnostics) {
        report.with_gramian_diagnostics = true;
        for (const auto& check : report.checks) {
            std::vector<double> rhs_row;
            std::vector<double> lhs_row;
            const double factor = 9.0 * static_cast<double>(check.witness_k) *
                                  static_cast<double>(check.horizon / check.witness_k) /
                                  (3200.0 * static_cast<double>(check.horizon));
            for (const auto& cb : check.candidates) {
                rhs_row.push_back(factor * snr_gramian_norm(cfg.set, cfg.noise, cb.index,
                                                            check.witness_k / 2));
                lhs_row.push_back(lower_bound_lhs(cfg.set, cfg.noise, cb.index, check.horizon,
                                                  convention, SnrRoute::kGramianNorm));
            }
            report.gramian_condition_rhs.push_back(std::move(rhs_row));
            report.gramian_lower_lhs.push_back(std::move(lhs_row));
        }
    }
    return report;
}

}  // namespace finset
