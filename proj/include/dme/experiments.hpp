#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dme/sampler.hpp"

namespace dme {

/// Parameters of one Monte Carlo run. Everything that influences the result
/// is in here (and echoed in the report); `threads` only changes how fast.
struct ExperimentConfig {
    std::string name;
    std::size_t n = 0;     ///< 0: the experiment's default
    std::size_t reps = 0;  ///< 0: the experiment's default
    std::uint64_t seed = 0;
    std::map<std::string, double> extra;  ///< knobs and thresholds, by name
    unsigned threads = 1;

    /// extra[key] if present, otherwise `fallback` (which is then recorded in
    /// extra so that the echo lists every value actually used).
    double param(const std::string& key, double fallback);
    bool has(const std::string& key) const { return extra.count(key) != 0; }
};

/// One pass/fail check. `relation` is one of "<", "<=", ">", ">=", "in"
/// (closed interval) or "within" (|value - target| <= bound); the thresholds
/// are the config keys it was evaluated against.
struct Criterion {
    std::string name;
    double value = 0.0;
    std::string relation;
    std::vector<std::string> thresholds;
    bool pass = false;
    bool hard = true;  ///< soft criteria are measurements (conjectures)
};

/// Tabular data written next to the report as CSV.
struct Artifact {
    std::string file;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
    ExperimentConfig config;  ///< echo with every default resolved
    std::map<std::string, double> statistics;
    std::vector<Criterion> criteria;
    std::vector<Artifact> artifacts;
    std::vector<std::string> failures;  ///< replicas aborted by a numerical error
    double wall_time = 0.0;             ///< seconds; not part of the serialised report

    /// True when every hard criterion passed.
    bool passed() const;
    const Criterion* criterion(const std::string& name) const;
};

/// Registered experiment names, in a fixed order.
std::vector<std::string> experiment_names();

/// Dispatches on config.name; ParameterError for an unknown name.
ExperimentReport run_experiment(ExperimentConfig config);

/// Replica stream for an experiment: seed = config seed, stream id hashed
/// from (experiment name, n, replica). Shared by every rung of a ladder so
/// that runs at different n follow the same seed policy.
RngStream experiment_stream(const std::string& name, std::uint64_t seed, std::size_t n, std::size_t replica);

ExperimentReport exp_quarter_circle(ExperimentConfig config);
ExperimentReport exp_circle_law(ExperimentConfig config);
ExperimentReport exp_spectral_gap(ExperimentConfig config);
ExperimentReport exp_marginals(ExperimentConfig config);
/// Uses the translation selected by extra "t_kind": 0 identity, 1 cyclic
/// permutation i -> i + 1, 2 Wedderburn (1/n) 1.
ExperimentReport exp_translation(ExperimentConfig config);
ExperimentReport exp_translation(ExperimentConfig config, const MarkovMatrix& t);
ExperimentReport exp_row_asymptotics(ExperimentConfig config);
ExperimentReport exp_generic_mp(ExperimentConfig config);
ExperimentReport exp_symmetric_part(ExperimentConfig config);
ExperimentReport exp_kernel_convergence(ExperimentConfig config);

/// ||M^k - 1 pi^T||_inf for each k in `powers`.
std::vector<double> kernel_distances(const MarkovMatrix& m, const SimplexVector& pi,
                                     const std::vector<unsigned>& powers);

/// Least-squares geometric rate exp(slope) of log d_k against k, using only
/// the points with d_k > floor. Returns 0 when fewer than two points qualify.
double geometric_rate(const std::vector<unsigned>& powers, const std::vector<double>& distances, double floor);

}  // namespace dme
