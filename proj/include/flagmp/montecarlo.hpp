#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flagmp/code.hpp"
#include "flagmp/engine.hpp"

namespace flagmp {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Wilson score interval for k successes out of n at z standard deviations.
/// n == 0 gives [0, 0].
Interval wilson_interval(std::uint64_t k, std::uint64_t n, double z);

/// Failure probability given exactly `weight` faults.
struct WeightEstimate {
    int level = 0;
    std::size_t weight = 0;
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;
    double r = 0.0;
    double sigma = 0.0;  // Wilson half-width at z = 1
    std::uint64_t seed = 0;
};

/// Wilson bounds of an estimate at z standard deviations.
Interval bounds(const WeightEstimate& e, double z);

struct TrialOptions {
    EngineConfig engine{};
    TieBreaker::Mode tiebreak = TieBreaker::Mode::Random;
    /// 0 picks FLAGMP_WORKERS or the OpenMP default.
    int workers = 0;
};

/// Worker count after applying the FLAGMP_WORKERS override.
int resolve_workers(int requested);

/// One fixed-weight trial; trial `index` draws everything from trial_stream(seed, index).
bool run_fixed_weight_trial(Executor& ex, std::size_t weight, std::uint64_t seed, std::uint64_t index,
                            TieBreaker::Mode tiebreak);

/// Parallel estimate of r_weight. Weight 0 is analytic (r = 0, no trials).
WeightEstimate estimate_r(const Circuit& circuit, std::size_t weight, std::uint64_t trials, std::uint64_t seed,
                          const TrialOptions& options = {});

/// Single-threaded reference; returns identical results to estimate_r.
WeightEstimate estimate_r_serial(const Circuit& circuit, std::size_t weight, std::uint64_t trials,
                                 std::uint64_t seed, const TrialOptions& options = {});

struct CurvePoint {
    double p = 0.0;
    double p_logical = 0.0;
    double ci_lo = 0.0;  // from the 2 sigma Wilson bounds of every r_i
    double ci_hi = 0.0;
    double tail_mass = 0.0;  // binomial mass above the cap
    bool truncated = false;  // tail_mass > kTailWarning
};

inline constexpr int kDefaultCap = 29;
inline constexpr double kTailWarning = 1e-3;

/// p_L(p) = sum_{i<=cap} r_i C(N,i) p^i (1-p)^(N-i). Needs an estimate for
/// every weight in 0..min(cap, N).
std::vector<CurvePoint> assemble_curve(std::span<const WeightEstimate> estimates, std::size_t locations,
                                       std::span<const double> grid, int cap = kDefaultCap);

/// `points` log-spaced values from pmin to pmax inclusive.
std::vector<double> log_grid(double pmin, double pmax, int points);

/// Least-squares slope of log p_L against log p over points with p in [pmin, pmax].
double loglog_slope(std::span<const CurvePoint> curve, double pmin, double pmax);

/// Crossing of two curves on a shared grid, by log-log interpolation of the
/// first sign change of log(a) - log(b). Empty if they do not cross.
std::optional<double> crossing(std::span<const CurvePoint> a, std::span<const CurvePoint> b);

/// Trials grouped by the smallest C_L reported by the final ECs.
struct ConfidenceBin {
    Weight confidence;
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;
};

/// Stochastic trials at rate p, binned by reported confidence (ascending).
std::vector<ConfidenceBin> confidence_calibration(const Circuit& circuit, double p, std::uint64_t trials,
                                                  std::uint64_t seed, const TrialOptions& options = {});

struct ExhaustiveOptions {
    std::uint64_t budget = 10'000'000;  // evaluated assignments per weight
    bool allow_sampling = true;
    std::uint64_t sample_trials = 1'000'000;
    std::uint64_t seed = 1;
    TrialOptions trial{};
};

struct WeightSearch {
    std::size_t weight = 0;
    bool exhaustive = true;
    std::uint64_t assignments = 0;  // placements x fault kinds (or sampled trials)
    std::uint64_t branches = 0;     // runs including every tie-break branch
    std::uint64_t failures = 0;     // failing branches
};

struct ExhaustiveResult {
    int level = 0;
    std::size_t max_weight = 0;
    std::optional<std::size_t> min_failing;
    std::vector<WeightSearch> weights;
};

/// Number of (placement, fault kind) assignments of exactly `weight` faults,
/// saturating at UINT64_MAX.
std::uint64_t count_assignments(const Circuit& circuit, std::size_t weight);

/// Searches weights 1..max_weight in order and stops at the first weight
/// with a failure. Weights over budget are sampled if allowed, otherwise
/// std::length_error is thrown.
ExhaustiveResult exhaustive_search(const Circuit& circuit, std::size_t max_weight,
                                   const ExhaustiveOptions& options = {});

/// Runs one error set under every tie-break branch. Returns {branches, failures}.
std::pair<std::uint64_t, std::uint64_t> sweep_ties(Executor& ex, const ErrorSet& errors);

}  // namespace flagmp
