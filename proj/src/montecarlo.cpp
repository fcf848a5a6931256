#include "flagmp/montecarlo.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <stdexcept>

namespace flagmp {

Interval wilson_interval(std::uint64_t k, std::uint64_t n, double z) {
    if (n == 0) return {0.0, 0.0};
    if (k > n) throw std::invalid_argument("wilson_interval: more successes than trials");
    const double nn = static_cast<double>(n);
    const double ph = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (ph + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

Interval bounds(const WeightEstimate& e, double z) { return wilson_interval(e.failures, e.trials, z); }

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FLAGMP_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
        throw std::invalid_argument(std::string("FLAGMP_WORKERS must be a positive integer, got '") + env + "'");
    }
    return omp_get_max_threads();
}

namespace {

// Distinct stream family per weight so weights never share trial streams.
std::uint64_t weight_seed(std::uint64_t seed, std::size_t weight) {
    return splitmix64(seed ^ (0xD1B54A32D192ED03ull * (weight + 1)));
}

TieBreaker make_tiebreak(TieBreaker::Mode mode, std::mt19937_64& rng) {
    if (mode == TieBreaker::Mode::Priority) return TieBreaker::priority();
    if (mode == TieBreaker::Mode::Random) return TieBreaker::random(rng);
    throw std::invalid_argument("sampling needs the random or priority tie-break rule");
}

WeightEstimate finish(const Circuit& circuit, std::size_t weight, std::uint64_t trials, std::uint64_t failures,
                      std::uint64_t seed) {
    WeightEstimate e;
    e.level = circuit.level;
    e.weight = weight;
    e.trials = trials;
    e.failures = failures;
    e.seed = seed;
    e.r = trials ? static_cast<double>(failures) / static_cast<double>(trials) : 0.0;
    const Interval iv = wilson_interval(failures, trials, 1.0);
    e.sigma = 0.5 * (iv.hi - iv.lo);
    return e;
}

void check_weight(const Circuit& circuit, std::size_t weight) {
    if (weight > circuit.size()) {
        throw std::invalid_argument("weight " + std::to_string(weight) + " exceeds the " +
                                    std::to_string(circuit.size()) + " locations");
    }
}

}  // namespace

bool run_fixed_weight_trial(Executor& ex, std::size_t weight, std::uint64_t seed, std::uint64_t index,
                            TieBreaker::Mode tiebreak) {
    auto rng = trial_stream(seed, index);
    const ErrorSet errors = inject_fixed_weight(ex.circuit(), weight, rng);
    TieBreaker tb = make_tiebreak(tiebreak, rng);
    return ex.execute(errors, tb).success;
}

WeightEstimate estimate_r_serial(const Circuit& circuit, std::size_t weight, std::uint64_t trials,
                                 std::uint64_t seed, const TrialOptions& options) {
    check_weight(circuit, weight);
    if (weight == 0) return finish(circuit, 0, 0, 0, seed);
    if (trials == 0) throw std::invalid_argument("estimate_r: trials must be positive");
    const std::uint64_t s = weight_seed(seed, weight);
    Executor ex(circuit, options.engine);
    std::uint64_t failures = 0;
    for (std::uint64_t t = 0; t < trials; ++t) failures += !run_fixed_weight_trial(ex, weight, s, t, options.tiebreak);
    return finish(circuit, weight, trials, failures, seed);
}

WeightEstimate estimate_r(const Circuit& circuit, std::size_t weight, std::uint64_t trials, std::uint64_t seed,
                          const TrialOptions& options) {
    check_weight(circuit, weight);
    if (weight == 0) return finish(circuit, 0, 0, 0, seed);
    if (trials == 0) throw std::invalid_argument("estimate_r: trials must be positive");
    if (options.tiebreak == TieBreaker::Mode::Scripted) throw std::invalid_argument("sampling needs a random or priority tie-break");
    const std::uint64_t s = weight_seed(seed, weight);
    const int workers = resolve_workers(options.workers);
    std::uint64_t failures = 0;
#pragma omp parallel num_threads(workers) reduction(+ : failures)
    {
        Executor ex(circuit, options.engine);
#pragma omp for schedule(dynamic, 64)
        for (std::int64_t t = 0; t < static_cast<std::int64_t>(trials); ++t) {
            failures += !run_fixed_weight_trial(ex, weight, s, static_cast<std::uint64_t>(t), options.tiebreak);
        }
    }
    return finish(circuit, weight, trials, failures, seed);
}

std::vector<double> log_grid(double pmin, double pmax, int points) {
    if (!(pmin > 0.0) || !(pmax >= pmin) || pmax > 1.0) throw std::invalid_argument("grid needs 0 < pmin <= pmax <= 1");
    if (points < 1) throw std::invalid_argument("grid needs at least one point");
    std::vector<double> g(points);
    if (points == 1) {
        g[0] = pmin;
        return g;
    }
    const double a = std::log(pmin), b = std::log(pmax);
    for (int i = 0; i < points; ++i) g[i] = std::exp(a + (b - a) * i / (points - 1));
    g.front() = pmin;
    g.back() = pmax;
    return g;
}

std::vector<CurvePoint> assemble_curve(std::span<const WeightEstimate> estimates, std::size_t locations,
                                       std::span<const double> grid, int cap) {
    if (cap < 0) throw std::invalid_argument("cap must be non-negative");
    const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(cap), locations);
    std::vector<const WeightEstimate*> by_weight(top + 1, nullptr);
    for (const auto& e : estimates) {
        if (e.weight <= top) by_weight[e.weight] = &e;
    }
    for (std::size_t i = 0; i <= top; ++i) {
        if (!by_weight[i]) throw std::invalid_argument("no estimate for weight " + std::to_string(i));
    }
    std::vector<double> r(top + 1), lo(top + 1), hi(top + 1);
    for (std::size_t i = 0; i <= top; ++i) {
        const auto& e = *by_weight[i];
        r[i] = e.r;
        if (e.trials == 0) {
            lo[i] = hi[i] = e.r;
        } else {
            const Interval iv = bounds(e, 2.0);
            lo[i] = std::min(iv.lo, e.r);
            hi[i] = std::max(iv.hi, e.r);
        }
    }

    const double n = static_cast<double>(locations);
    std::vector<CurvePoint> out;
    out.reserve(grid.size());
    for (double p : grid) {
        if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("grid values must lie in (0, 1]");
        const double lp = std::log(p);
        const double lq = std::log1p(-p);
        auto log_pmf = [&](std::size_t i) {
            const double k = static_cast<double>(i);
            const double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
            const double tail = (n - k) == 0.0 ? 0.0 : (n - k) * lq;
            return lc + k * lp + tail;
        };
        CurvePoint c;
        c.p = p;
        for (std::size_t i = 0; i <= top; ++i) {
            const double w = std::exp(log_pmf(i));
            c.p_logical += r[i] * w;
            c.ci_lo += lo[i] * w;
            c.ci_hi += hi[i] * w;
        }
        // Tail mass above the cap, summed directly until the terms vanish.
        for (std::size_t i = top + 1; i <= locations; ++i) {
            const double w = std::exp(log_pmf(i));
            c.tail_mass += w;
            if (w < 1e-300 && static_cast<double>(i) > n * p) break;
        }
        c.p_logical = std::clamp(c.p_logical, 0.0, 1.0);
        c.ci_lo = std::clamp(c.ci_lo, 0.0, 1.0);
        c.ci_hi = std::clamp(c.ci_hi, 0.0, 1.0);
        c.truncated = c.tail_mass > kTailWarning;
        out.push_back(c);
    }
    return out;
}

double loglog_slope(std::span<const CurvePoint> curve, double pmin, double pmax) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& c : curve) {
        if (c.p < pmin * (1 - 1e-12) || c.p > pmax * (1 + 1e-12) || !(c.p_logical > 0.0)) continue;
        const double x = std::log(c.p), y = std::log(c.p_logical);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) throw std::invalid_argument("slope fit needs two positive points in range");
    const double d = n * sxx - sx * sx;
    if (d == 0.0) throw std::invalid_argument("slope fit over a single abscissa");
    return (n * sxy - sx * sy) / d;
}

std::optional<double> crossing(std::span<const CurvePoint> a, std::span<const CurvePoint> b) {
    if (a.size() != b.size()) throw std::invalid_argument("curves must share a grid");
    double prev_d = 0.0, prev_x = 0.0;
    bool have_prev = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].p != b[i].p) throw std::invalid_argument("curves must share a grid");
        if (!(a[i].p_logical > 0.0) || !(b[i].p_logical > 0.0)) continue;
        const double x = std::log(a[i].p);
        const double d = std::log(a[i].p_logical) - std::log(b[i].p_logical);
        if (d == 0.0) return a[i].p;
        if (have_prev && (d > 0.0) != (prev_d > 0.0)) {
            const double t = prev_d / (prev_d - d);
            return std::exp(prev_x + t * (x - prev_x));
        }
        prev_d = d;
        prev_x = x;
        have_prev = true;
    }
    return std::nullopt;
}

std::vector<ConfidenceBin> confidence_calibration(const Circuit& circuit, double p, std::uint64_t trials,
                                                  std::uint64_t seed, const TrialOptions& options) {
    const int workers = resolve_workers(options.workers);
    std::vector<std::map<std::uint16_t, std::pair<std::uint64_t, std::uint64_t>>> partial(workers);
#pragma omp parallel num_threads(workers)
    {
        Executor ex(circuit, options.engine);
        auto& mine = partial[omp_get_thread_num()];
#pragma omp for schedule(dynamic, 64)
        for (std::int64_t t = 0; t < static_cast<std::int64_t>(trials); ++t) {
            auto rng = trial_stream(seed, static_cast<std::uint64_t>(t));
            const ErrorSet errors = inject_stochastic(circuit, p, rng);
            TieBreaker tb = make_tiebreak(options.tiebreak, rng);
            const TrialResult res = ex.execute(errors, tb);
            auto& bin = mine[res.min_final_confidence().value()];
            ++bin.first;
            bin.second += !res.success;
        }
    }
    std::map<std::uint16_t, std::pair<std::uint64_t, std::uint64_t>> merged;
    for (const auto& m : partial) {
        for (const auto& [k, v] : m) {
            merged[k].first += v.first;
            merged[k].second += v.second;
        }
    }
    std::vector<ConfidenceBin> out;
    for (const auto& [k, v] : merged) out.push_back({Weight(k), v.first, v.second});
    return out;
}

std::uint64_t count_assignments(const Circuit& circuit, std::size_t weight) {
    // Elementary symmetric polynomial of the per-location kind counts.
    std::vector<long double> e(weight + 1, 0.0L);
    e[0] = 1.0L;
    for (const auto& loc : circuit.locations) {
        const long double k = fault_kind_count(loc.kind);
        for (std::size_t j = weight; j >= 1; --j) e[j] += e[j - 1] * k;
    }
    const long double v = e[weight];
    if (v >= static_cast<long double>(std::numeric_limits<std::uint64_t>::max())) {
        return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(std::llround(v));
}

std::pair<std::uint64_t, std::uint64_t> sweep_ties(Executor& ex, const ErrorSet& errors) {
    std::vector<std::uint8_t> script;
    std::uint64_t branches = 0, failures = 0;
    while (true) {
        TieBreaker tb = TieBreaker::scripted(script);
        const bool ok = ex.execute(errors, tb).success;
        ++branches;
        failures += !ok;
        // Advance the choice odometer over the ties this branch met.
        const auto& ar = tb.arities();
        std::vector<std::uint8_t> taken(ar.size());
        for (std::size_t i = 0; i < ar.size(); ++i) taken[i] = i < script.size() ? script[i] : 0;
        std::size_t j = ar.size();
        while (j > 0 && taken[j - 1] + 1 >= ar[j - 1]) --j;
        if (j == 0) break;
        taken.resize(j);
        ++taken[j - 1];
        script = std::move(taken);
    }
    return {branches, failures};
}

namespace {

struct Enumerator {
    Executor& ex;
    std::size_t weight;
    ErrorSet errors;
    std::uint64_t assignments = 0, branches = 0, failures = 0;

    void rec(std::uint32_t next) {
        if (errors.size() == weight) {
            const auto [b, f] = sweep_ties(ex, errors);
            ++assignments;
            branches += b;
            failures += f;
            return;
        }
        const std::size_t need = weight - errors.size();
        const auto& locs = ex.circuit().locations;
        for (std::uint32_t l = next; l + need <= locs.size(); ++l) {
            const int kinds = fault_kind_count(locs[l].kind);
            for (int k = 1; k <= kinds; ++k) {
                errors.push_back(Fault{l, static_cast<std::uint8_t>(k)});
                rec(l + 1);
                errors.pop_back();
            }
        }
    }
};

}  // namespace

ExhaustiveResult exhaustive_search(const Circuit& circuit, std::size_t max_weight, const ExhaustiveOptions& options) {
    if (max_weight < 1) throw std::invalid_argument("max_weight must be at least 1");
    check_weight(circuit, max_weight);
    ExhaustiveResult res;
    res.level = circuit.level;
    res.max_weight = max_weight;
    const int workers = resolve_workers(options.trial.workers);
    for (std::size_t w = 1; w <= max_weight; ++w) {
        WeightSearch ws;
        ws.weight = w;
        const std::uint64_t total = count_assignments(circuit, w);
        if (total > options.budget) {
            if (!options.allow_sampling) {
                throw std::length_error("weight " + std::to_string(w) + " needs " + std::to_string(total) +
                                        " assignments, over the budget of " + std::to_string(options.budget));
            }
            TrialOptions topt = options.trial;
            topt.tiebreak = TieBreaker::Mode::Random;
            const WeightEstimate e = estimate_r(circuit, w, options.sample_trials, options.seed, topt);
            ws.exhaustive = false;
            ws.assignments = ws.branches = e.trials;
            ws.failures = e.failures;
        } else {
            std::uint64_t a = 0, b = 0, f = 0;
            const auto n = static_cast<std::int64_t>(circuit.size());
#pragma omp parallel num_threads(workers) reduction(+ : a, b, f)
            {
                Executor ex(circuit, options.trial.engine);
                Enumerator en{ex, w, {}};
#pragma omp for schedule(dynamic, 1)
                for (std::int64_t first = 0; first < n; ++first) {
                    const auto l = static_cast<std::uint32_t>(first);
                    if (l + w > circuit.size()) continue;
                    const int kinds = fault_kind_count(circuit.locations[l].kind);
                    for (int k = 1; k <= kinds; ++k) {
                        en.errors.assign(1, Fault{l, static_cast<std::uint8_t>(k)});
                        en.rec(l + 1);
                    }
                }
                a += en.assignments;
                b += en.branches;
                f += en.failures;
            }
            ws.assignments = a;
            ws.branches = b;
            ws.failures = f;
        }
        res.weights.push_back(ws);
        if (ws.failures > 0) {
            res.min_failing = w;
            break;
        }
    }
    return res;
}

}  // namespace flagmp
