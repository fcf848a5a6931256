#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "flagmp/engine.hpp"
#include "flagmp/montecarlo.hpp"

using namespace flagmp;

namespace {

const Circuit& exrec(int level) {
    static const Circuit c1 = build_exrec(1), c2 = build_exrec(2), c3 = build_exrec(3);
    return level == 1 ? c1 : level == 2 ? c2 : c3;
}

std::vector<FlagSet> fresh_flags(const Circuit& c) { return std::vector<FlagSet>(c.blocks.size() * 2); }

FlagSet& flag(std::vector<FlagSet>& t, std::uint32_t block, Basis b) { return t[block * 2 + index_of(b)]; }

// First location of the leading EC of block a whose X error lands in AG1.
std::uint32_t ag1_wait_in_leading_ec(const Circuit& c) {
    for (std::uint32_t l = 0; l < 24; ++l) {
        if (c.locations[l].kind == GateKind::Wait && c.locations[l].region_x() == Region::AG1) return l;
    }
    ADD_FAILURE() << "no AG1 wait";
    return 0;
}

}  // namespace

TEST(ErrorSet, Validation) {
    const Circuit& c = exrec(1);
    EXPECT_NO_THROW(validate_error_set(c, {{0, 1}, {5, 1}}));
    EXPECT_THROW(validate_error_set(c, {{5, 1}, {0, 1}}), std::invalid_argument);
    EXPECT_THROW(validate_error_set(c, {{5, 1}, {5, 1}}), std::invalid_argument);
    EXPECT_THROW(validate_error_set(c, {{100, 1}}), std::invalid_argument);
    EXPECT_THROW(validate_error_set(c, {{0, 2}}), std::invalid_argument);  // init has one kind
    EXPECT_THROW(validate_error_set(c, {{4, 0}}), std::invalid_argument);
    EXPECT_EQ(fault_kind_count(GateKind::Cnot), 15);
    EXPECT_EQ(fault_kind_count(GateKind::Wait), 3);
    EXPECT_EQ(fault_kind_count(GateKind::MeasX), 1);
}

TEST(Inject, StochasticExtremes) {
    const Circuit& c = exrec(1);
    std::mt19937_64 rng(1);
    EXPECT_TRUE(inject_stochastic(c, 0.0, rng).empty());
    const ErrorSet all = inject_stochastic(c, 1.0, rng);
    ASSERT_EQ(all.size(), c.size());
    EXPECT_NO_THROW(validate_error_set(c, all));
    EXPECT_THROW(inject_stochastic(c, 1.5, rng), std::invalid_argument);
}

TEST(Inject, StochasticMeanIsBinomial) {
    const Circuit& c = exrec(1);
    const double p = 0.01, n = static_cast<double>(c.size());
    const int draws = 10000;
    double total = 0;
    for (int i = 0; i < draws; ++i) {
        auto rng = trial_stream(17, i);
        total += static_cast<double>(inject_stochastic(c, p, rng).size());
    }
    const double mean = total / draws;
    const double sd_of_mean = std::sqrt(n * p * (1 - p) / draws);
    EXPECT_NEAR(mean, n * p, 3 * sd_of_mean);
}

TEST(Inject, FixedWeightExtremes) {
    const Circuit& c = exrec(1);
    std::mt19937_64 rng(2);
    EXPECT_TRUE(inject_fixed_weight(c, 0, rng).empty());
    const ErrorSet all = inject_fixed_weight(c, c.size(), rng);
    ASSERT_EQ(all.size(), c.size());
    for (std::uint32_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i].location, i);
    EXPECT_THROW(inject_fixed_weight(c, c.size() + 1, rng), std::invalid_argument);
    for (int t = 0; t < 200; ++t) EXPECT_NO_THROW(validate_error_set(c, inject_fixed_weight(c, 7, rng)));
}

TEST(Inject, SingleFaultPlacementUniform) {
    const Circuit& c = exrec(1);
    const int draws = 100000;
    std::vector<int> hist(c.size());
    std::map<int, int> cnot_kinds;
    for (int i = 0; i < draws; ++i) {
        auto rng = trial_stream(5, i);
        const Fault f = inject_fixed_weight(c, 1, rng).at(0);
        ++hist[f.location];
        if (c.locations[f.location].kind == GateKind::Cnot) ++cnot_kinds[f.pauli];
    }
    const double expect = double(draws) / c.size();
    const double sd = std::sqrt(expect * (1 - 1.0 / c.size()));
    for (int h : hist) EXPECT_NEAR(h, expect, 4 * sd);
    EXPECT_EQ(cnot_kinds.size(), 15u);
}

TEST(TrialStream, Deterministic) {
    auto a = trial_stream(9, 4), b = trial_stream(9, 4), c = trial_stream(9, 5);
    EXPECT_EQ(a(), b());
    EXPECT_NE(trial_stream(9, 4)(), c());
}

TEST(Execute, NoiselessSucceedsInBothModes) {
    for (int l = 1; l <= 3; ++l) {
        for (auto mode : {DecoderMode::MessagePassing, DecoderMode::Uniform}) {
            std::mt19937_64 rng(1);
            TieBreaker tb = TieBreaker::random(rng);
            EngineConfig cfg;
            cfg.mode = mode;
            const TrialResult r = execute(exrec(l), {}, tb, cfg);
            EXPECT_TRUE(r.success) << "level " << l;
            EXPECT_TRUE(tb.arities().empty());
        }
    }
}

TEST(Execute, FirstPhysicalCycleFlags) {
    // Oracle: every region tagged anywhere in the cycle gets weight 1, then
    // AG' = min(G, AG + A). Late gauge errors (G regions) exist in both bases,
    // so the carried-over gauge flags are 1, not the AG + A = 2 reports.
    const Circuit c = build_ec_cycle(1);
    Executor ex(c);
    TieBreaker tb = TieBreaker::priority();
    ex.run_program({}, tb);
    for (auto b : kBases) {
        std::array<Weight, 5> hit{};
        for (const auto& loc : c.locations) {
            for (int slot = 0; slot < 3; ++slot) {
                const Region r = loc.region[slot][index_of(b)];
                if (r != Region::N) hit[static_cast<int>(r) - 1] = Weight(1);
            }
        }
        for (auto f : {Flag::AG1, Flag::AG2, Flag::A, Flag::G1, Flag::G2}) {
            EXPECT_FALSE(hit[static_cast<int>(f)].is_inf()) << "region never tagged";
        }
        const auto at = [&](Flag f) { return hit[static_cast<int>(f)]; };
        const FlagSet& got = ex.flags(c.top_blocks[0], b);
        EXPECT_EQ(got[Flag::AG1], min(at(Flag::G1), at(Flag::AG1) + at(Flag::A)));
        EXPECT_EQ(got[Flag::AG2], min(at(Flag::G2), at(Flag::AG2) + at(Flag::A)));
        EXPECT_EQ(got[Flag::AG1], Weight(1));
        EXPECT_TRUE(got[Flag::A].is_inf());
        EXPECT_TRUE(got[Flag::G1].is_inf());
    }
}

TEST(Execute, LeadingEcAg1FaultBranches) {
    // Three-way tie in the leading EC. AG1 fixes it, AG2 completes a logical,
    // A leaves both gauge flags at 0 so each trailing EC guesses once more.
    const Circuit& c = exrec(1);
    const ErrorSet e{{ag1_wait_in_leading_ec(c), 1}};
    Executor ex(c);
    TieBreaker first = TieBreaker::scripted({});
    ex.execute(e, first);
    ASSERT_FALSE(first.arities().empty());
    EXPECT_EQ(first.arities()[0], 3);

    const auto [branches, failures] = sweep_ties(ex, e);
    EXPECT_EQ(branches, 6u);
    EXPECT_EQ(failures, 4u);

    const int n = 6000;
    int ok = 0;
    for (int s = 0; s < n; ++s) {
        auto rng = trial_stream(3, s);
        TieBreaker tb = TieBreaker::random(rng);
        ok += ex.execute(e, tb).success;
    }
    const double want = 1.0 / 3 + (1.0 / 3) * 0.25;
    EXPECT_NEAR(double(ok) / n, want, 4 * std::sqrt(want * (1 - want) / n));
}

TEST(Execute, UniformLevelOneFirstTieIsThreeWay) {
    const Circuit& c = exrec(1);
    EngineConfig cfg;
    cfg.mode = DecoderMode::Uniform;
    Executor ex(c, cfg);
    int ties = 0;
    for (std::uint32_t l = 0; l < c.size(); ++l) {
        for (int k = 1; k <= fault_kind_count(c.locations[l].kind); ++k) {
            TieBreaker tb = TieBreaker::scripted({});
            ex.reset();
            ex.run_program({{l, static_cast<std::uint8_t>(k)}}, tb);
            if (tb.arities().empty()) continue;
            ++ties;
            EXPECT_EQ(tb.arities()[0], 3) << "location " << l;
        }
    }
    EXPECT_GT(ties, 0);
}

TEST(Execute, UniformLevelOneSingleFaultCanFail) {
    ExhaustiveOptions opt;
    opt.trial.engine.mode = DecoderMode::Uniform;
    opt.trial.workers = 1;
    const auto r = exhaustive_search(exrec(1), 1, opt);
    ASSERT_TRUE(r.min_failing.has_value());
    EXPECT_EQ(*r.min_failing, 1u);
}

TEST(Execute, MemoMatchesFullSimulation) {
    for (int level : {2, 3}) {
        const Circuit& c = exrec(level);
        EngineConfig full;
        full.use_memo = false;
        Executor fast(c), slow(c, full);
        const int trials = level == 2 ? 400 : 40;
        for (int t = 0; t < trials; ++t) {
            const std::size_t w = 1 + t % 6;
            auto r1 = trial_stream(21, t), r2 = trial_stream(21, t);
            const ErrorSet e1 = inject_fixed_weight(c, w, r1), e2 = inject_fixed_weight(c, w, r2);
            ASSERT_EQ(e1, e2);
            TieBreaker t1 = TieBreaker::random(r1), t2 = TieBreaker::random(r2);
            const TrialResult a = fast.execute(e1, t1), b = slow.execute(e2, t2);
            ASSERT_EQ(a.success, b.success) << "trial " << t;
            ASSERT_EQ(a.nonzero_syndromes, b.nonzero_syndromes) << "trial " << t;
            ASSERT_EQ(a.final_confidence, b.final_confidence) << "trial " << t;
            ASSERT_EQ(r1(), r2()) << "tie-break draws diverged in trial " << t;
        }
        EXPECT_GT(fast.memo_size(), 0u);
        EXPECT_EQ(slow.memo_size(), 0u);
    }
}

TEST(Execute, DeterministicAcrossExecutors) {
    const Circuit& c = exrec(2);
    Executor a(c), b(c);
    for (int t = 0; t < 200; ++t) {
        // Executor b has seen other trials first; memo state must not matter.
        if (t == 0) {
            for (int w = 0; w < 30; ++w) run_fixed_weight_trial(b, 3, 99, w, TieBreaker::Mode::Random);
        }
        EXPECT_EQ(run_fixed_weight_trial(a, 4, 8, t, TieBreaker::Mode::Random),
                  run_fixed_weight_trial(b, 4, 8, t, TieBreaker::Mode::Random));
    }
}

TEST(Execute, LevelTwoSingleFaultsNeverFail) {
    ExhaustiveOptions opt;
    const auto r = exhaustive_search(exrec(2), 1, opt);
    ASSERT_EQ(r.weights.size(), 1u);
    EXPECT_TRUE(r.weights[0].exhaustive);
    EXPECT_EQ(r.weights[0].failures, 0u);
    EXPECT_FALSE(r.min_failing.has_value());
}

TEST(DecodeMeasurement, LevelOneExamples) {
    const Circuit& c = exrec(1);
    const std::uint32_t blk = c.top_blocks[0];
    auto table = fresh_flags(c);
    TieBreaker tb = TieBreaker::priority();
    MeasurementOptions quiet;
    quiet.physical_updates = false;

    const std::vector<std::uint8_t> zero{0, 0, 0, 0};
    EXPECT_EQ(decode_measurement(zero, c, blk, Basis::Z, table, tb, quiet).flip, 0);

    flag(table, blk, Basis::X)[Flag::AG1] = Weight(0);
    flag(table, blk, Basis::X)[Flag::AG2] = Weight(2);
    flag(table, blk, Basis::X)[Flag::A] = Weight(2);
    const std::vector<std::uint8_t> one{1, 0, 0, 0};
    const auto d = decode_measurement(one, c, blk, Basis::Z, table, tb, quiet);
    EXPECT_EQ(d.flip, 0);
    EXPECT_EQ(d.confidence, Weight(2));

    // Parity 0 pattern spanning the logical: no correction, bare Z parity b0^b1 = 1.
    const std::vector<std::uint8_t> logical{1, 0, 0, 1};
    EXPECT_EQ(decode_measurement(logical, c, blk, Basis::Z, table, tb, quiet).flip, 1);
    // Z-type errors read out in X use the bare X support (0, 2).
    const std::vector<std::uint8_t> zlog{1, 0, 0, 1};
    EXPECT_EQ(decode_measurement(zlog, c, blk, Basis::X, table, tb, quiet).flip, 1);
    const std::vector<std::uint8_t> zgauge{1, 0, 1, 0};
    EXPECT_EQ(decode_measurement(zgauge, c, blk, Basis::X, table, tb, quiet).flip, 0);

    EXPECT_THROW(decode_measurement(std::vector<std::uint8_t>{0, 0, 0}, c, blk, Basis::Z, table, tb, quiet),
                 std::invalid_argument);
}

TEST(DecodeMeasurement, LevelTwoSubBlockConfidenceSteersMatch) {
    // Sub-block 0 reads (1,0,0,1): parity 0, logical flip 1. Whether the top
    // decode blames sub-block 0 (gauge 1) or sub-block 2 (gauge 2) depends on
    // the C_L the sub decodes report.
    const Circuit& c = exrec(2);
    const std::uint32_t top = c.top_blocks[0];
    const Block& blk = c.blocks[top];
    std::vector<std::uint8_t> bits(16, 0);
    bits[0] = 1;
    bits[3] = 1;
    MeasurementOptions quiet;
    quiet.physical_updates = false;
    auto setup = [&](int weak_sub) {
        auto table = fresh_flags(c);
        for (int i = 0; i < 4; ++i) {
            auto& f = flag(table, blk.sub[i], Basis::X);
            f[Flag::AG1] = Weight(3);
            f[Flag::AG2] = Weight(3);
        }
        auto& weak = flag(table, blk.sub[weak_sub], Basis::X);
        weak[Flag::AG1] = Weight(0);
        weak[Flag::AG2] = Weight(weak_sub == 0 ? 3 : 0);
        return table;
    };
    TieBreaker tb = TieBreaker::priority();

    // Sub 0 reports C_L = 3, the rest 6: top AG1 = 3, AG2 = 6, gauge-1 fix on sub 0.
    auto t0 = setup(0);
    auto d = decode_measurement(bits, c, top, Basis::Z, t0, tb, quiet);
    EXPECT_EQ(d.flip, 0);
    EXPECT_EQ(d.confidence, Weight(3));

    // Sub 2 reports C_L = 0: top AG2 = 0 wins and the fix on sub 2 completes a logical.
    auto t2 = setup(2);
    d = decode_measurement(bits, c, top, Basis::Z, t2, tb, quiet);
    EXPECT_EQ(d.flip, 1);
    EXPECT_EQ(d.confidence, Weight(6));

    // A logical on sub-blocks 0 and 2 is invisible to the top syndrome.
    std::vector<std::uint8_t> logical(16, 0);
    logical[0] = logical[3] = logical[8] = logical[11] = 1;
    d = decode_measurement(logical, c, top, Basis::Z, t0, tb, quiet);
    EXPECT_EQ(d.flip, 1);
}

TEST(Judge, ResidualCases) {
    const Circuit& c = exrec(1);
    Executor ex(c);
    TieBreaker tb = TieBreaker::priority();
    ex.reset();
    EXPECT_TRUE(ex.judge_success(tb));

    const std::uint32_t q0 = c.blocks[c.top_blocks[0]].qubit_begin;
    ex.reset();
    ex.frame().x[q0] = 1;
    ex.frame().x[q0 + 3] = 1;  // dressed X logical
    ex.flags(c.top_blocks[0], Basis::X)[Flag::AG1] = Weight(0);
    EXPECT_FALSE(ex.judge_success(tb));

    ex.reset();
    ex.frame().x[q0 + 1] = 1;  // gauge-1 side
    ex.flags(c.top_blocks[0], Basis::X)[Flag::AG1] = Weight(0);
    ex.flags(c.top_blocks[0], Basis::X)[Flag::AG2] = Weight(1);
    ex.flags(c.top_blocks[0], Basis::X)[Flag::A] = Weight(1);
    EXPECT_TRUE(ex.judge_success(tb));

    ex.reset();
    ex.frame().x[q0 + 1] = 1;
    ex.flags(c.top_blocks[0], Basis::X)[Flag::AG1] = Weight(2);
    ex.flags(c.top_blocks[0], Basis::X)[Flag::AG2] = Weight(0);
    EXPECT_FALSE(ex.judge_success(tb));
}
