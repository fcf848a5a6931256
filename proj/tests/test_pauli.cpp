#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "flagmp/pauli.hpp"

using namespace flagmp;

namespace {

PauliFrame single(std::size_t n, std::size_t q, bool x, bool z) {
    PauliFrame f(n);
    f.x[q] = x;
    f.z[q] = z;
    return f;
}

// Gauge subgroup of the given error basis, as 4-bit masks (bit i = qubit i).
std::set<std::uint8_t> gauge_group(Basis b) {
    const std::uint8_t g1 = b == Basis::X ? 0b0011 : 0b0101;
    const std::uint8_t g2 = b == Basis::X ? 0b1100 : 0b1010;
    return {0, g1, g2, static_cast<std::uint8_t>(g1 ^ g2)};
}

// Brute-force coset of e: which representative its gauge orbit contains.
CosetClass oracle_coset(std::uint8_t e, Basis b) {
    const std::uint8_t logical = 0b1001;                            // dressed X0X3 / Z0Z3
    const std::uint8_t side1 = 0b0001;                              // single error on qubit 0
    const std::uint8_t side2 = b == Basis::X ? 0b0100 : 0b0010;     // qubit 2 (X) or qubit 1 (Z)
    for (auto g : gauge_group(b)) {
        const std::uint8_t v = e ^ g;
        if (v == 0) return CosetClass::Trivial;
        if (v == logical) return CosetClass::Logical;
        if (v == side1) return CosetClass::Gauge1Side;
        if (v == side2) return CosetClass::Gauge2Side;
    }
    ADD_FAILURE() << "pattern " << int(e) << " in no coset";
    return CosetClass::Trivial;
}

}  // namespace

TEST(Compose, SelfInverse) {
    const auto x1 = single(3, 1, true, false);
    EXPECT_TRUE(compose(x1, x1).is_identity());
}

TEST(Compose, XTimesZIsY) {
    const auto y = compose(single(3, 1, true, false), single(3, 1, false, true));
    EXPECT_EQ(y.x[1], 1);
    EXPECT_EQ(y.z[1], 1);
}

TEST(Compose, DisjointUnion) {
    const auto f = compose(single(3, 0, true, false), single(3, 1, true, false));
    EXPECT_EQ(f.x, (std::vector<std::uint8_t>{1, 1, 0}));
    EXPECT_TRUE(std::all_of(f.z.begin(), f.z.end(), [](auto v) { return v == 0; }));
}

TEST(Compose, SizeMismatchThrows) { EXPECT_THROW(compose(PauliFrame(2), PauliFrame(3)), StructuralError); }

TEST(Propagate, CnotRules) {
    const Gate g{GateKind::Cnot, 0, 1};
    auto f = propagate(single(2, 0, true, false), g);
    EXPECT_EQ(f.x, (std::vector<std::uint8_t>{1, 1}));
    f = propagate(single(2, 1, false, true), g);
    EXPECT_EQ(f.z, (std::vector<std::uint8_t>{1, 1}));
    f = propagate(single(2, 1, true, false), g);
    EXPECT_EQ(f.x, (std::vector<std::uint8_t>{0, 1}));
    f = propagate(single(2, 0, false, true), g);
    EXPECT_EQ(f.z, (std::vector<std::uint8_t>{1, 0}));
}

TEST(Propagate, InitClearsMeasureAndWaitKeep) {
    const auto y = compose(single(2, 0, true, false), single(2, 0, false, true));
    EXPECT_TRUE(propagate(y, Gate{GateKind::Init0, 0, 0}).is_identity());
    EXPECT_TRUE(propagate(y, Gate{GateKind::InitPlus, 0, 0}).is_identity());
    EXPECT_EQ(propagate(y, Gate{GateKind::MeasZ, 0, 0}), y);
    EXPECT_EQ(propagate(y, Gate{GateKind::Wait, 0, 0}), y);
}

TEST(Propagate, OutOfRangeThrows) {
    EXPECT_THROW(propagate(PauliFrame(2), Gate{GateKind::Cnot, 0, 2}), StructuralError);
    EXPECT_THROW(propagate(PauliFrame(2), Gate{GateKind::Wait, 5, 0}), StructuralError);
    EXPECT_THROW(propagate(PauliFrame(2), Gate{GateKind::Cnot, 1, 1}), StructuralError);
}

TEST(Propagate, LinearRandomized) {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> bit(0, 1), kind(0, 5);
    const std::size_t n = 6;
    for (int t = 0; t < 10000; ++t) {
        PauliFrame a(n), b(n);
        for (std::size_t q = 0; q < n; ++q) {
            a.x[q] = bit(rng), a.z[q] = bit(rng), b.x[q] = bit(rng), b.z[q] = bit(rng);
        }
        std::uniform_int_distribution<std::uint32_t> qd(0, n - 1);
        Gate g{static_cast<GateKind>(kind(rng)), qd(rng), 0};
        do g.q1 = qd(rng);
        while (g.q1 == g.q0);
        ASSERT_EQ(propagate(compose(a, b), g), compose(propagate(a, g), propagate(b, g))) << "case " << t;
    }
}

TEST(Coset, Examples) {
    EXPECT_EQ(coset_classify(0b0000, Basis::X), CosetClass::Trivial);
    EXPECT_EQ(coset_classify(0b0011, Basis::X), CosetClass::Trivial);  // X0X1
    EXPECT_EQ(coset_classify(0b0001, Basis::X), CosetClass::Gauge1Side);
    EXPECT_EQ(coset_classify(0b1001, Basis::X), CosetClass::Logical);
}

TEST(Coset, MatchesBruteForceOracle) {
    for (auto b : kBases) {
        std::map<CosetClass, int> counts;
        for (int e = 0; e < 16; ++e) {
            const auto c = coset_classify(static_cast<std::uint8_t>(e), b);
            EXPECT_EQ(c, oracle_coset(static_cast<std::uint8_t>(e), b)) << "e=" << e;
            ++counts[c];
        }
        for (auto c : {CosetClass::Trivial, CosetClass::Gauge1Side, CosetClass::Gauge2Side, CosetClass::Logical}) {
            EXPECT_EQ(counts[c], 4);
        }
    }
}

TEST(Coset, GaugeInvariant) {
    for (auto b : kBases) {
        for (int e = 0; e < 16; ++e) {
            for (auto g : gauge_group(b)) {
                EXPECT_EQ(coset_classify(static_cast<std::uint8_t>(e ^ g), b),
                          coset_classify(static_cast<std::uint8_t>(e), b));
            }
        }
    }
}

TEST(Coset, SingleErrorSideMatchesGaugeIndex) {
    for (auto b : kBases) {
        for (int i = 0; i < 4; ++i) {
            const auto c = coset_classify(static_cast<std::uint8_t>(1 << i), b);
            EXPECT_EQ(c, gauge_of(b, i) == 1 ? CosetClass::Gauge1Side : CosetClass::Gauge2Side);
        }
    }
}

TEST(Coset, CorrectionTargetsFixTheirSide) {
    for (auto b : kBases) {
        for (int g = 1; g <= 2; ++g) {
            EXPECT_EQ(gauge_of(b, correction_target(b, g)), g);
        }
        // Both corrections together form a logical representative.
        const std::uint8_t both = (1 << correction_target(b, 1)) | (1 << correction_target(b, 2));
        EXPECT_EQ(coset_classify(both, b), CosetClass::Logical);
    }
}
