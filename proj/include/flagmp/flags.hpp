#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace flagmp {

/// Order of p of an event: Pr = O(p^value). INF marks an impossible event.
/// Arithmetic saturates at INF.
class Weight {
public:
    static constexpr std::uint16_t kInfValue = 0xFFFF;

    constexpr Weight() = default;
    constexpr explicit Weight(std::uint16_t v) : v_(v) {}
    static constexpr Weight inf() { return Weight(kInfValue); }

    constexpr bool is_inf() const { return v_ == kInfValue; }
    constexpr std::uint16_t value() const { return v_; }

    friend constexpr Weight operator+(Weight a, Weight b) {
        if (a.is_inf() || b.is_inf()) return inf();
        const std::uint32_t s = std::uint32_t{a.v_} + b.v_;
        return s >= kInfValue ? inf() : Weight(static_cast<std::uint16_t>(s));
    }
    /// Difference of a weight and a smaller-or-equal finite weight.
    friend constexpr Weight operator-(Weight a, Weight b) {
        if (a.is_inf()) return inf();
        if (b.is_inf() || b.v_ > a.v_) throw std::domain_error("weight subtraction below zero");
        return Weight(static_cast<std::uint16_t>(a.v_ - b.v_));
    }
    friend constexpr auto operator<=>(Weight, Weight) = default;

private:
    std::uint16_t v_ = kInfValue;
};

constexpr Weight min(Weight a, Weight b) { return b < a ? b : a; }
constexpr Weight max(Weight a, Weight b) { return a < b ? b : a; }

std::string to_string(Weight w);

/// The five flags tracked per block per basis.
enum class Flag : std::uint8_t { AG1 = 0, AG2 = 1, A = 2, G1 = 3, G2 = 4 };

/// Effect class of a single error at a location. `N` has no effect.
enum class Region : std::uint8_t { N, AG1, AG2, A, G1, G2 };

std::string to_string(Region r);
Region region_from_string(const std::string& s);

struct FlagSet {
    std::array<Weight, 5> w{Weight::inf(), Weight::inf(), Weight::inf(), Weight::inf(), Weight::inf()};

    Weight& operator[](Flag f) { return w[static_cast<int>(f)]; }
    Weight operator[](Flag f) const { return w[static_cast<int>(f)]; }

    friend bool operator==(const FlagSet&, const FlagSet&) = default;
};

/// flags[region] := min(flags[region], confidence). Region N is ignored.
void update_on_location(FlagSet& flags, Region region, Weight confidence);

/// Correlated-error weight of a two-block gate: the larger of the two reports.
Weight correlated_weight(Weight conf_a, Weight conf_b);

/// Applies the two single-block reports to their own regions and returns the
/// correlated weight. Either region may be N.
Weight update_on_two_qubit_gate(FlagSet& flags_a, Region region_a, FlagSet& flags_b, Region region_b,
                                Weight conf_a, Weight conf_b);

/// Copies the data-error flags of `source` onto `target` across a logical
/// CNOT (target flag := min(target, source) for AG1, AG2, G1, G2).
void propagate_flags_cnot(const FlagSet& source, FlagSet& target);

enum class Match : std::uint8_t { None, AG1, AG2, A };
enum class Correction : std::uint8_t { None, Gauge1, Gauge2 };

std::string to_string(Match m);
std::string to_string(Correction c);

struct DecodeOutcome {
    Match match = Match::None;
    Correction correction = Correction::None;
    Weight weight{0};  // weight of the chosen match
    Weight c_l;
    Weight c_g1;
    Weight c_g2;

    friend bool operator==(const DecodeOutcome&, const DecodeOutcome&) = default;
};

/// Raised when a nonzero syndrome has no finite-weight explanation.
class InconsistencyFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Chooses among equal-weight flag matches.
///  - Random: uniform over the tied candidates, drawn from the trial stream.
///  - Priority: A before AG1 before AG2.
///  - Scripted: replays a fixed sequence of choices, recording the arity of
///    every tie so a caller can enumerate all branches.
class TieBreaker {
public:
    enum class Mode : std::uint8_t { Random, Priority, Scripted };

    static TieBreaker priority() { return TieBreaker(Mode::Priority, nullptr); }
    static TieBreaker random(std::mt19937_64& rng) { return TieBreaker(Mode::Random, &rng); }
    static TieBreaker scripted(std::vector<std::uint8_t> choices) {
        TieBreaker t(Mode::Scripted, nullptr);
        t.script_ = std::move(choices);
        return t;
    }

    Mode mode() const { return mode_; }

    /// Picks one of `tied` (listed in the fixed order AG1, AG2, A).
    Match pick(std::span<const Match> tied);

    /// For Scripted mode: the number of options at each tie met so far.
    const std::vector<std::uint8_t>& arities() const { return arities_; }
    const std::vector<std::uint8_t>& script() const { return script_; }
    void rebind(std::mt19937_64& rng) { rng_ = &rng; }

private:
    TieBreaker(Mode m, std::mt19937_64* rng) : mode_(m), rng_(rng) {}

    Mode mode_;
    std::mt19937_64* rng_;
    std::vector<std::uint8_t> script_;
    std::vector<std::uint8_t> arities_;
};

/// Minimum-weight flag match for the given syndrome bit, with the resulting
/// correction and confidence reports.
DecodeOutcome match_syndrome(const FlagSet& flags, int syndrome, TieBreaker& tiebreak);

/// Closes a cycle: AG1 := min(G1, C_G1), AG2 := min(G2, C_G2), A/G1/G2 := INF.
void end_cycle_update(FlagSet& flags, const DecodeOutcome& outcome);

}  // namespace flagmp
