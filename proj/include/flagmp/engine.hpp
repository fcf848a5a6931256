#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "flagmp/code.hpp"
#include "flagmp/flags.hpp"
#include "flagmp/pauli.hpp"

namespace flagmp {

/// One fault. `pauli` encodes the fault kind:
///   single-qubit location: bit0 = X, bit1 = Z (1..3)
///   cnot: bit0 = X control, bit1 = Z control, bit2 = X target, bit3 = Z target (1..15)
///   init / measurement: 1 (basis flip / outcome flip)
struct Fault {
    std::uint32_t location = 0;
    std::uint8_t pauli = 1;

    friend bool operator==(const Fault&, const Fault&) = default;
};

/// Faults sorted by location, at most one per location.
using ErrorSet = std::vector<Fault>;

/// Number of distinct fault kinds a location can suffer.
int fault_kind_count(GateKind kind);

/// Throws std::invalid_argument if `errors` is unsorted, repeats a location,
/// names an unknown location or carries a kind the location cannot have.
void validate_error_set(const Circuit& circuit, const ErrorSet& errors);

/// Independent per-trial stream: same (seed, index) gives the same sequence
/// on any thread.
std::mt19937_64 trial_stream(std::uint64_t seed, std::uint64_t index);

std::uint64_t splitmix64(std::uint64_t x);

/// Every location faults independently with probability p.
ErrorSet inject_stochastic(const Circuit& circuit, double p, std::mt19937_64& rng);

/// Exactly `count` distinct locations, chosen uniformly, each with a uniform fault kind.
ErrorSet inject_fixed_weight(const Circuit& circuit, std::size_t count, std::mt19937_64& rng);

enum class DecoderMode : std::uint8_t { MessagePassing, Uniform };

std::string to_string(DecoderMode m);

struct EngineConfig {
    DecoderMode mode = DecoderMode::MessagePassing;
    /// Confidence of physical locations, indexed by GateKind.
    std::array<Weight, 6> physical_confidence{Weight(1), Weight(1), Weight(1), Weight(1), Weight(1), Weight(1)};
    /// Replays clean sub-rectangles from a cache instead of simulating them.
    bool use_memo = true;
};

struct TrialResult {
    bool success = true;
    /// Cycles that measured a nonzero syndrome, per level (index 1..) and basis.
    std::array<std::array<std::uint32_t, 2>, 8> nonzero_syndromes{};
    /// C_L reported by the final EC of each top-level block, per basis.
    std::array<std::array<Weight, 2>, 2> final_confidence{};

    Weight min_final_confidence() const;
};

/// Decoded transversal readout of one block.
struct MeasurementDecode {
    std::uint8_t flip = 0;  // logical outcome relative to the noiseless reference
    Weight confidence;      // C_L of the top-level decode
};

struct MeasurementOptions {
    /// Update the level-1 flags with the readout locations' confidence
    /// (false for the noiseless judgement readout).
    bool physical_updates = true;
    Weight physical_confidence{1};
    DecoderMode mode = DecoderMode::MessagePassing;
};

/// Classical decode of the transversal measurement of `block` in basis
/// `measured` (Z readout reveals X errors). `bits` are the raw outcome flips
/// of the block's physical qubits in order; `flags` is indexed block*2+basis.
MeasurementDecode decode_measurement(std::span<const std::uint8_t> bits, const Circuit& circuit, std::uint32_t block,
                                     Basis measured, std::span<const FlagSet> flags, TieBreaker& tiebreak,
                                     const MeasurementOptions& options = {});

/// Runs trials on one circuit. One instance per worker; not thread-safe.
class Executor {
public:
    Executor(const Circuit& circuit, EngineConfig config = {});

    /// Full trial: reset, execute every program node, judge.
    TrialResult execute(const ErrorSet& errors, TieBreaker& tiebreak);

    // Lower-level access, mostly for tests.
    void reset();
    void run_program(const ErrorSet& errors, TieBreaker& tiebreak);
    bool judge_success(TieBreaker& tiebreak);

    PauliFrame& frame() { return frame_; }
    const PauliFrame& frame() const { return frame_; }
    FlagSet& flags(std::uint32_t block, Basis b) { return flags_[block * 2 + index_of(b)]; }
    std::span<const FlagSet> flag_table() const { return flags_; }
    const Circuit& circuit() const { return circuit_; }
    const TrialResult& last_result() const { return result_; }
    std::size_t memo_size() const { return memo_.size(); }

    /// Outcome of the most recent EC node per basis (for tests).
    const std::array<int, 2>& last_syndrome() const { return last_syndrome_; }

private:
    struct Report {
        std::array<std::array<Weight, 2>, 2> conf{};  // [operand][basis]
        std::uint8_t flip = 0;
    };
    struct MemoEntry {
        std::string flags_after;
        Report report;
    };

    Report run(std::uint32_t node_id);
    Report run_physical(const Node& n);
    Report run_rect(const Node& n);
    Report run_ec(const Node& n);
    Report run_measure(const Node& n);
    void apply_step(const Step& s, const Report& r);
    void apply_correction(std::uint32_t block, Basis b, Correction c);

    bool is_clean(const Node& n) const;
    bool block_frame_clear(std::uint32_t block) const;
    void serialize_flags(std::uint32_t block, std::string& out) const;
    const char* deserialize_flags(std::uint32_t block, const char* in);
    std::string memo_key(const Node& n) const;

    Weight physical_conf(GateKind k) const { return config_.physical_confidence[static_cast<int>(k)]; }
    Weight reported(Weight c_l) const { return config_.mode == DecoderMode::Uniform ? Weight(1) : c_l; }

    const Circuit& circuit_;
    EngineConfig config_;
    PauliFrame frame_;
    std::vector<FlagSet> flags_;
    const ErrorSet* faults_ = nullptr;
    std::size_t cursor_ = 0;
    TieBreaker* tiebreak_ = nullptr;
    TrialResult result_;
    std::array<int, 2> last_syndrome_{0, 0};
    std::vector<std::uint8_t> scratch_bits_;
    std::unordered_map<std::string, MemoEntry> memo_;
};

/// Convenience: fresh executor, one trial.
TrialResult execute(const Circuit& circuit, const ErrorSet& errors, TieBreaker& tiebreak, EngineConfig config = {});

}  // namespace flagmp
