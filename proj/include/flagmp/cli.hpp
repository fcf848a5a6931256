#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "flagmp/montecarlo.hpp"

namespace flagmp {

inline constexpr const char* kVersion = "1.0.0";

/// Everything a run needs; echoed into every output header.
struct RunConfig {
    int level = 1;
    std::uint64_t seed = 1;
    std::uint64_t trials = 10000;
    std::size_t weight_lo = 0;
    std::size_t weight_hi = kDefaultCap;
    double pmin = 1e-6;
    double pmax = 1e-2;
    int points = 41;
    DecoderMode mode = DecoderMode::MessagePassing;
    TieBreaker::Mode tiebreak = TieBreaker::Mode::Random;
    int workers = 0;
    int cap = kDefaultCap;
    std::optional<std::size_t> locations;  // overrides the exRec count in `curve`
    std::size_t max_weight = 1;
    std::uint64_t budget = 10'000'000;
    bool allow_sampling = true;
    std::vector<std::string> rates;  // input files for `curve`
    std::string out;                 // empty = stdout

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// "a..b" or a single "a".
std::pair<std::size_t, std::size_t> parse_weight_range(const std::string& s);
DecoderMode parse_mode(const std::string& s);
TieBreaker::Mode parse_tiebreak(const std::string& s);
std::string to_string(TieBreaker::Mode m);
Weight parse_weight_value(const std::string& s);

/// One-line JSON rendering of the config (sorted keys).
std::string config_json(const RunConfig& c);
/// Applies the keys of a JSON object onto `c`; unknown keys are an error.
void apply_config_json(RunConfig& c, const std::string& json_text);

/// Comment header: version, full config, seed.
std::string output_header(const std::string& command, const RunConfig& c);

void write_rates_csv(std::ostream& os, std::span<const WeightEstimate> rows);
/// Parses a rates CSV (comment lines allowed). Throws std::runtime_error
/// naming the line on malformed input.
std::vector<WeightEstimate> read_rates_csv(std::istream& is, const std::string& name = "<input>");

/// Curve rows; a truncation warning comment precedes every affected row.
void write_curve_csv(std::ostream& os, int level, std::span<const CurvePoint> curve, int cap);

/// JSON of a single decode (sorted keys).
std::string decode_outcome_json(const FlagSet& flags, int syndrome, const DecodeOutcome& out);

std::string exhaustive_json(const ExhaustiveResult& r);

/// Full command-line entry point. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace flagmp
