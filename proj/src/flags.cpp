#include "flagmp/flags.hpp"

#include <algorithm>

namespace flagmp {

std::string to_string(Weight w) { return w.is_inf() ? "INF" : std::to_string(w.value()); }

std::string to_string(Region r) {
    switch (r) {
        case Region::N: return "N";
        case Region::AG1: return "AG1";
        case Region::AG2: return "AG2";
        case Region::A: return "A";
        case Region::G1: return "G1";
        case Region::G2: return "G2";
    }
    return "?";
}

Region region_from_string(const std::string& s) {
    for (auto r : {Region::N, Region::AG1, Region::AG2, Region::A, Region::G1, Region::G2}) {
        if (to_string(r) == s) return r;
    }
    throw std::invalid_argument("unknown region '" + s + "'");
}

std::string to_string(Match m) {
    switch (m) {
        case Match::None: return "None";
        case Match::AG1: return "AG1";
        case Match::AG2: return "AG2";
        case Match::A: return "A";
    }
    return "?";
}

std::string to_string(Correction c) {
    switch (c) {
        case Correction::None: return "none";
        case Correction::Gauge1: return "gauge1";
        case Correction::Gauge2: return "gauge2";
    }
    return "?";
}

namespace {

Flag flag_of(Region r) {
    switch (r) {
        case Region::AG1: return Flag::AG1;
        case Region::AG2: return Flag::AG2;
        case Region::A: return Flag::A;
        case Region::G1: return Flag::G1;
        case Region::G2: return Flag::G2;
        case Region::N: break;
    }
    throw std::invalid_argument("region N has no flag");
}

}  // namespace

void update_on_location(FlagSet& flags, Region region, Weight confidence) {
    if (region == Region::N) return;
    Weight& w = flags[flag_of(region)];
    w = min(w, confidence);
}

Weight correlated_weight(Weight conf_a, Weight conf_b) { return max(conf_a, conf_b); }

Weight update_on_two_qubit_gate(FlagSet& flags_a, Region region_a, FlagSet& flags_b, Region region_b,
                                Weight conf_a, Weight conf_b) {
    update_on_location(flags_a, region_a, conf_a);
    update_on_location(flags_b, region_b, conf_b);
    return correlated_weight(conf_a, conf_b);
}

void propagate_flags_cnot(const FlagSet& source, FlagSet& target) {
    for (auto f : {Flag::AG1, Flag::AG2, Flag::G1, Flag::G2}) {
        target[f] = min(target[f], source[f]);
    }
}

Match TieBreaker::pick(std::span<const Match> tied) {
    if (tied.empty()) throw std::invalid_argument("TieBreaker::pick with no candidates");
    if (tied.size() == 1) return tied[0];
    switch (mode_) {
        case Mode::Priority: {
            for (auto m : {Match::A, Match::AG1, Match::AG2}) {
                if (std::find(tied.begin(), tied.end(), m) != tied.end()) return m;
            }
            return tied[0];
        }
        case Mode::Random: {
            std::uniform_int_distribution<std::size_t> dist(0, tied.size() - 1);
            return tied[dist(*rng_)];
        }
        case Mode::Scripted: {
            const std::size_t at = arities_.size();
            arities_.push_back(static_cast<std::uint8_t>(tied.size()));
            const std::size_t choice = at < script_.size() ? script_[at] : 0;
            return tied[std::min(choice, tied.size() - 1)];
        }
    }
    return tied[0];
}

DecodeOutcome match_syndrome(const FlagSet& flags, int syndrome, TieBreaker& tiebreak) {
    const Weight ag1 = flags[Flag::AG1];
    const Weight ag2 = flags[Flag::AG2];
    const Weight a = flags[Flag::A];
    DecodeOutcome out;
    if (syndrome == 0) {
        out.match = Match::None;
        out.correction = Correction::None;
        out.weight = Weight(0);
        out.c_g1 = ag1 + a;
        out.c_g2 = ag2 + a;
        out.c_l = ag1 + ag2;
        return out;
    }
    const Weight best = min(min(ag1, ag2), a);
    if (best.is_inf()) {
        throw InconsistencyFault("syndrome 1 with AG1, AG2 and A all INF");
    }
    std::array<Match, 3> tied{};
    std::size_t n = 0;
    if (ag1 == best) tied[n++] = Match::AG1;
    if (ag2 == best) tied[n++] = Match::AG2;
    if (a == best) tied[n++] = Match::A;
    out.match = tiebreak.pick(std::span<const Match>(tied.data(), n));
    out.weight = best;
    switch (out.match) {
        case Match::AG1:
            out.correction = Correction::Gauge1;
            out.c_g1 = a - ag1;
            out.c_g2 = ag2 + a;
            out.c_l = ag2 - ag1;
            break;
        case Match::AG2:
            out.correction = Correction::Gauge2;
            out.c_g1 = ag1 + a;
            out.c_g2 = a - ag2;
            out.c_l = ag1 - ag2;
            break;
        case Match::A:
        case Match::None:
            out.match = Match::A;
            out.correction = Correction::None;
            out.c_g1 = ag1 - a;
            out.c_g2 = ag2 - a;
            out.c_l = ag1 + ag2;
            break;
    }
    return out;
}

void end_cycle_update(FlagSet& flags, const DecodeOutcome& outcome) {
    flags[Flag::AG1] = min(flags[Flag::G1], outcome.c_g1);
    flags[Flag::AG2] = min(flags[Flag::G2], outcome.c_g2);
    flags[Flag::A] = Weight::inf();
    flags[Flag::G1] = Weight::inf();
    flags[Flag::G2] = Weight::inf();
}

}  // namespace flagmp
