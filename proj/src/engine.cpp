#include "flagmp/engine.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace flagmp {

int fault_kind_count(GateKind kind) {
    switch (kind) {
        case GateKind::Cnot: return 15;
        case GateKind::Wait: return 3;
        case GateKind::Init0:
        case GateKind::InitPlus:
        case GateKind::MeasZ:
        case GateKind::MeasX: return 1;
    }
    return 1;
}

void validate_error_set(const Circuit& circuit, const ErrorSet& errors) {
    for (std::size_t i = 0; i < errors.size(); ++i) {
        const Fault& f = errors[i];
        if (f.location >= circuit.size()) {
            throw std::invalid_argument("fault at unknown location " + std::to_string(f.location));
        }
        if (i > 0 && errors[i - 1].location >= f.location) {
            throw std::invalid_argument("error set must be sorted with one fault per location");
        }
        const int kinds = fault_kind_count(circuit.locations[f.location].kind);
        if (f.pauli < 1 || f.pauli > kinds) {
            throw std::invalid_argument("fault kind " + std::to_string(f.pauli) + " invalid at location " +
                                        std::to_string(f.location));
        }
    }
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::mt19937_64 trial_stream(std::uint64_t seed, std::uint64_t index) {
    const std::uint64_t a = splitmix64(seed);
    const std::uint64_t b = splitmix64(a ^ splitmix64(index + 0x632BE59BD9B4E019ull));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), static_cast<std::uint32_t>(b),
                      static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

namespace {

std::uint8_t draw_kind(GateKind kind, std::mt19937_64& rng) {
    const int n = fault_kind_count(kind);
    if (n == 1) return 1;
    std::uniform_int_distribution<int> d(1, n);
    return static_cast<std::uint8_t>(d(rng));
}

}  // namespace

ErrorSet inject_stochastic(const Circuit& circuit, double p, std::mt19937_64& rng) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
    ErrorSet out;
    if (p == 0.0) return out;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const Location& loc : circuit.locations) {
        if (u(rng) < p) out.push_back(Fault{loc.id, draw_kind(loc.kind, rng)});
    }
    return out;
}

ErrorSet inject_fixed_weight(const Circuit& circuit, std::size_t count, std::mt19937_64& rng) {
    const std::size_t n = circuit.size();
    if (count > n) {
        throw std::invalid_argument("cannot place " + std::to_string(count) + " faults on " + std::to_string(n) +
                                    " locations");
    }
    // Floyd's sampling without replacement.
    std::vector<std::uint32_t> chosen;
    chosen.reserve(count);
    for (std::size_t j = n - count; j < n; ++j) {
        std::uniform_int_distribution<std::size_t> d(0, j);
        const auto t = static_cast<std::uint32_t>(d(rng));
        if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) chosen.push_back(t);
        else chosen.push_back(static_cast<std::uint32_t>(j));
    }
    std::sort(chosen.begin(), chosen.end());
    ErrorSet out;
    out.reserve(count);
    for (auto id : chosen) out.push_back(Fault{id, draw_kind(circuit.locations[id].kind, rng)});
    return out;
}

std::string to_string(DecoderMode m) { return m == DecoderMode::Uniform ? "uniform" : "mp"; }

Weight TrialResult::min_final_confidence() const {
    Weight w = Weight::inf();
    for (const auto& blk : final_confidence) {
        for (auto c : blk) w = min(w, c);
    }
    return w;
}

// --- classical readout decoding ----------------------------------------------

namespace {

inline Basis error_basis_of(Basis measured) { return measured == Basis::Z ? Basis::X : Basis::Z; }

inline Region gauge_region(Basis err, int i) { return gauge_of(err, i) == 1 ? Region::AG1 : Region::AG2; }

MeasurementDecode decode_block(const std::uint8_t* bits, const Circuit& circuit, std::uint32_t block, Basis err,
                               std::span<const FlagSet> flags, TieBreaker& tiebreak, const MeasurementOptions& opt) {
    const Block& b = circuit.blocks[block];
    std::array<std::uint8_t, 4> f{};
    FlagSet fs = flags[block * 2 + index_of(err)];
    if (b.level == 1) {
        for (int i = 0; i < 4; ++i) {
            f[i] = bits[i] & 1;
            if (opt.physical_updates) update_on_location(fs, gauge_region(err, i), opt.physical_confidence);
        }
    } else {
        const std::size_t stride = std::size_t{1} << (2 * (b.level - 1));
        for (int i = 0; i < 4; ++i) {
            const MeasurementDecode sub = decode_block(bits + i * stride, circuit, b.sub[i], err, flags, tiebreak, opt);
            f[i] = sub.flip;
            const Weight conf = opt.mode == DecoderMode::Uniform ? Weight(1) : sub.confidence;
            update_on_location(fs, gauge_region(err, i), conf);
        }
    }
    const int syndrome = f[0] ^ f[1] ^ f[2] ^ f[3];
    const DecodeOutcome out = match_syndrome(fs, syndrome, tiebreak);
    if (out.correction == Correction::Gauge1) f[correction_target(err, 1)] ^= 1;
    if (out.correction == Correction::Gauge2) f[correction_target(err, 2)] ^= 1;
    MeasurementDecode r;
    r.flip = err == Basis::X ? (f[0] ^ f[1]) : (f[0] ^ f[2]);
    r.confidence = out.c_l;
    return r;
}

}  // namespace

MeasurementDecode decode_measurement(std::span<const std::uint8_t> bits, const Circuit& circuit, std::uint32_t block,
                                     Basis measured, std::span<const FlagSet> flags, TieBreaker& tiebreak,
                                     const MeasurementOptions& options) {
    if (block >= circuit.blocks.size()) throw std::invalid_argument("decode_measurement: unknown block");
    if (bits.size() != circuit.blocks[block].num_qubits()) {
        throw std::invalid_argument("decode_measurement: expected " +
                                    std::to_string(circuit.blocks[block].num_qubits()) + " outcomes");
    }
    if (flags.size() < circuit.blocks.size() * 2) throw std::invalid_argument("decode_measurement: flag table too small");
    return decode_block(bits.data(), circuit, block, error_basis_of(measured), flags, tiebreak, options);
}

// --- executor ------------------------------------------------------------------

Executor::Executor(const Circuit& circuit, EngineConfig config)
    : circuit_(circuit), config_(config), frame_(circuit.num_qubits), flags_(circuit.blocks.size() * 2) {}

void Executor::reset() {
    frame_.clear();
    std::fill(flags_.begin(), flags_.end(), FlagSet{});
    result_ = TrialResult{};
    last_syndrome_ = {0, 0};
}

void Executor::run_program(const ErrorSet& errors, TieBreaker& tiebreak) {
    faults_ = &errors;
    cursor_ = 0;
    tiebreak_ = &tiebreak;
    Report last;
    for (auto node : circuit_.program) last = run(node);
    result_.final_confidence = last.conf;
    if (cursor_ != errors.size()) throw std::logic_error("faults left unconsumed after the program");
    faults_ = nullptr;
}

bool Executor::judge_success(TieBreaker& tiebreak) {
    MeasurementOptions opt;
    opt.physical_updates = false;
    opt.mode = config_.mode;
    for (auto block : circuit_.top_blocks) {
        const Block& b = circuit_.blocks[block];
        scratch_bits_.resize(b.num_qubits());
        for (auto measured : {Basis::Z, Basis::X}) {
            const Basis err = error_basis_of(measured);
            for (std::uint32_t i = 0; i < b.num_qubits(); ++i) scratch_bits_[i] = frame_.bit(err, b.qubit_begin + i);
            const auto d = decode_measurement(scratch_bits_, circuit_, block, measured, flags_, tiebreak, opt);
            if (d.flip) return false;
        }
    }
    return true;
}

TrialResult Executor::execute(const ErrorSet& errors, TieBreaker& tiebreak) {
    reset();
    run_program(errors, tiebreak);
    result_.success = judge_success(tiebreak);
    return result_;
}

Executor::Report Executor::run(std::uint32_t node_id) {
    const Node& n = circuit_.nodes[node_id];
    switch (n.kind) {
        case NodeKind::Physical: return run_physical(n);
        case NodeKind::Measure: return run_measure(n);
        case NodeKind::Rect:
        case NodeKind::Ec: {
            if (!config_.use_memo || !is_clean(n)) return n.kind == NodeKind::Rect ? run_rect(n) : run_ec(n);
            std::string key = memo_key(n);
            if (auto it = memo_.find(key); it != memo_.end()) {
                const char* p = it->second.flags_after.data();
                for (auto u : n.units) {
                    if (u != kNone) p = deserialize_flags(u, p);
                }
                if (is_init(n.gate) && n.kind == NodeKind::Rect) {
                    const Block& b = circuit_.blocks[n.units[0]];
                    std::fill_n(frame_.x.begin() + b.qubit_begin, b.num_qubits(), 0);
                    std::fill_n(frame_.z.begin() + b.qubit_begin, b.num_qubits(), 0);
                }
                return it->second.report;
            }
            const Report r = n.kind == NodeKind::Rect ? run_rect(n) : run_ec(n);
            MemoEntry e;
            for (auto u : n.units) {
                if (u != kNone) serialize_flags(u, e.flags_after);
            }
            e.report = r;
            memo_.emplace(std::move(key), std::move(e));
            return r;
        }
    }
    return {};
}

Executor::Report Executor::run_physical(const Node& n) {
    const Location& loc = circuit_.locations[n.location];
    std::uint8_t fault = 0;
    if (faults_ && cursor_ < faults_->size() && (*faults_)[cursor_].location == loc.id) {
        fault = (*faults_)[cursor_].pauli;
        ++cursor_;
    }
    const std::uint32_t q = loc.qubits[0];
    Report r;
    switch (loc.kind) {
        case GateKind::Init0:
            apply_reset(frame_, q);
            frame_.x[q] ^= fault & 1;
            break;
        case GateKind::InitPlus:
            apply_reset(frame_, q);
            frame_.z[q] ^= fault & 1;
            break;
        case GateKind::Wait:
            frame_.x[q] ^= fault & 1;
            frame_.z[q] ^= (fault >> 1) & 1;
            break;
        case GateKind::Cnot: {
            const std::uint32_t t = loc.qubits[1];
            apply_cnot(frame_, q, t);
            frame_.x[q] ^= fault & 1;
            frame_.z[q] ^= (fault >> 1) & 1;
            frame_.x[t] ^= (fault >> 2) & 1;
            frame_.z[t] ^= (fault >> 3) & 1;
            break;
        }
        case GateKind::MeasZ:
            r.flip = frame_.x[q] ^ (fault & 1);
            break;
        case GateKind::MeasX:
            r.flip = frame_.z[q] ^ (fault & 1);
            break;
    }
    const Weight c = physical_conf(loc.kind);
    r.conf = {{{c, c}, {c, c}}};
    return r;
}

void Executor::apply_step(const Step& s, const Report& r) {
    for (int slot = 0; slot < 2; ++slot) {
        if (s.target[slot] == kNone) continue;
        for (auto b : kBases) {
            update_on_location(flags(s.target[slot], b), s.region[slot][index_of(b)], r.conf[slot][index_of(b)]);
        }
    }
    if (s.target[2] != kNone) {
        for (auto b : kBases) {
            const int bi = index_of(b);
            update_on_location(flags(s.target[2], b), s.region[2][bi], correlated_weight(r.conf[0][bi], r.conf[1][bi]));
        }
    }
}

Executor::Report Executor::run_rect(const Node& n) {
    const auto steps = circuit_.steps_of(n);
    const std::uint32_t a = n.units[0];
    Report r;
    switch (n.gate) {
        case GateKind::Cnot: {
            const std::uint32_t t = n.units[1];
            propagate_flags_cnot(flags(a, Basis::X), flags(t, Basis::X));
            propagate_flags_cnot(flags(t, Basis::Z), flags(a, Basis::Z));
            for (const Step& s : steps) apply_step(s, run(s.child));
            const Report ra = run(n.ec[0]);
            const Report rt = run(n.ec[1]);
            r.conf[0] = ra.conf[0];
            r.conf[1] = rt.conf[0];
            break;
        }
        case GateKind::Wait: {
            for (const Step& s : steps) apply_step(s, run(s.child));
            r.conf = {{{Weight::inf(), Weight::inf()}, {Weight::inf(), Weight::inf()}}};
            break;
        }
        case GateKind::Init0:
        case GateKind::InitPlus: {
            flags(a, Basis::X) = FlagSet{};
            flags(a, Basis::Z) = FlagSet{};
            for (const Step& s : steps) apply_step(s, run(s.child));
            r.conf[0] = run(n.ec[0]).conf[0];
            r.conf[1] = {Weight::inf(), Weight::inf()};
            break;
        }
        case GateKind::MeasZ:
        case GateKind::MeasX:
            throw StructuralError("measurement rect node");
    }
    return r;
}

void Executor::apply_correction(std::uint32_t block, Basis b, Correction c) {
    if (c == Correction::None) return;
    const Block& blk = circuit_.blocks[block];
    const std::uint32_t sub = blk.sub[correction_target(b, c == Correction::Gauge1 ? 1 : 2)];
    if (blk.level == 1) {
        frame_.bit(b, sub) ^= 1;
        return;
    }
    // Bare logical of the sub-block, of the same Pauli type as the error.
    for (auto q : circuit_.bare_logical(sub, b == Basis::X ? Basis::X : Basis::Z)) frame_.bit(b, q) ^= 1;
}

Executor::Report Executor::run_ec(const Node& n) {
    const std::uint32_t block = n.units[0];
    std::array<int, 2> syndrome{0, 0};
    for (const Step& s : circuit_.steps_of(n)) {
        const Report r = run(s.child);
        apply_step(s, r);
        if (s.syndrome_basis >= 0) syndrome[s.syndrome_basis] ^= r.flip;
    }
    Report rep;
    for (auto b : kBases) {
        const int bi = index_of(b);
        FlagSet& fs = flags(block, b);
        const DecodeOutcome out = match_syndrome(fs, syndrome[bi], *tiebreak_);
        apply_correction(block, b, out.correction);
        end_cycle_update(fs, out);
        rep.conf[0][bi] = reported(out.c_l);
        rep.conf[1][bi] = Weight::inf();
        if (syndrome[bi]) ++result_.nonzero_syndromes[n.level][bi];
    }
    last_syndrome_ = syndrome;
    return rep;
}

Executor::Report Executor::run_measure(const Node& n) {
    const Block& b = circuit_.blocks[n.units[0]];
    const Basis measured = n.gate == GateKind::MeasZ ? Basis::Z : Basis::X;
    const Basis err = error_basis_of(measured);
    // Decoding may recurse into further readouts, so take a local copy.
    std::vector<std::uint8_t> bits(b.num_qubits());
    for (std::uint32_t i = 0; i < b.num_qubits(); ++i) {
        const std::uint32_t loc = n.loc_begin + i;
        std::uint8_t flip = frame_.bit(err, b.qubit_begin + i);
        if (faults_ && cursor_ < faults_->size() && (*faults_)[cursor_].location == loc) {
            flip ^= (*faults_)[cursor_].pauli & 1;
            ++cursor_;
        }
        bits[i] = flip;
    }
    MeasurementOptions opt;
    opt.physical_updates = true;
    opt.physical_confidence = physical_conf(n.gate);
    opt.mode = config_.mode;
    const MeasurementDecode d = decode_measurement(bits, circuit_, n.units[0], measured, flags_, *tiebreak_, opt);
    Report r;
    r.flip = d.flip;
    r.conf[0][index_of(err)] = reported(d.confidence);
    r.conf[0][index_of(measured == Basis::Z ? Basis::Z : Basis::X)] = Weight::inf();
    r.conf[1] = {Weight::inf(), Weight::inf()};
    return r;
}

bool Executor::block_frame_clear(std::uint32_t block) const {
    const Block& b = circuit_.blocks[block];
    const std::uint8_t* x = frame_.x.data() + b.qubit_begin;
    const std::uint8_t* z = frame_.z.data() + b.qubit_begin;
    for (std::uint32_t i = 0; i < b.num_qubits(); ++i) {
        if (x[i] | z[i]) return false;
    }
    return true;
}

bool Executor::is_clean(const Node& n) const {
    if (faults_ && cursor_ < faults_->size() && (*faults_)[cursor_].location < n.loc_end) return false;
    if (n.kind == NodeKind::Rect && is_init(n.gate)) return true;
    for (auto u : n.units) {
        if (u != kNone && !block_frame_clear(u)) return false;
    }
    return true;
}

void Executor::serialize_flags(std::uint32_t block, std::string& out) const {
    for (auto b : kBases) {
        const FlagSet& fs = flags_[block * 2 + index_of(b)];
        out.append(reinterpret_cast<const char*>(fs.w.data()), sizeof(fs.w));
    }
    const Block& blk = circuit_.blocks[block];
    if (blk.level > 1) {
        for (auto s : blk.sub) serialize_flags(s, out);
    }
}

const char* Executor::deserialize_flags(std::uint32_t block, const char* in) {
    for (auto b : kBases) {
        FlagSet& fs = flags_[block * 2 + index_of(b)];
        std::memcpy(fs.w.data(), in, sizeof(fs.w));
        in += sizeof(fs.w);
    }
    const Block& blk = circuit_.blocks[block];
    if (blk.level > 1) {
        for (auto s : blk.sub) in = deserialize_flags(s, in);
    }
    return in;
}

std::string Executor::memo_key(const Node& n) const {
    std::string key;
    key.reserve(3 + 2 * 21 * sizeof(FlagSet) * 2);
    key.push_back(static_cast<char>(n.kind));
    key.push_back(static_cast<char>(n.gate));
    key.push_back(static_cast<char>(n.level));
    if (n.kind == NodeKind::Rect && is_init(n.gate)) return key;
    for (auto u : n.units) {
        if (u != kNone) serialize_flags(u, key);
    }
    return key;
}

TrialResult execute(const Circuit& circuit, const ErrorSet& errors, TieBreaker& tiebreak, EngineConfig config) {
    validate_error_set(circuit, errors);
    Executor ex(circuit, config);
    return ex.execute(errors, tiebreak);
}

}  // namespace flagmp
