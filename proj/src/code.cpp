#include "flagmp/code.hpp"

#include <algorithm>

namespace flagmp {

bool commutes(BlockPauli a, BlockPauli b) {
    const int overlap = __builtin_popcount(a.x & b.z) + __builtin_popcount(a.z & b.x);
    return overlap % 2 == 0;
}

const CodeDefinition& CodeDefinition::get() {
    static const CodeDefinition code = [] {
        CodeDefinition c;
        c.stabilizers = {BlockPauli{0b1111, 0}, BlockPauli{0, 0b1111}};
        c.gauges = {BlockPauli{0b0011, 0}, BlockPauli{0b1100, 0}, BlockPauli{0, 0b0101}, BlockPauli{0, 0b1010}};
        c.dressed_x = BlockPauli{0b1001, 0};
        c.dressed_z = BlockPauli{0, 0b1001};
        c.bare_x = BlockPauli{0b0101, 0};
        c.bare_z = BlockPauli{0, 0b0011};
        c.validate();
        return c;
    }();
    return code;
}

void CodeDefinition::validate() const {
    auto fail = [](const std::string& what) { throw StructuralError("code definition: " + what); };
    // Each stabilizer is the product of its two same-type gauges.
    if ((gauges[0].x ^ gauges[1].x) != stabilizers[0].x) fail("X stabilizer != X0X1 * X2X3");
    if ((gauges[2].z ^ gauges[3].z) != stabilizers[1].z) fail("Z stabilizer != Z0Z2 * Z1Z3");
    for (const auto& s : stabilizers) {
        for (const auto& g : gauges) {
            if (!commutes(s, g)) fail("stabilizer anticommutes with a gauge");
        }
    }
    for (const auto& g : gauges) {
        if (!commutes(bare_x, g) || !commutes(bare_z, g)) fail("bare logical anticommutes with a gauge");
    }
    for (const auto& s : stabilizers) {
        if (!commutes(dressed_x, s) || !commutes(dressed_z, s)) fail("dressed logical anticommutes with a stabilizer");
    }
    // The dressed pair X0X3, Z0Z3 overlaps on two qubits; each dressed
    // logical anticommutes with the opposite bare logical instead.
    if (commutes(dressed_x, bare_z) || commutes(bare_x, dressed_z)) fail("dressed logical commutes with opposite bare logical");
    if (commutes(bare_x, bare_z)) fail("bare logicals commute");
}

// --- templates ---------------------------------------------------------------

namespace {

bool detects(GateKind meas, Basis b) {
    return (meas == GateKind::MeasZ && b == Basis::X) || (meas == GateKind::MeasX && b == Basis::Z);
}

std::vector<TemplateOp> raw_ec_template() {
    using G = GateKind;
    using R = Role;
    return {
        {G::InitPlus, R::A0, R::A0, 0}, {G::InitPlus, R::A1, R::A1, 0},
        {G::Cnot, R::A0, R::D0, 1},     {G::Cnot, R::A1, R::D2, 1},
        {G::Wait, R::D1, R::D1, 1},     {G::Wait, R::D3, R::D3, 1},
        {G::Cnot, R::A0, R::D1, 2},     {G::Cnot, R::A1, R::D3, 2},
        {G::Wait, R::D0, R::D0, 2},     {G::Wait, R::D2, R::D2, 2},
        {G::MeasX, R::A0, R::A0, 3},    {G::MeasX, R::A1, R::A1, 3},
        {G::Init0, R::A0, R::A0, 4},    {G::Init0, R::A1, R::A1, 4},
        {G::Cnot, R::D0, R::A0, 5},     {G::Cnot, R::D1, R::A1, 5},
        {G::Wait, R::D2, R::D2, 5},     {G::Wait, R::D3, R::D3, 5},
        {G::Cnot, R::D2, R::A0, 6},     {G::Cnot, R::D3, R::A1, 6},
        {G::Wait, R::D0, R::D0, 6},     {G::Wait, R::D1, R::D1, 6},
        {G::MeasZ, R::A0, R::A0, 7},    {G::MeasZ, R::A1, R::A1, 7},
    };
}

std::vector<TemplateOp> raw_prep_template(PrepBasis basis) {
    using G = GateKind;
    using R = Role;
    // Bell pairs: |0>_L on (0,1),(2,3); |+>_L on (0,2),(1,3).
    const Role a0 = R::D0, b0 = basis == PrepBasis::Zero ? R::D1 : R::D2;
    const Role a1 = basis == PrepBasis::Zero ? R::D2 : R::D1, b1 = R::D3;
    return {
        {G::InitPlus, a0, a0, 0}, {G::Init0, b0, b0, 0}, {G::InitPlus, a1, a1, 0}, {G::Init0, b1, b1, 0},
        {G::Cnot, a0, b0, 1},     {G::Cnot, a1, b1, 1},
    };
}

int slot_count(const TemplateOp& op) { return op.kind == GateKind::Cnot ? 3 : 1; }

}  // namespace

ErrorEffect propagate_template_error(std::span<const TemplateOp> ops, std::size_t op, int slot, Basis basis) {
    std::array<std::uint8_t, 6> bit{};
    ErrorEffect eff;
    const TemplateOp& at = ops[op];
    auto idx = [](Role r) { return static_cast<int>(r); };
    if (is_measure(at.kind)) {
        // An outcome flip; only meaningful for the basis that measurement detects.
        if (detects(at.kind, basis)) eff.syndrome_flip = true;
    } else {
        if (slot == 0 || slot == 2) bit[idx(at.r0)] ^= 1;
        if (slot == 1 || slot == 2) bit[idx(at.r1)] ^= 1;
    }
    for (std::size_t j = op + 1; j < ops.size(); ++j) {
        const TemplateOp& o = ops[j];
        switch (o.kind) {
            case GateKind::Init0:
            case GateKind::InitPlus:
                bit[idx(o.r0)] = 0;
                break;
            case GateKind::Cnot:
                if (basis == Basis::X) bit[idx(o.r1)] ^= bit[idx(o.r0)];
                else bit[idx(o.r0)] ^= bit[idx(o.r1)];
                break;
            case GateKind::MeasX:
            case GateKind::MeasZ:
                if (detects(o.kind, basis) && bit[idx(o.r0)]) eff.syndrome_flip = !eff.syndrome_flip;
                break;
            case GateKind::Wait:
                break;
        }
    }
    for (int d = 0; d < 4; ++d) eff.data_error |= static_cast<std::uint8_t>(bit[d] << d);
    return eff;
}

Region region_from_effect(CosetClass coset, bool flip) {
    switch (coset) {
        case CosetClass::Trivial: return flip ? Region::A : Region::N;
        case CosetClass::Gauge1Side: return flip ? Region::AG1 : Region::G1;
        case CosetClass::Gauge2Side: return flip ? Region::AG2 : Region::G2;
        case CosetClass::Logical: break;
    }
    throw StructuralError("a single error produced a logical coset within one cycle");
}

const std::vector<TemplateOp>& ec_template() {
    static const std::vector<TemplateOp> ops = [] {
        auto t = raw_ec_template();
        for (std::size_t i = 0; i < t.size(); ++i) {
            for (int slot = 0; slot < slot_count(t[i]); ++slot) {
                for (auto b : kBases) {
                    const ErrorEffect e = propagate_template_error(t, i, slot, b);
                    t[i].region[slot][index_of(b)] = region_from_effect(coset_classify(e.data_error, b), e.syndrome_flip);
                }
            }
        }
        return t;
    }();
    return ops;
}

const std::vector<TemplateOp>& prep_template(PrepBasis basis) {
    auto build = [](PrepBasis pb) {
        auto t = raw_prep_template(pb);
        // The prepared state absorbs its own logical of the matching type.
        const Basis absorbed = pb == PrepBasis::Zero ? Basis::Z : Basis::X;
        for (std::size_t i = 0; i < t.size(); ++i) {
            for (int slot = 0; slot < slot_count(t[i]); ++slot) {
                for (auto b : kBases) {
                    const ErrorEffect e = propagate_template_error(t, i, slot, b);
                    CosetClass c = coset_classify(e.data_error, b);
                    if (c == CosetClass::Logical && b == absorbed) c = CosetClass::Trivial;
                    // Data errors left by preparation are seen by the first EC cycle.
                    t[i].region[slot][index_of(b)] = region_from_effect(c, c != CosetClass::Trivial);
                }
            }
        }
        return t;
    };
    static const std::vector<TemplateOp> zero = build(PrepBasis::Zero);
    static const std::vector<TemplateOp> plus = build(PrepBasis::Plus);
    return basis == PrepBasis::Zero ? zero : plus;
}

Region flag_region(const Location& loc, Basis basis, int slot) {
    if (slot < 0 || slot > 2 || (slot > 0 && loc.kind != GateKind::Cnot)) {
        throw StructuralError("flag_region: slot " + std::to_string(slot) + " invalid for " + to_string(loc.kind));
    }
    return loc.region[slot][index_of(basis)];
}

// --- builder -----------------------------------------------------------------

std::vector<std::uint32_t> Circuit::bare_logical(std::uint32_t block, Basis type) const {
    std::vector<std::uint32_t> out;
    const std::array<int, 2> subs = type == Basis::X ? std::array<int, 2>{0, 2} : std::array<int, 2>{0, 1};
    const Block& b = blocks[block];
    for (int s : subs) {
        if (b.level == 1) {
            out.push_back(b.sub[s]);
        } else {
            auto inner = bare_logical(b.sub[s], type);
            out.insert(out.end(), inner.begin(), inner.end());
        }
    }
    return out;
}

namespace {

RegionTable gadget_regions(int sub_index) {
    RegionTable t{};
    for (auto b : kBases) {
        const Region r = gauge_of(b, sub_index) == 1 ? Region::AG1 : Region::AG2;
        t[0][index_of(b)] = r;
        t[1][index_of(b)] = r;
    }
    return t;
}

class Builder {
public:
    explicit Builder(Circuit& c) : c_(c) {}

    std::uint32_t new_unit(int level) {
        if (level == 0) return c_.num_qubits++;
        Block b;
        b.level = static_cast<std::uint8_t>(level);
        b.qubit_begin = c_.num_qubits;
        for (int i = 0; i < 4; ++i) b.sub[i] = new_unit(level - 1);
        c_.blocks.push_back(b);
        return static_cast<std::uint32_t>(c_.blocks.size() - 1);
    }

    std::uint32_t sub_of(std::uint32_t block, int i) const { return c_.blocks[block].sub[i]; }

    std::uint32_t physical(GateKind kind, std::uint32_t q0, std::uint32_t q1, std::uint32_t time,
                           const RegionTable& region) {
        Location loc;
        loc.id = static_cast<std::uint32_t>(c_.locations.size());
        loc.kind = kind;
        loc.qubits = {q0, kind == GateKind::Cnot ? q1 : q0};
        loc.time_step = time;
        loc.level = top_level_;
        loc.region = region;
        c_.locations.push_back(loc);
        Node n;
        n.kind = NodeKind::Physical;
        n.gate = kind;
        n.level = 0;
        n.units = {q0, kind == GateKind::Cnot ? q1 : kNone};
        n.location = loc.id;
        n.loc_begin = loc.id;
        n.loc_end = loc.id + 1;
        return push(n);
    }

    /// Gate `kind` at concatenation level `level` on the given units. Level 0
    /// emits a physical location at time `time0`.
    std::uint32_t rect(int level, GateKind kind, std::uint32_t a, std::uint32_t b, const RegionTable& region = kNoRegions) {
        if (level == 0) return physical(kind, a, b, time_++, region);
        Node n;
        n.kind = NodeKind::Rect;
        n.gate = kind;
        n.level = static_cast<std::uint8_t>(level);
        n.units = {a, kind == GateKind::Cnot ? b : kNone};
        n.loc_begin = loc_now();
        std::vector<Step> steps;
        switch (kind) {
            case GateKind::Cnot: {
                const std::uint32_t t = time_;
                for (int i = 0; i < 4; ++i) {
                    Step s;
                    s.child = level == 1 ? physical(kind, sub_of(a, i), sub_of(b, i), t, gadget_regions(i))
                                         : rect(level - 1, kind, sub_of(a, i), sub_of(b, i));
                    s.target = {a, b, kNone};
                    s.region = gadget_regions(i);
                    steps.push_back(s);
                }
                if (level == 1) ++time_;
                n.ec[0] = ec(level, a);
                n.ec[1] = ec(level, b);
                break;
            }
            case GateKind::Wait: {
                const std::uint32_t t = time_;
                for (int i = 0; i < 4; ++i) {
                    Step s;
                    s.child = level == 1 ? physical(kind, sub_of(a, i), kNone, t, gadget_regions(i))
                                         : rect(level - 1, kind, sub_of(a, i), kNone);
                    s.target = {a, kNone, kNone};
                    s.region = gadget_regions(i);
                    steps.push_back(s);
                }
                if (level == 1) ++time_;
                break;
            }
            case GateKind::Init0:
            case GateKind::InitPlus: {
                const auto& ops = prep_template(kind == GateKind::Init0 ? PrepBasis::Zero : PrepBasis::Plus);
                append_template(level, ops, {sub_of(a, 0), sub_of(a, 1), sub_of(a, 2), sub_of(a, 3), kNone, kNone}, a,
                                steps);
                n.ec[0] = ec(level, a);
                break;
            }
            case GateKind::MeasX:
            case GateKind::MeasZ:
                throw StructuralError("measurement is built with measure(), not rect()");
        }
        n.loc_end = loc_now();
        return push(n, steps);
    }

    /// Transversal readout of a level>=1 block.
    std::uint32_t measure(int level, GateKind kind, std::uint32_t block) {
        Node n;
        n.kind = NodeKind::Measure;
        n.gate = kind;
        n.level = static_cast<std::uint8_t>(level);
        n.units = {block, kNone};
        n.loc_begin = loc_now();
        const Block& b = c_.blocks[block];
        const Basis err = kind == GateKind::MeasZ ? Basis::X : Basis::Z;
        const std::uint32_t t = time_++;
        for (std::uint32_t q = b.qubit_begin; q < b.qubit_begin + b.num_qubits(); ++q) {
            RegionTable r{};
            const int idx = static_cast<int>((q - b.qubit_begin) % 4);
            r[0][index_of(err)] = gauge_of(err, idx) == 1 ? Region::AG1 : Region::AG2;
            Location loc;
            loc.id = static_cast<std::uint32_t>(c_.locations.size());
            loc.kind = kind;
            loc.qubits = {q, q};
            loc.time_step = t;
            loc.level = top_level_;
            loc.region = r;
            c_.locations.push_back(loc);
        }
        n.loc_end = loc_now();
        return push(n);
    }

    std::uint32_t ec(int level, std::uint32_t block) {
        Node n;
        n.kind = NodeKind::Ec;
        n.level = static_cast<std::uint8_t>(level);
        n.units = {block, kNone};
        n.anc = {new_unit(level - 1), new_unit(level - 1)};
        n.loc_begin = loc_now();
        std::vector<Step> steps;
        append_template(level, ec_template(),
                        {sub_of(block, 0), sub_of(block, 1), sub_of(block, 2), sub_of(block, 3), n.anc[0], n.anc[1]},
                        block, steps);
        n.loc_end = loc_now();
        return push(n, steps);
    }

    void set_top_level(int l) { top_level_ = static_cast<std::uint8_t>(l); }

private:
    void append_template(int level, const std::vector<TemplateOp>& ops, std::array<std::uint32_t, 6> units,
                         std::uint32_t owner, std::vector<Step>& steps) {
        const std::uint32_t base = time_;
        int last_step = 0;
        for (const TemplateOp& op : ops) {
            const std::uint32_t u0 = units[static_cast<int>(op.r0)];
            const std::uint32_t u1 = op.kind == GateKind::Cnot ? units[static_cast<int>(op.r1)] : kNone;
            Step s;
            s.region = op.region;
            s.target = {owner, op.kind == GateKind::Cnot ? owner : kNone, op.kind == GateKind::Cnot ? owner : kNone};
            if (is_measure(op.kind)) {
                s.syndrome_basis = static_cast<std::int8_t>(op.kind == GateKind::MeasZ ? 0 : 1);
                s.child = level == 1 ? physical(op.kind, u0, kNone, base + op.step, op.region)
                                     : measure(level - 1, op.kind, u0);
            } else if (level == 1) {
                s.child = physical(op.kind, u0, u1, base + op.step, op.region);
            } else {
                s.child = rect(level - 1, op.kind, u0, u1);
            }
            steps.push_back(s);
            last_step = std::max(last_step, op.step);
        }
        if (level == 1) time_ = base + static_cast<std::uint32_t>(last_step) + 1;
    }

    std::uint32_t loc_now() const { return static_cast<std::uint32_t>(c_.locations.size()); }

    std::uint32_t push(Node n, const std::vector<Step>& steps = {}) {
        n.step_begin = static_cast<std::uint32_t>(c_.steps.size());
        n.step_count = static_cast<std::uint32_t>(steps.size());
        c_.steps.insert(c_.steps.end(), steps.begin(), steps.end());
        c_.nodes.push_back(n);
        return static_cast<std::uint32_t>(c_.nodes.size() - 1);
    }

    Circuit& c_;
    std::uint32_t time_ = 0;
    std::uint8_t top_level_ = 1;
};

void check_level(int level, int max_level = 6) {
    if (level < 1 || level > max_level) {
        throw std::invalid_argument("level must be in 1.." + std::to_string(max_level) + ", got " + std::to_string(level));
    }
}

}  // namespace

Circuit build_ec_cycle(int level) {
    check_level(level);
    Circuit c;
    c.level = level;
    Builder b(c);
    b.set_top_level(level);
    const std::uint32_t block = b.new_unit(level);
    c.top_blocks = {block};
    c.program = {b.ec(level, block)};
    return c;
}

Circuit build_prep(int level, PrepBasis basis) {
    check_level(level);
    Circuit c;
    c.level = level;
    Builder b(c);
    b.set_top_level(level);
    const std::uint32_t block = b.new_unit(level);
    c.top_blocks = {block};
    c.program = {b.rect(level, basis == PrepBasis::Zero ? GateKind::Init0 : GateKind::InitPlus, block, kNone)};
    return c;
}

Circuit build_exrec(int levels) {
    check_level(levels);
    CodeDefinition::get().validate();
    Circuit c;
    c.level = levels;
    Builder b(c);
    b.set_top_level(levels);
    const std::uint32_t a = b.new_unit(levels);
    const std::uint32_t t = b.new_unit(levels);
    c.top_blocks = {a, t};
    c.program.push_back(b.ec(levels, a));
    c.program.push_back(b.ec(levels, t));
    c.program.push_back(b.rect(levels, GateKind::Cnot, a, t));
    return c;
}

std::size_t count_locations(int level) { return build_exrec(level).size(); }

}  // namespace flagmp
