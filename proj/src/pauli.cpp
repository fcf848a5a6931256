#include "flagmp/pauli.hpp"

#include <algorithm>

namespace flagmp {

bool PauliFrame::is_identity() const {
    return std::none_of(x.begin(), x.end(), [](auto v) { return v != 0; }) &&
           std::none_of(z.begin(), z.end(), [](auto v) { return v != 0; });
}

void PauliFrame::clear() {
    std::fill(x.begin(), x.end(), 0);
    std::fill(z.begin(), z.end(), 0);
}

PauliFrame compose(const PauliFrame& a, const PauliFrame& b) {
    if (a.size() != b.size()) {
        throw StructuralError("compose: frames cover " + std::to_string(a.size()) + " and " +
                              std::to_string(b.size()) + " qubits");
    }
    PauliFrame out(a.size());
    for (std::size_t q = 0; q < a.size(); ++q) {
        out.x[q] = a.x[q] ^ b.x[q];
        out.z[q] = a.z[q] ^ b.z[q];
    }
    return out;
}

PauliFrame propagate(const PauliFrame& frame, const Gate& gate) {
    auto check = [&](std::uint32_t q) {
        if (q >= frame.size()) {
            throw StructuralError("propagate: qubit " + std::to_string(q) + " outside frame of " +
                                  std::to_string(frame.size()));
        }
    };
    check(gate.q0);
    PauliFrame out = frame;
    switch (gate.kind) {
        case GateKind::Cnot:
            check(gate.q1);
            if (gate.q0 == gate.q1) throw StructuralError("propagate: cnot with identical operands");
            apply_cnot(out, gate.q0, gate.q1);
            break;
        case GateKind::Init0:
        case GateKind::InitPlus:
            apply_reset(out, gate.q0);
            break;
        case GateKind::MeasZ:
        case GateKind::MeasX:
        case GateKind::Wait:
            break;
    }
    return out;
}

CosetClass coset_classify(std::uint8_t block_error, Basis basis) {
    const std::uint8_t e = block_error & 0xF;
    const std::uint8_t parity = static_cast<std::uint8_t>(__builtin_popcount(e) & 1);
    const std::uint8_t logical = logical_parity(e, basis);
    if (parity == 0) return logical ? CosetClass::Logical : CosetClass::Trivial;
    return logical ? CosetClass::Gauge1Side : CosetClass::Gauge2Side;
}

std::string to_string(CosetClass c) {
    switch (c) {
        case CosetClass::Trivial: return "Trivial";
        case CosetClass::Gauge1Side: return "Gauge1Side";
        case CosetClass::Gauge2Side: return "Gauge2Side";
        case CosetClass::Logical: return "Logical";
    }
    return "?";
}

std::string to_string(GateKind k) {
    switch (k) {
        case GateKind::Init0: return "init0";
        case GateKind::InitPlus: return "initplus";
        case GateKind::MeasZ: return "measZ";
        case GateKind::MeasX: return "measX";
        case GateKind::Cnot: return "cnot";
        case GateKind::Wait: return "wait";
    }
    return "?";
}

}  // namespace flagmp
