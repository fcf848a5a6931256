#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace flagmp {

/// Error basis. X errors are detected by Z-type gauge measurements and vice versa.
enum class Basis : std::uint8_t { X = 0, Z = 1 };

inline constexpr Basis kBases[2] = {Basis::X, Basis::Z};

inline constexpr int index_of(Basis b) { return static_cast<int>(b); }

/// Thrown when a circuit or frame is used inconsistently (bad qubit index,
/// size mismatch, impossible flag region, ...).
class StructuralError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Kinds of circuit location. `Init*` prepare a fresh qubit, `Meas*` read one out.
enum class GateKind : std::uint8_t { Init0, InitPlus, MeasZ, MeasX, Cnot, Wait };

std::string to_string(GateKind k);

inline constexpr bool is_init(GateKind k) { return k == GateKind::Init0 || k == GateKind::InitPlus; }
inline constexpr bool is_measure(GateKind k) { return k == GateKind::MeasZ || k == GateKind::MeasX; }

/// A gate applied to one or two physical qubits (second operand only for Cnot).
struct Gate {
    GateKind kind = GateKind::Wait;
    std::uint32_t q0 = 0;
    std::uint32_t q1 = 0;
};

/// Phase-free Pauli operator on n qubits, stored as one byte per qubit per basis.
struct PauliFrame {
    std::vector<std::uint8_t> x;
    std::vector<std::uint8_t> z;

    PauliFrame() = default;
    explicit PauliFrame(std::size_t n) : x(n, 0), z(n, 0) {}

    std::size_t size() const { return x.size(); }
    bool is_identity() const;
    void clear();

    std::uint8_t bit(Basis b, std::size_t q) const { return b == Basis::X ? x[q] : z[q]; }
    std::uint8_t& bit(Basis b, std::size_t q) { return b == Basis::X ? x[q] : z[q]; }

    friend bool operator==(const PauliFrame&, const PauliFrame&) = default;
};

/// Product of two frames; phases are dropped so this is XOR of both vectors.
PauliFrame compose(const PauliFrame& a, const PauliFrame& b);

// In-place gate actions used by the simulator hot loop.
inline void apply_cnot(PauliFrame& f, std::size_t control, std::size_t target) {
    f.x[target] ^= f.x[control];
    f.z[control] ^= f.z[target];
}

inline void apply_reset(PauliFrame& f, std::size_t q) {
    f.x[q] = 0;
    f.z[q] = 0;
}

/// Pushes a frame through one gate. Init clears the initialized qubit,
/// measurement and wait leave the frame alone.
PauliFrame propagate(const PauliFrame& frame, const Gate& gate);

/// Residual-error classes of one 4-qubit block modulo its gauge group.
enum class CosetClass : std::uint8_t { Trivial, Gauge1Side, Gauge2Side, Logical };

std::string to_string(CosetClass c);

/// Data qubits (0-based) touched by each gauge generator, per basis.
///   X errors: gauges X0X1 and X2X3.   Z errors: gauges Z0Z2 and Z1Z3.
/// `gauge_of` returns 1 or 2.
inline constexpr int gauge_of(Basis b, int data_index) {
    if (b == Basis::X) return data_index < 2 ? 1 : 2;
    return (data_index % 2 == 0) ? 1 : 2;
}

/// Representative sub-block to flip when correcting gauge `g` in basis `b`.
inline constexpr int correction_target(Basis b, int g) {
    if (g == 1) return 0;
    return b == Basis::X ? 2 : 1;
}

/// Classifies a 4-bit error pattern (bit i = qubit i) of the given basis.
CosetClass coset_classify(std::uint8_t block_error, Basis basis);

/// Parity of the error against the bare logical of the opposite type
/// (Z0Z1 for X errors, X0X2 for Z errors).
inline constexpr std::uint8_t logical_parity(std::uint8_t e, Basis b) {
    return b == Basis::X ? (((e >> 0) ^ (e >> 1)) & 1u) : (((e >> 0) ^ (e >> 2)) & 1u);
}

}  // namespace flagmp
