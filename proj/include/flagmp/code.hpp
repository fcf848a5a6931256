#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "flagmp/flags.hpp"
#include "flagmp/pauli.hpp"

namespace flagmp {

/// One Pauli on the four data qubits of a block, as X and Z bit masks.
struct BlockPauli {
    std::uint8_t x = 0;
    std::uint8_t z = 0;
};

/// Symplectic commutation test on 4-qubit operators.
bool commutes(BlockPauli a, BlockPauli b);

/// The [[4,1,2]] subsystem code.
struct CodeDefinition {
    std::array<BlockPauli, 2> stabilizers;  // X0X1X2X3, Z0Z1Z2Z3
    std::array<BlockPauli, 4> gauges;       // X0X1, X2X3, Z0Z2, Z1Z3
    BlockPauli dressed_x;                   // X0X3
    BlockPauli dressed_z;                   // Z0Z3
    BlockPauli bare_x;                      // X0X2
    BlockPauli bare_z;                      // Z0Z1

    static const CodeDefinition& get();

    /// Checks every commutation relation the decoder relies on; throws
    /// StructuralError on the first violation.
    void validate() const;
};

/// Qubit roles inside the syndrome-extraction and preparation templates.
/// D0..D3 are data sub-units, A0/A1 the two ancilla sub-units.
enum class Role : std::uint8_t { D0, D1, D2, D3, A0, A1 };

inline constexpr bool is_data(Role r) { return static_cast<int>(r) < 4; }
inline constexpr int data_index(Role r) { return static_cast<int>(r); }

/// Region table of one location: [operand slot][basis]. Slot 0 is an error on
/// the first operand, slot 1 on the second operand, slot 2 on both at once.
using RegionTable = std::array<std::array<Region, 2>, 3>;

inline constexpr RegionTable kNoRegions{};

struct TemplateOp {
    GateKind kind;
    Role r0;
    Role r1;  // second operand for Cnot (control r0, target r1)
    int step;
    RegionTable region{};
};

/// Which logical state a preparation fragment produces.
enum class PrepBasis : std::uint8_t { Zero, Plus };

/// The syndrome-extraction cycle: X-gauge phase then Z-gauge phase, each with
/// two ancillas, with region tags filled in by error propagation.
const std::vector<TemplateOp>& ec_template();

/// Encoded |0> (pairs (0,1),(2,3)) or |+> (pairs (0,2),(1,3)) preparation.
const std::vector<TemplateOp>& prep_template(PrepBasis basis);

/// Effect of a single error of `basis` placed on `slot` after template op
/// `op` of the EC cycle, obtained by propagating it to the end of the cycle.
struct ErrorEffect {
    std::uint8_t data_error = 0;  // 4-bit pattern on D0..D3
    bool syndrome_flip = false;
};
ErrorEffect propagate_template_error(std::span<const TemplateOp> ops, std::size_t op, int slot, Basis basis);

/// Maps (coset, ancilla flip) to a region tag; throws on a logical coset.
Region region_from_effect(CosetClass coset, bool flip);

inline constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

/// A physical fault site.
struct Location {
    std::uint32_t id = 0;
    GateKind kind = GateKind::Wait;
    std::array<std::uint32_t, 2> qubits{0, 0};
    std::uint32_t time_step = 0;
    std::uint8_t level = 0;  // level of the top-level fragment containing it
    RegionTable region{};    // relative to the enclosing level-1 block

    Region region_x() const { return region[0][0]; }
    Region region_z() const { return region[0][1]; }
    Gate gate() const { return Gate{kind, qubits[0], qubits[1]}; }
};

/// flag_region for one operand slot of a location.
Region flag_region(const Location& loc, Basis basis, int slot = 0);

/// A level>=1 encoded block. `sub` are block ids at level-1, or physical
/// qubit ids when level == 1. Data qubits are contiguous from qubit_begin.
struct Block {
    std::uint8_t level = 1;
    std::uint32_t qubit_begin = 0;
    std::array<std::uint32_t, 4> sub{};

    std::uint32_t num_qubits() const { return 1u << (2 * level); }
};

enum class NodeKind : std::uint8_t { Physical, Rect, Ec, Measure };

/// One child of a Rect or Ec node together with the flag updates its report
/// feeds into: target[slot] is the block whose flags receive region[slot].
struct Step {
    std::uint32_t child = kNone;
    std::array<std::uint32_t, 3> target{kNone, kNone, kNone};
    RegionTable region{};
    std::int8_t syndrome_basis = -1;  // for measurements: basis index whose syndrome they feed
};

/// Node of the concatenated circuit tree.
///  - Physical: one location (`location`).
///  - Rect: level-`level` gate on units[0..1]: gadget steps, then trailing
///    EC nodes ec[0..1] (none for waits).
///  - Ec: syndrome-extraction cycle of block units[0] with ancillas anc[0..1].
///  - Measure: transversal readout of block units[0]; its locations are
///    [loc_begin, loc_end) in qubit order.
struct Node {
    NodeKind kind = NodeKind::Physical;
    GateKind gate = GateKind::Wait;
    std::uint8_t level = 0;
    std::array<std::uint32_t, 2> units{kNone, kNone};
    std::array<std::uint32_t, 2> anc{kNone, kNone};
    std::array<std::uint32_t, 2> ec{kNone, kNone};
    std::uint32_t location = kNone;
    std::uint32_t loc_begin = 0;
    std::uint32_t loc_end = 0;
    std::uint32_t step_begin = 0;
    std::uint32_t step_count = 0;
};

/// Immutable circuit: flat location list plus the concatenation tree that
/// the simulator walks. `program` lists top-level nodes in execution order.
struct Circuit {
    int level = 1;
    std::vector<Location> locations;
    std::vector<Node> nodes;
    std::vector<Step> steps;
    std::vector<Block> blocks;
    std::vector<std::uint32_t> program;
    std::vector<std::uint32_t> top_blocks;
    std::uint32_t num_qubits = 0;

    std::size_t size() const { return locations.size(); }
    std::span<const Step> steps_of(const Node& n) const {
        return std::span<const Step>(steps).subspan(n.step_begin, n.step_count);
    }
    /// Bare logical support (physical qubits) of a block, X or Z type.
    std::vector<std::uint32_t> bare_logical(std::uint32_t block, Basis type) const;
};

/// Level-k syndrome-extraction cycle on one fresh block.
Circuit build_ec_cycle(int level);

/// Level-k encoded preparation followed by its EC (a preparation rectangle).
Circuit build_prep(int level, PrepBasis basis);

/// CNOT extended rectangle: leading EC on both blocks, level-l transversal
/// CNOT rectangle (gate plus trailing ECs).
Circuit build_exrec(int levels);

/// Number of physical locations in the level-l exRec.
std::size_t count_locations(int level);

}  // namespace flagmp
