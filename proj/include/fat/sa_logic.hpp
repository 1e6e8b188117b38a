// Behavioral model of the per-column Sense Amplifier: two-cell sensing
// against AND/OR/READ reference levels, Boolean combining, carry latch,
// and 4-port output selection.
#ifndef FAT_SA_LOGIC_HPP
#define FAT_SA_LOGIC_HPP

#include <cstdint>

namespace fat::sa {

using Bit = std::uint8_t;  // 0 = parallel / low resistance, 1 = anti-parallel / high

enum class SaOp : std::uint8_t { Read, Not, And, Nand, Or, Xor, Add };

enum class SelectorPort : std::uint8_t { And = 0, Or = 1, Xor = 2, Sum = 3 };

// Enable/selector configuration. Only the seven rows of the operation
// table are legal; anything else is rejected eagerly at configuration
// time so the per-cycle loops stay branch-light.
struct SaConfig {
    Bit en_read = 0;
    Bit en_and = 0;
    Bit en_or = 0;
    Bit sel1 = 0;
    Bit sel2 = 0;

    static SaConfig for_op(SaOp op);
    SelectorPort port() const { return static_cast<SelectorPort>((sel1 << 1) | sel2); }
    bool is_legal() const;
    void validate() const;  // throws SimError on an illegal row
    bool operator==(const SaConfig&) const = default;
};

// Comparator outputs of the two OpAmps. nor_sig is the complement of
// or_sig except in the NAND row, where the second OpAmp is disabled and
// its NOR port is forced low.
struct ComparatorOutputs {
    Bit and_sig = 0;
    Bit or_sig = 0;
    Bit nor_sig = 0;
};

// One carry latch per column; persists across the sequential bit steps
// of a single addition and is re-initialized before the next one.
struct SaState {
    Bit carry_latch = 0;
};

struct CombineOutputs {
    Bit xor_sig = 0;
    Bit sum = 0;
    Bit cout = 0;
};

struct PortSignals {
    Bit and_sig = 0;
    Bit or_sig = 0;
    Bit xor_sig = 0;
    Bit sum = 0;
};

// Sense two activated cells (or one, under READ) and classify the
// three-level source-line voltage: 00 -> low, 01/10 -> mid, 11 -> high.
ComparatorOutputs sense_pair(Bit a, Bit b, const SaConfig& cfg);

// XOR = and_sig NOR nor_sig; SUM = XOR xor carry_in;
// Cout = (or_sig and carry_in) or and_sig.
CombineOutputs combine(const ComparatorOutputs& c, Bit carry_in);

// Pure projection of the port named by (sel1, sel2). READ and OR share
// the OR port.
Bit select(const SaConfig& cfg, const PortSignals& signals);

// One bit step of the fast addition: returns the sum bit and moves the
// carry-out into the latch. The caller counts the SA cycle.
Bit step_add(Bit a, Bit b, SaState& state);

}  // namespace fat::sa

#endif
