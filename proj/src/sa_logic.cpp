#include "fat/sa_logic.hpp"

#include <array>

#include "fat/errors.hpp"

namespace fat::sa {

namespace {

struct ConfigRow {
    SaOp op;
    SaConfig cfg;
};

// Enable signals and selector port per operation.
constexpr std::array<ConfigRow, 7> kConfigTable = {{
    {SaOp::Read, {1, 0, 0, 0, 1}},  // READ -> OR port
    {SaOp::Not,  {0, 1, 1, 1, 0}},  // NOT  -> XOR port
    {SaOp::And,  {0, 1, 0, 0, 0}},  // AND  -> AND port
    {SaOp::Nand, {0, 1, 0, 1, 0}},  // NAND -> XOR port (second OpAmp off)
    {SaOp::Or,   {0, 0, 1, 0, 1}},  // OR   -> OR port
    {SaOp::Xor,  {0, 1, 1, 1, 0}},  // XOR  -> XOR port
    {SaOp::Add,  {0, 1, 1, 1, 1}},  // ADD  -> SUM port
}};

}  // namespace

SaConfig SaConfig::for_op(SaOp op) {
    for (const auto& row : kConfigTable) {
        if (row.op == op) return row.cfg;
    }
    throw SimError("sa: unknown operation");
}

bool SaConfig::is_legal() const {
    for (const auto& row : kConfigTable) {
        if (row.cfg == *this) return true;
    }
    return false;
}

void SaConfig::validate() const {
    if (!is_legal()) throw SimError("sa: illegal enable/selector configuration");
}

ComparatorOutputs sense_pair(Bit a, Bit b, const SaConfig& cfg) {
    cfg.validate();
    ComparatorOutputs out;
    // First OpAmp, reference between the mid and high levels.
    out.and_sig = cfg.en_and ? static_cast<Bit>(a & b) : 0;
    // Second OpAmp: OR reference between low and mid, or the single-cell
    // READ reference. Disabled entirely in the NAND row, which forces the
    // NOR port low for any sensed voltage.
    if (cfg.en_or) {
        out.or_sig = static_cast<Bit>(a | b);
        out.nor_sig = static_cast<Bit>(!out.or_sig);
    } else if (cfg.en_read) {
        out.or_sig = a;
        out.nor_sig = static_cast<Bit>(!a);
    } else {
        out.or_sig = 0;
        out.nor_sig = 0;
    }
    return out;
}

CombineOutputs combine(const ComparatorOutputs& c, Bit carry_in) {
    CombineOutputs out;
    out.xor_sig = static_cast<Bit>(!(c.and_sig | c.nor_sig));
    out.sum = static_cast<Bit>(out.xor_sig ^ carry_in);
    out.cout = static_cast<Bit>((c.or_sig & carry_in) | c.and_sig);
    return out;
}

Bit select(const SaConfig& cfg, const PortSignals& signals) {
    cfg.validate();
    switch (cfg.port()) {
        case SelectorPort::And: return signals.and_sig;
        case SelectorPort::Or: return signals.or_sig;
        case SelectorPort::Xor: return signals.xor_sig;
        case SelectorPort::Sum: return signals.sum;
    }
    throw SimError("sa: bad selector");
}

Bit step_add(Bit a, Bit b, SaState& state) {
    const SaConfig cfg = SaConfig::for_op(SaOp::Add);
    const ComparatorOutputs sensed = sense_pair(a, b, cfg);
    const CombineOutputs combined = combine(sensed, state.carry_latch);
    state.carry_latch = combined.cout;
    return select(cfg, PortSignals{sensed.and_sig, sensed.or_sig,
                                   combined.xor_sig, combined.sum});
}

}  // namespace fat::sa
