#ifndef FAT_COST_LEDGER_HPP
#define FAT_COST_LEDGER_HPP

#include <cstdint>

namespace fat {

// Deterministic event counters. Merging is associative and commutative,
// so totals are independent of CMA scheduling order.
struct CostLedger {
    std::int64_t row_activations = 0;  // row-pair activations (one per bit step)
    std::int64_t sa_cycles = 0;        // per-column SA evaluations
    std::int64_t cell_writes = 0;
    std::int64_t cell_reads = 0;
    std::int64_t reg_loads = 0;        // 2-bit weight register writes
    std::int64_t reduce_ops = 0;       // controller-side partial transfers/adds
    std::int64_t dpu_ops = 0;          // per-element ReLU/BN applications

    CostLedger& merge(const CostLedger& other) {
        row_activations += other.row_activations;
        sa_cycles += other.sa_cycles;
        cell_writes += other.cell_writes;
        cell_reads += other.cell_reads;
        reg_loads += other.reg_loads;
        reduce_ops += other.reduce_ops;
        dpu_ops += other.dpu_ops;
        return *this;
    }

    bool operator==(const CostLedger&) const = default;
};

}  // namespace fat

#endif
