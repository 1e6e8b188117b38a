// Sparse Addition Control Unit: 2-bit ternary weight registers, row
// activation generation that skips zero weights, and the three-stage
// addition-based sparse dot product. Includes the cross-CMA reduction.
#ifndef FAT_SPARSE_CONTROL_HPP
#define FAT_SPARSE_CONTROL_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fat/memory_array.hpp"

namespace fat {

// sign/data encoding: +1 -> (0,1), 0 -> (0,0), -1 -> (1,1). (1,0) is
// illegal. A row is activated only when the data bit is set.
struct TernaryWeightCode {
    sa::Bit sign = 0;
    sa::Bit data = 0;

    bool activates() const { return data != 0; }
    bool is_subtract() const { return sign != 0; }
    int value() const { return data ? (sign ? -1 : 1) : 0; }
    bool operator==(const TernaryWeightCode&) const = default;
};

TernaryWeightCode encode_weight(int w);         // w in {-1, 0, +1}
TernaryWeightCode extend_binary_weight(int w);  // w in {-1, +1}, BWN mode

struct WeightRegisterFile {
    std::vector<TernaryWeightCode> codes;
    int capacity = 32;

    void load(std::span<const int> weights, bool bwn_mode, CostLedger& ledger);
    int size() const { return static_cast<int>(codes.size()); }
};

struct DotProductStats {
    std::int64_t row_activations = 0;  // operand rows read in stages 1-2
    std::int64_t add_passes = 0;
    std::int64_t sub_passes = 0;
    std::int64_t copy_passes = 0;
    std::int64_t skipped_rows = 0;

    std::int64_t total_passes() const {
        // A subtraction is a NOT pass plus an add pass.
        return add_passes + copy_passes + 2 * sub_passes;
    }
    DotProductStats& merge(const DotProductStats& o) {
        row_activations += o.row_activations;
        add_passes += o.add_passes;
        sub_passes += o.sub_passes;
        copy_passes += o.copy_passes;
        skipped_rows += o.skipped_rows;
        return *this;
    }
    bool operator==(const DotProductStats&) const = default;
};

// One record per accumulation pass: which weighted operand rows were
// activated and by which operation. Zero-weight rows never appear.
struct TraceRecord {
    int stage = 0;                // 1 = plus group, 2 = minus group, 3 = combine
    std::vector<int> rows;        // operand indices activated in this pass
    std::string op;               // "add", "copy", "not", "sub_add", "zero"

    std::string to_json_line() const;
};

// Provides accumulator destinations for the fold. The caller declares
// which slots are still live before each request. The fixed allocator
// reuses a static scratch region (the endurance baseline); the rotating
// allocator walks reserved interval pairs round-robin so successive
// partial sums land on fresh cells.
class AccumAllocator {
public:
    virtual ~AccumAllocator() = default;
    void set_live(std::span<const int> live_base_rows) {
        live_.assign(live_base_rows.begin(), live_base_rows.end());
    }
    virtual SlotFamily next() = 0;

protected:
    std::vector<int> live_;
};

class FixedAllocator : public AccumAllocator {
public:
    // Four accumulator-wide slots starting at base_row.
    FixedAllocator(int base_row, int acc_bits);
    SlotFamily next() override;

private:
    std::vector<SlotFamily> slots_;
};

class RotatingAllocator : public AccumAllocator {
public:
    // Walks 16-row interval pairs; the cursor persists across dot
    // products so wear spreads over every interval.
    RotatingAllocator(std::vector<int> pair_base_rows, int acc_bits);
    SlotFamily next() override;
    int cursor() const { return cursor_; }

private:
    std::vector<int> pair_base_rows_;
    int acc_bits_;
    int cursor_ = 0;
};

struct DotProductResult {
    SlotFamily result;  // acc_bits-wide two's-complement, per enabled column
    DotProductStats stats;
    std::vector<TraceRecord> trace;
};

class Sacu {
public:
    explicit Sacu(Cma& cma) : cma_(&cma) {}

    void load_weights(std::span<const int> weights, bool bwn_mode = false);
    const WeightRegisterFile& registers() const { return regs_; }

    // Three-stage sparse dot product over the loaded weights. operands[i]
    // is the aligned per-column family carrying x_i; rows with weight
    // zero are never activated. Result per enabled column:
    //   sum_{w=+1} x_i - sum_{w=-1} x_i.
    DotProductResult sparse_dot_product(const std::vector<SlotFamily>& operands,
                                        const ColumnMask& mask,
                                        AccumAllocator& alloc,
                                        bool collect_trace = false);

private:
    Cma* cma_;
    WeightRegisterFile regs_;
};

// Accumulates aligned partial sums of distinct CMAs, index ascending.
std::int64_t reduce_across_cmas(std::span<const std::int64_t> partials,
                                CostLedger& ledger);

// Accumulator write passes of one dot product with p plus-weights and m
// minus-weights; shared by the functional path and the wear model.
std::int64_t dot_product_passes(int p, int m);

}  // namespace fat

#endif
