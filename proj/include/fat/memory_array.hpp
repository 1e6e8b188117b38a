// One Computing Memory Array (CMA): a rows x cols bit grid with
// column-major operands, two reserved constant rows, and bit-serial
// vector arithmetic driven by one sense amplifier per column.
#ifndef FAT_MEMORY_ARRAY_HPP
#define FAT_MEMORY_ARRAY_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "fat/cost_ledger.hpp"
#include "fat/sa_logic.hpp"
#include "fat/wear.hpp"

namespace fat {

struct CmaGeometry {
    int rows = 512;
    int cols = 256;
    int operand_bits = 8;
    int acc_bits = 16;

    void validate() const;
};

enum class Signedness { Unsigned, TwosComplement };

// One operand in one column, bit i at row base_row + i (LSB first).
struct OperandSlot {
    int col = 0;
    int base_row = 0;
    int bits = 8;
    Signedness sgn = Signedness::Unsigned;
};

// Aligned per-column operand family: the same row interval in every
// enabled column. bits == 0 denotes the all-zeros constant source.
struct SlotFamily {
    int base_row = 0;
    int bits = 8;
    Signedness sgn = Signedness::Unsigned;

    static SlotFamily zero() { return SlotFamily{0, 0, Signedness::Unsigned}; }
};

struct ColumnMask {
    std::vector<int> cols;

    static ColumnMask all(int n);
    static ColumnMask single(int col);
    static ColumnMask range(int first, int count);
    int size() const { return static_cast<int>(cols.size()); }
};

enum class BoolOp { And, Or, Xor, Nand, Not };

class Cma {
public:
    explicit Cma(CmaGeometry geo = {});

    const CmaGeometry& geometry() const { return geo_; }
    int zeros_row() const { return kZerosRow; }
    int ones_row() const { return kOnesRow; }
    int first_operand_row() const { return 2; }
    int operand_rows() const { return geo_.rows - 2; }

    void write_operand(const OperandSlot& slot, std::int64_t value);
    std::int64_t read_operand(const OperandSlot& slot) const;

    // dest[col] = op(cells[rowA][col], cells[rowB][col]) for masked columns.
    // NOT reads rowA against the all-ones row; rowB is ignored for it.
    void rowpair_bool(BoolOp op, int rowA, int rowB, int dest, const ColumnMask& mask);

    // dest = (a + b) mod 2^width per enabled column, LSB-first bit-serial,
    // carry kept in the per-column SA latch (never written to cells).
    void vector_add(const SlotFamily& a, const SlotFamily& b, const SlotFamily& dest,
                    int width, const ColumnMask& mask, sa::Bit carry_init = 0);

    // dest = (a - b) mod 2^width: NOT(b) into scratch, then add with the
    // carry latch initialized to 1.
    void vector_sub(const SlotFamily& a, const SlotFamily& b, const SlotFamily& dest,
                    const SlotFamily& scratch, int width, const ColumnMask& mask);

    // dest = src (zero-extended), via XOR with the all-zeros row.
    void copy_operand(const SlotFamily& src, const SlotFamily& dest, int width,
                      const ColumnMask& mask);

    sa::Bit cell(int row, int col) const;

    const CostLedger& ledger() const { return ledger_; }
    CostLedger& ledger() { return ledger_; }
    const WearLedger& wear() const { return wear_; }

    // Row-major bit-packed image of the grid, LSB of each byte first.
    std::vector<std::uint8_t> snapshot() const;
    void restore(std::span<const std::uint8_t> blob);

private:
    static constexpr int kZerosRow = 0;
    static constexpr int kOnesRow = 1;

    void check_row(int row) const;
    void check_col(int col) const;
    void check_mask(const ColumnMask& mask) const;
    void check_writable_row(int row) const;
    void check_slot(const OperandSlot& slot) const;
    // Validates a family read interval for the given width; bits == 0 is
    // the synthetic zero source.
    void check_family_src(const SlotFamily& f, int width) const;
    void check_family_dest(const SlotFamily& f, int width) const;
    int src_row(const SlotFamily& f, int bit) const {
        return bit < f.bits ? f.base_row + bit : kZerosRow;
    }
    void store(int row, int col, sa::Bit v);

    CmaGeometry geo_;
    std::vector<std::uint8_t> cells_;       // rows x cols
    std::vector<sa::SaState> sa_;           // one per column
    mutable CostLedger ledger_;
    WearLedger wear_;
};

// Intervals overlap check helper shared with validation and tests.
bool rows_overlap(int base1, int len1, int base2, int len2);

}  // namespace fat

#endif
