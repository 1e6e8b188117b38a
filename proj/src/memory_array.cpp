#include "fat/memory_array.hpp"

#include <numeric>

#include "fat/errors.hpp"

namespace fat {

void CmaGeometry::validate() const {
    require(rows >= 4, "cma: need at least constant rows plus operand space");
    require(cols >= 1, "cma: cols must be positive");
    require(operand_bits >= 1 && acc_bits >= operand_bits,
            "cma: operand_bits must be positive and no wider than acc_bits");
    require(rows >= 2 + operand_bits, "cma: rows must cover constants plus one operand");
}

ColumnMask ColumnMask::all(int n) {
    ColumnMask m;
    m.cols.resize(n);
    std::iota(m.cols.begin(), m.cols.end(), 0);
    return m;
}

ColumnMask ColumnMask::single(int col) { return ColumnMask{{col}}; }

ColumnMask ColumnMask::range(int first, int count) {
    ColumnMask m;
    m.cols.resize(count);
    std::iota(m.cols.begin(), m.cols.end(), first);
    return m;
}

bool rows_overlap(int base1, int len1, int base2, int len2) {
    if (len1 <= 0 || len2 <= 0) return false;
    return base1 < base2 + len2 && base2 < base1 + len1;
}

Cma::Cma(CmaGeometry geo) : geo_(geo) {
    geo_.validate();
    cells_.assign(static_cast<size_t>(geo_.rows) * geo_.cols, 0);
    sa_.assign(geo_.cols, sa::SaState{});
    wear_ = WearLedger(geo_.rows, geo_.cols);
    // Reserved constant rows: all-zeros for zero-extension and NAND,
    // all-ones for NOT via XOR.
    for (int c = 0; c < geo_.cols; ++c) {
        cells_[static_cast<size_t>(kOnesRow) * geo_.cols + c] = 1;
    }
}

void Cma::check_row(int row) const {
    require(row >= 0 && row < geo_.rows, "cma: row out of range");
}

void Cma::check_col(int col) const {
    require(col >= 0 && col < geo_.cols, "cma: column out of range");
}

void Cma::check_mask(const ColumnMask& mask) const {
    for (int c : mask.cols) check_col(c);
}

void Cma::check_writable_row(int row) const {
    check_row(row);
    require(row != kZerosRow && row != kOnesRow, "cma: constant rows are read-only");
}

void Cma::check_slot(const OperandSlot& slot) const {
    check_col(slot.col);
    require(slot.bits >= 1, "cma: slot width must be positive");
    require(slot.base_row >= first_operand_row() &&
                slot.base_row + slot.bits <= geo_.rows,
            "cma: slot rows out of operand region");
}

void Cma::check_family_src(const SlotFamily& f, int width) const {
    if (f.bits == 0) return;  // synthetic zero source
    require(f.bits <= width, "cma: source wider than pass width");
    require(f.base_row >= first_operand_row() && f.base_row + f.bits <= geo_.rows,
            "cma: source family rows out of range");
}

void Cma::check_family_dest(const SlotFamily& f, int width) const {
    require(width >= 1 && width <= geo_.acc_bits, "cma: width out of range");
    require(f.bits >= width, "cma: destination narrower than pass width");
    require(f.base_row >= first_operand_row() && f.base_row + width <= geo_.rows,
            "cma: destination family rows out of range");
}

void Cma::store(int row, int col, sa::Bit v) {
    cells_[static_cast<size_t>(row) * geo_.cols + col] = v;
    wear_.record(row, col);
}

sa::Bit Cma::cell(int row, int col) const {
    return cells_[static_cast<size_t>(row) * geo_.cols + col];
}

void Cma::write_operand(const OperandSlot& slot, std::int64_t value) {
    check_slot(slot);
    std::int64_t lo, hi;
    if (slot.sgn == Signedness::Unsigned) {
        lo = 0;
        hi = (std::int64_t{1} << slot.bits) - 1;
    } else {
        lo = -(std::int64_t{1} << (slot.bits - 1));
        hi = (std::int64_t{1} << (slot.bits - 1)) - 1;
    }
    require(value >= lo && value <= hi, "cma: value does not fit operand slot");
    const std::uint64_t pattern = static_cast<std::uint64_t>(value);
    for (int i = 0; i < slot.bits; ++i) {
        store(slot.base_row + i, slot.col, static_cast<sa::Bit>((pattern >> i) & 1));
    }
    ledger_.cell_writes += slot.bits;
}

std::int64_t Cma::read_operand(const OperandSlot& slot) const {
    check_slot(slot);
    std::uint64_t raw = 0;
    for (int i = 0; i < slot.bits; ++i) {
        raw |= static_cast<std::uint64_t>(cell(slot.base_row + i, slot.col)) << i;
    }
    ledger_.cell_reads += slot.bits;
    if (slot.sgn == Signedness::TwosComplement &&
        (raw >> (slot.bits - 1)) != 0) {
        return static_cast<std::int64_t>(raw) - (std::int64_t{1} << slot.bits);
    }
    return static_cast<std::int64_t>(raw);
}

void Cma::rowpair_bool(BoolOp op, int rowA, int rowB, int dest, const ColumnMask& mask) {
    check_row(rowA);
    check_writable_row(dest);
    check_mask(mask);
    sa::SaOp sa_op = sa::SaOp::And;
    switch (op) {
        case BoolOp::And: sa_op = sa::SaOp::And; break;
        case BoolOp::Or: sa_op = sa::SaOp::Or; break;
        case BoolOp::Xor: sa_op = sa::SaOp::Xor; break;
        case BoolOp::Nand: sa_op = sa::SaOp::Nand; break;
        case BoolOp::Not:
            sa_op = sa::SaOp::Not;
            rowB = kOnesRow;
            break;
    }
    check_row(rowB);
    require(rowA != rowB, "cma: row pair must be distinct");
    require(dest != rowA && dest != rowB, "cma: dest may not be a source row");

    const sa::SaConfig cfg = sa::SaConfig::for_op(sa_op);
    ledger_.row_activations += 1;
    for (int col : mask.cols) {
        const auto sensed = sa::sense_pair(cell(rowA, col), cell(rowB, col), cfg);
        const auto combined = sa::combine(sensed, 0);
        const sa::Bit out = sa::select(
            cfg, sa::PortSignals{sensed.and_sig, sensed.or_sig, combined.xor_sig,
                                 combined.sum});
        store(dest, col, out);
    }
    ledger_.sa_cycles += mask.size();
    ledger_.cell_writes += mask.size();
}

void Cma::vector_add(const SlotFamily& a, const SlotFamily& b, const SlotFamily& dest,
                     int width, const ColumnMask& mask, sa::Bit carry_init) {
    check_family_dest(dest, width);
    check_family_src(a, width);
    check_family_src(b, width);
    check_mask(mask);
    require(!rows_overlap(dest.base_row, width, a.base_row, a.bits) &&
                !rows_overlap(dest.base_row, width, b.base_row, b.bits),
            "cma: in-place destination is forbidden within one pass");

    for (int col : mask.cols) sa_[col].carry_latch = carry_init;
    for (int i = 0; i < width; ++i) {
        const int ra = src_row(a, i);
        const int rb = src_row(b, i);
        ledger_.row_activations += 1;
        for (int col : mask.cols) {
            const sa::Bit s = sa::step_add(cell(ra, col), cell(rb, col), sa_[col]);
            store(dest.base_row + i, col, s);
        }
        ledger_.sa_cycles += mask.size();
        ledger_.cell_writes += mask.size();
    }
}

void Cma::vector_sub(const SlotFamily& a, const SlotFamily& b, const SlotFamily& dest,
                     const SlotFamily& scratch, int width, const ColumnMask& mask) {
    check_family_dest(dest, width);
    check_family_dest(scratch, width);
    check_family_src(a, width);
    check_family_src(b, width);
    require(!rows_overlap(scratch.base_row, width, a.base_row, a.bits) &&
                !rows_overlap(scratch.base_row, width, b.base_row, b.bits) &&
                !rows_overlap(scratch.base_row, width, dest.base_row, dest.bits),
            "cma: scratch overlaps an operand");
    // NOT(b) into scratch; zero-extended source bits invert to ones, so
    // the complement is correct at full width.
    for (int i = 0; i < width; ++i) {
        rowpair_bool(BoolOp::Not, src_row(b, i), 0, scratch.base_row + i, mask);
    }
    SlotFamily notb{scratch.base_row, width, Signedness::Unsigned};
    vector_add(a, notb, dest, width, mask, /*carry_init=*/1);
}

void Cma::copy_operand(const SlotFamily& src, const SlotFamily& dest, int width,
                       const ColumnMask& mask) {
    check_family_dest(dest, width);
    check_family_src(src, width);
    require(!rows_overlap(dest.base_row, width, src.base_row, src.bits),
            "cma: copy source and destination overlap");
    for (int i = 0; i < width; ++i) {
        if (i < src.bits) {
            rowpair_bool(BoolOp::Xor, src.base_row + i, kZerosRow, dest.base_row + i, mask);
        } else {
            // Zero-extension: AND of the constant rows writes a zero bit.
            rowpair_bool(BoolOp::And, kZerosRow, kOnesRow, dest.base_row + i, mask);
        }
    }
}

std::vector<std::uint8_t> Cma::snapshot() const {
    const int bytes_per_row = (geo_.cols + 7) / 8;
    std::vector<std::uint8_t> blob(static_cast<size_t>(bytes_per_row) * geo_.rows, 0);
    for (int r = 0; r < geo_.rows; ++r) {
        for (int c = 0; c < geo_.cols; ++c) {
            if (cell(r, c)) {
                blob[static_cast<size_t>(r) * bytes_per_row + c / 8] |=
                    static_cast<std::uint8_t>(1u << (c % 8));
            }
        }
    }
    return blob;
}

void Cma::restore(std::span<const std::uint8_t> blob) {
    const int bytes_per_row = (geo_.cols + 7) / 8;
    require(blob.size() == static_cast<size_t>(bytes_per_row) * geo_.rows,
            "cma: snapshot size mismatch");
    for (int r = 0; r < geo_.rows; ++r) {
        for (int c = 0; c < geo_.cols; ++c) {
            const std::uint8_t byte = blob[static_cast<size_t>(r) * bytes_per_row + c / 8];
            cells_[static_cast<size_t>(r) * geo_.cols + c] =
                static_cast<std::uint8_t>((byte >> (c % 8)) & 1);
        }
    }
}

}  // namespace fat
