#include "fat/sparse_control.hpp"

#include <algorithm>
#include <sstream>

#include "fat/errors.hpp"

namespace fat {

TernaryWeightCode encode_weight(int w) {
    switch (w) {
        case 1: return {0, 1};
        case 0: return {0, 0};
        case -1: return {1, 1};
        default: throw SimError("sacu: weight must be -1, 0 or +1");
    }
}

TernaryWeightCode extend_binary_weight(int w) {
    require(w == 1 || w == -1, "sacu: binary weight must be -1 or +1");
    return encode_weight(w);
}

void WeightRegisterFile::load(std::span<const int> weights, bool bwn_mode,
                              CostLedger& ledger) {
    require(static_cast<int>(weights.size()) <= capacity,
            "sacu: weight register file capacity exceeded");
    codes.clear();
    codes.reserve(weights.size());
    for (int w : weights) {
        codes.push_back(bwn_mode ? extend_binary_weight(w) : encode_weight(w));
    }
    ledger.reg_loads += static_cast<std::int64_t>(weights.size());
}

std::string TraceRecord::to_json_line() const {
    std::ostringstream os;
    os << "{\"stage\":" << stage << ",\"rows\":[";
    for (size_t i = 0; i < rows.size(); ++i) {
        if (i) os << ',';
        os << rows[i];
    }
    os << "],\"op\":\"" << op << "\"}";
    return os.str();
}

FixedAllocator::FixedAllocator(int base_row, int acc_bits) {
    for (int i = 0; i < 4; ++i) {
        slots_.push_back(SlotFamily{base_row + i * acc_bits, acc_bits,
                                    Signedness::TwosComplement});
    }
}

SlotFamily FixedAllocator::next() {
    // Scan from the front so writes concentrate on the lowest free slots.
    for (const auto& s : slots_) {
        bool live = false;
        for (int b : live_) {
            if (b == s.base_row) { live = true; break; }
        }
        if (!live) return s;
    }
    throw SimError("sacu: fixed scratch exhausted");
}

RotatingAllocator::RotatingAllocator(std::vector<int> pair_base_rows, int acc_bits)
    : pair_base_rows_(std::move(pair_base_rows)), acc_bits_(acc_bits) {
    require(pair_base_rows_.size() >= 3,
            "sacu: interval rotation needs at least three accumulator pairs");
}

SlotFamily RotatingAllocator::next() {
    const int n = static_cast<int>(pair_base_rows_.size());
    for (int tries = 0; tries < n; ++tries) {
        const int base = pair_base_rows_[cursor_ % n];
        cursor_ = (cursor_ + 1) % n;
        bool live = false;
        for (int b : live_) {
            if (b == base) { live = true; break; }
        }
        if (!live) return SlotFamily{base, acc_bits_, Signedness::TwosComplement};
    }
    throw SimError("sacu: all interval pairs live");
}

void Sacu::load_weights(std::span<const int> weights, bool bwn_mode) {
    regs_.load(weights, bwn_mode, cma_->ledger());
}

DotProductResult Sacu::sparse_dot_product(const std::vector<SlotFamily>& operands,
                                          const ColumnMask& mask,
                                          AccumAllocator& alloc,
                                          bool collect_trace) {
    require(operands.size() == static_cast<size_t>(regs_.size()),
            "sacu: operand count does not match loaded weights");
    const int width = cma_->geometry().acc_bits;

    std::vector<int> plus_rows, minus_rows;
    for (int i = 0; i < regs_.size(); ++i) {
        const TernaryWeightCode& code = regs_.codes[i];
        if (!code.activates()) continue;
        (code.is_subtract() ? minus_rows : plus_rows).push_back(i);
    }

    DotProductResult res;
    res.stats.skipped_rows = regs_.size() - static_cast<int>(plus_rows.size()) -
                             static_cast<int>(minus_rows.size());
    res.stats.row_activations =
        static_cast<std::int64_t>(plus_rows.size() + minus_rows.size());

    auto trace = [&](int stage, std::vector<int> rows, const char* op) {
        if (collect_trace) res.trace.push_back(TraceRecord{stage, std::move(rows), op});
    };

    // Left fold of one sign group into a fresh accumulator per pass.
    auto fold = [&](const std::vector<int>& rows, int stage,
                    std::vector<int>& live) -> SlotFamily {
        if (rows.size() == 1) {
            alloc.set_live(live);
            const SlotFamily dest = alloc.next();
            cma_->copy_operand(operands[rows[0]], dest, width, mask);
            res.stats.copy_passes += 1;
            trace(stage, {rows[0]}, "copy");
            live.push_back(dest.base_row);
            return dest;
        }
        alloc.set_live(live);
        SlotFamily acc = alloc.next();
        cma_->vector_add(operands[rows[0]], operands[rows[1]], acc, width, mask);
        res.stats.add_passes += 1;
        trace(stage, {rows[0], rows[1]}, "add");
        live.push_back(acc.base_row);
        for (size_t k = 2; k < rows.size(); ++k) {
            alloc.set_live(live);
            const SlotFamily dest = alloc.next();
            cma_->vector_add(acc, operands[rows[k]], dest, width, mask);
            res.stats.add_passes += 1;
            trace(stage, {rows[k]}, "add");
            // The previous accumulator is dead once the new one is written.
            live.back() = dest.base_row;
            acc = dest;
        }
        return acc;
    };

    std::vector<int> live;
    SlotFamily partial_plus{}, partial_minus{};
    bool has_plus = !plus_rows.empty();
    bool has_minus = !minus_rows.empty();
    if (has_plus) partial_plus = fold(plus_rows, 1, live);
    if (has_minus) partial_minus = fold(minus_rows, 2, live);

    if (!has_plus && !has_minus) {
        alloc.set_live(live);
        res.result = alloc.next();
        cma_->copy_operand(SlotFamily::zero(), res.result, width, mask);
        res.stats.copy_passes += 1;
        trace(3, {}, "zero");
    } else if (!has_minus) {
        res.result = partial_plus;  // fold already left it in place
    } else {
        // result = P - M (with P = 0 when there were no plus weights),
        // as NOT(M) into scratch then add with carry-in 1.
        alloc.set_live(live);
        const SlotFamily scratch = alloc.next();
        live.push_back(scratch.base_row);
        alloc.set_live(live);
        const SlotFamily dest = alloc.next();
        const SlotFamily lhs = has_plus ? partial_plus : SlotFamily::zero();
        cma_->vector_sub(lhs, partial_minus, dest, scratch, width, mask);
        res.stats.sub_passes += 1;
        trace(3, {}, "not");
        trace(3, {}, "sub_add");
        res.result = dest;
    }
    return res;
}

std::int64_t reduce_across_cmas(std::span<const std::int64_t> partials,
                                CostLedger& ledger) {
    std::int64_t sum = 0;
    for (std::int64_t p : partials) sum += p;  // index ascending
    ledger.reduce_ops += static_cast<std::int64_t>(partials.size());
    return sum;
}

std::int64_t dot_product_passes(int p, int m) {
    auto fold_passes = [](int k) { return k == 0 ? 0 : (k == 1 ? 1 : k - 1); };
    std::int64_t passes = fold_passes(p) + fold_passes(m);
    if (m > 0) passes += 2;  // NOT pass plus carry-initialized add
    if (p == 0 && m == 0) passes += 1;
    return passes;
}

}  // namespace fat
