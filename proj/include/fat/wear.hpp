#ifndef FAT_WEAR_HPP
#define FAT_WEAR_HPP

#include <algorithm>
#include <cstdint>
#include <vector>

#include "fat/errors.hpp"

namespace fat {

// Per-cell write counters for endurance accounting. Counters only grow;
// merge adds element-wise (ledgers from distinct CMAs concatenate instead).
struct WearLedger {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint32_t> writes;  // row-major
    std::uint32_t max_single_cell = 0;

    WearLedger() = default;
    WearLedger(int r, int c) : rows(r), cols(c), writes(static_cast<size_t>(r) * c, 0) {}

    void record(int row, int col, std::uint32_t n = 1) {
        auto& w = writes[static_cast<size_t>(row) * cols + col];
        w += n;
        max_single_cell = std::max(max_single_cell, w);
    }

    std::uint32_t at(int row, int col) const {
        return writes[static_cast<size_t>(row) * cols + col];
    }

    void merge(const WearLedger& other) {
        require(rows == other.rows && cols == other.cols, "wear: ledger shape mismatch");
        for (size_t i = 0; i < writes.size(); ++i) writes[i] += other.writes[i];
        max_single_cell = *std::max_element(writes.begin(), writes.end());
    }

    std::uint64_t total() const {
        std::uint64_t t = 0;
        for (auto w : writes) t += w;
        return t;
    }

    bool empty() const {
        return writes.empty() || total() == 0;
    }
};

}  // namespace fat

#endif
