// Img2Col lowering and the dataflow mapping schemes: per-scheme load,
// parallelism, occupancy and step-count closed forms, the grid schedule
// for combined-stationary execution, and endurance accounting.
#ifndef FAT_MAPPING_PLANNER_HPP
#define FAT_MAPPING_PLANNER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fat/tensor.hpp"
#include "fat/wear.hpp"

namespace fat {

struct ConvShape {
    int n = 1;   // batch
    int c = 1;   // input channels
    int h = 1, w = 1;
    int kn = 1;  // filters
    int kh = 1, kw = 1;
    int s = 1;   // stride
    int p = 0;   // zero padding

    int oh() const { return (h + 2 * p - kh) / s + 1; }
    int ow() const { return (w + 2 * p - kw) / s + 1; }
    int out_positions() const { return oh() * ow(); }       // I
    int patch_len() const { return c * kh * kw; }           // J
    void validate() const;
};

struct Img2ColLayout {
    int i = 0;  // oh * ow
    int j = 0;  // c * kh * kw
    Matrix<std::int32_t> ax;  // j rows x (n*i) cols
    Matrix<std::int32_t> aw;  // kn x j, filled by unroll_weights
};

// Gathered activation matrix: column q = (batch, output position),
// row r = (channel, kernel offset); padding reads as zero.
Img2ColLayout img2col(const Tensor<std::int32_t>& x, const ConvShape& shape);
Matrix<std::int32_t> unroll_weights(const Tensor<std::int8_t>& w, const ConvShape& shape);

struct HwConfig {
    int num_cmas = 4096;
    int mw = 256;        // operands per row span (columns)
    int mh = 64;         // operands per column at operand_bits
    int weight_regs = 32;
    int unroll_l = 1;    // filter unrolling factor for combined-stationary
    int operand_bits = 8;
    int acc_bits = 16;

    int mh_eff() const { return mh / 2; }
    void validate() const;
};

enum class Scheme { DirectOS, Img2ColOS, Img2ColIS, Img2ColWS, Img2ColCS };

const char* scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

struct GridAssign {
    int cma = 0;
    int j_block = 0;
    int col_block = 0;
};

struct GridStep {
    std::vector<GridAssign> assigns;
};

struct MappingPlan {
    Scheme scheme = Scheme::Img2ColIS;
    std::int64_t x_data_per_load = 0;
    std::int64_t x_load_times = 0;
    std::int64_t w_data_per_load = 0;
    std::int64_t w_load_times = 0;
    std::int64_t parallel_cols = 0;
    std::int64_t occupied_cmas = 0;
    std::int64_t computing_time_units = 0;
    std::int64_t rows_per_fill = 512;  // rows written per activation load
    // Equals x_load_times except when the stationary tensor does not fit
    // the available CMAs; then activations restream per column block.
    std::int64_t x_load_times_effective = 0;
    double utilization = 0.0;  // fraction of allocated cells holding operands
    std::vector<GridStep> schedule;

    std::string to_json() const;
};

MappingPlan plan(Scheme scheme, const ConvShape& shape, const HwConfig& hw);

// Grid schedule over (J-blocks x column-blocks) sub-arrays; J varies
// fastest so a column's accumulation chain completes early. Steps
// serialize when sub-arrays outnumber CMAs.
std::vector<GridStep> cs_schedule(const ConvShape& shape, const HwConfig& hw);

// Per-column slot assignment under combined-stationary: operand slots
// interleaved with equal-height interval slots, grouped so adjacent
// interval slots pair into accumulator-wide sites.
struct ColumnLayout {
    int operand_slots = 0;
    int interval_slots = 0;
    std::vector<int> operand_base_rows;
    std::vector<int> interval_base_rows;
    std::vector<int> interval_pair_base_rows;  // accumulator-wide sites
};

ColumnLayout layout_with_intervals(int operands_needed, const HwConfig& hw,
                                   int total_rows = 0, int first_row = 0);

// max_single_cell ratio of the fixed-row baseline over the rotating
// layout, from two ledgers of the same workload.
double wear_report(const WearLedger& ledger, const WearLedger& baseline_ledger);

// Slot-granular endurance model: every accumulator write pass lands one
// write, either on a fixed slot (baseline) or on the next interval slot
// round-robin. Used for scheme comparisons and the rotation bound.
class WearModel {
public:
    explicit WearModel(int interval_slots);
    void record_fixed(std::int64_t passes);
    void record_rotating(std::int64_t passes);
    const WearLedger& fixed_ledger() const { return fixed_; }
    const WearLedger& rotating_ledger() const { return rotating_; }

private:
    int slots_;
    std::int64_t cursor_ = 0;
    WearLedger fixed_;
    WearLedger rotating_;
};

// Per-block-fold max single-cell writes for the mapping report: a dense
// mixed-sign fold of `height` operands writes `height` passes, on one
// fixed site for row-stationary accumulators and spread one-per-slot
// under rotation.
std::int64_t wear_max_cell_per_fold(Scheme scheme, const HwConfig& hw);

}  // namespace fat

#endif
