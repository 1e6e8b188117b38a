#include "fat/mapping_planner.hpp"

#include <algorithm>
#include <sstream>

#include "fat/errors.hpp"

namespace fat {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

}  // namespace

void ConvShape::validate() const {
    require(n >= 1 && c >= 1 && h >= 1 && w >= 1 && kn >= 1 && kh >= 1 && kw >= 1 &&
                s >= 1 && p >= 0,
            "conv: dimensions must be positive (padding may be zero)");
    require(h + 2 * p >= kh && w + 2 * p >= kw, "conv: kernel larger than padded input");
}

void HwConfig::validate() const {
    require_config(num_cmas >= 1 && mw >= 1 && mh >= 2 && weight_regs >= 1 &&
                       unroll_l >= 1 && operand_bits >= 1 && acc_bits >= operand_bits,
                   "hw: invalid configuration");
    require_config(mh % 2 == 0, "hw: mh must be even for interval layouts");
}

Img2ColLayout img2col(const Tensor<std::int32_t>& x, const ConvShape& shape) {
    shape.validate();
    require(x.dims == std::vector<int>({shape.n, shape.c, shape.h, shape.w}),
            "img2col: tensor dims do not match shape");
    Img2ColLayout out;
    out.i = shape.out_positions();
    out.j = shape.patch_len();
    out.ax = Matrix<std::int32_t>(out.j, shape.n * out.i);
    for (int n = 0; n < shape.n; ++n) {
        for (int oy = 0; oy < shape.oh(); ++oy) {
            for (int ox = 0; ox < shape.ow(); ++ox) {
                const int q = n * out.i + oy * shape.ow() + ox;
                for (int c = 0; c < shape.c; ++c) {
                    for (int ky = 0; ky < shape.kh; ++ky) {
                        for (int kx = 0; kx < shape.kw; ++kx) {
                            const int r = (c * shape.kh + ky) * shape.kw + kx;
                            const int iy = oy * shape.s + ky - shape.p;
                            const int ix = ox * shape.s + kx - shape.p;
                            std::int32_t v = 0;
                            if (iy >= 0 && iy < shape.h && ix >= 0 && ix < shape.w) {
                                v = x.at4(n, c, iy, ix);
                            }
                            out.ax.at(r, q) = v;
                        }
                    }
                }
            }
        }
    }
    return out;
}

Matrix<std::int32_t> unroll_weights(const Tensor<std::int8_t>& w, const ConvShape& shape) {
    require(w.dims == std::vector<int>({shape.kn, shape.c, shape.kh, shape.kw}),
            "unroll: weight dims do not match shape");
    Matrix<std::int32_t> aw(shape.kn, shape.patch_len());
    for (int kn = 0; kn < shape.kn; ++kn) {
        for (int c = 0; c < shape.c; ++c) {
            for (int ky = 0; ky < shape.kh; ++ky) {
                for (int kx = 0; kx < shape.kw; ++kx) {
                    aw.at(kn, (c * shape.kh + ky) * shape.kw + kx) = w.at4(kn, c, ky, kx);
                }
            }
        }
    }
    return aw;
}

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::DirectOS: return "direct-os";
        case Scheme::Img2ColOS: return "img2col-os";
        case Scheme::Img2ColIS: return "img2col-is";
        case Scheme::Img2ColWS: return "img2col-ws";
        case Scheme::Img2ColCS: return "img2col-cs";
    }
    return "?";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "direct-os") return Scheme::DirectOS;
    if (name == "img2col-os" || name == "os") return Scheme::Img2ColOS;
    if (name == "img2col-is" || name == "is") return Scheme::Img2ColIS;
    if (name == "img2col-ws" || name == "ws") return Scheme::Img2ColWS;
    if (name == "img2col-cs" || name == "cs") return Scheme::Img2ColCS;
    throw ConfigError("unknown mapping scheme: " + name);
}

std::vector<GridStep> cs_schedule(const ConvShape& shape, const HwConfig& hw) {
    shape.validate();
    hw.validate();
    const std::int64_t j_blocks = ceil_div(shape.patch_len(), hw.mh_eff());
    const std::int64_t col_blocks =
        ceil_div(static_cast<std::int64_t>(shape.n) * shape.out_positions(), hw.mw);
    std::vector<GridStep> steps;
    GridStep cur;
    int cma = 0;
    // J varies fastest: a column block's accumulation chain is resident
    // together, so its partials reduce without reloading activations.
    for (std::int64_t cb = 0; cb < col_blocks; ++cb) {
        for (std::int64_t jb = 0; jb < j_blocks; ++jb) {
            if (cma == hw.num_cmas) {
                steps.push_back(std::move(cur));
                cur = GridStep{};
                cma = 0;
            }
            cur.assigns.push_back(GridAssign{cma, static_cast<int>(jb),
                                             static_cast<int>(cb)});
            ++cma;
        }
    }
    if (!cur.assigns.empty()) steps.push_back(std::move(cur));
    return steps;
}

MappingPlan plan(Scheme scheme, const ConvShape& shape, const HwConfig& hw) {
    shape.validate();
    hw.validate();
    const std::int64_t n = shape.n, c = shape.c, kn = shape.kn;
    const std::int64_t hw_spatial = static_cast<std::int64_t>(shape.h) * shape.w;
    const std::int64_t I = shape.out_positions();
    const std::int64_t J = shape.patch_len();
    const std::int64_t mw = hw.mw, mh = hw.mh, mh_eff = hw.mh_eff();
    const std::int64_t L = hw.unroll_l;

    require(J <= static_cast<std::int64_t>(hw.weight_regs) * hw.num_cmas * kn,
            "plan: patch length exceeds total weight register capacity times schedule length");

    MappingPlan mp;
    mp.scheme = scheme;
    mp.rows_per_fill = (scheme == Scheme::Img2ColCS ? mh_eff : mh) * hw.operand_bits;
    switch (scheme) {
        case Scheme::DirectOS: {
            const std::int64_t loads = ceil_div(c, mh) * ceil_div(hw_spatial, mw);
            mp.x_data_per_load = kn * n * mh * mw;
            mp.x_load_times = loads;
            mp.w_data_per_load = kn * n * mh;
            mp.w_load_times = ceil_div(c, mh) * shape.kh * ceil_div(hw_spatial, mw) * shape.kw;
            mp.parallel_cols = std::min(ceil_div(mw, shape.s), ceil_div(hw_spatial, shape.s));
            mp.occupied_cmas = kn * n;
            mp.computing_time_units = loads * shape.kh * shape.kw * (mh + ceil_div(c, mh));
            mp.utilization = static_cast<double>(hw_spatial) /
                             static_cast<double>(ceil_div(hw_spatial, mw) * mw);
            break;
        }
        case Scheme::Img2ColOS: {
            const std::int64_t loads = ceil_div(J, mh) * ceil_div(I, mw);
            mp.x_data_per_load = kn * n * mh * mw;
            mp.x_load_times = loads;
            mp.w_data_per_load = kn * n * mh;
            mp.w_load_times = loads;
            mp.parallel_cols = std::min(mw, I);
            mp.occupied_cmas = kn * n;
            mp.computing_time_units = loads * (mh + ceil_div(J, mh));
            mp.utilization = static_cast<double>(I) /
                             static_cast<double>(ceil_div(I, mw) * mw);
            break;
        }
        case Scheme::Img2ColIS: {
            mp.x_data_per_load = n * I * J;
            mp.x_load_times = 1;
            mp.w_data_per_load = ceil_div(n * I, mw) * J;
            mp.w_load_times = kn;
            mp.parallel_cols = std::min(mw, n * I);
            mp.occupied_cmas = ceil_div(J, mh) * ceil_div(n * I, mw);
            mp.computing_time_units = kn * (mh + ceil_div(J, mh));
            mp.utilization = static_cast<double>(n * I) /
                             static_cast<double>(ceil_div(n * I, mw) * mw);
            break;
        }
        case Scheme::Img2ColWS: {
            mp.x_data_per_load = kn * J * mw;
            mp.x_load_times = n * ceil_div(I, mw);
            mp.w_data_per_load = kn * J;
            mp.w_load_times = 1;
            mp.parallel_cols = std::min(mw, I);
            mp.occupied_cmas = ceil_div(J, mh) * kn;
            mp.computing_time_units = n * ceil_div(I, mw) * (mh + ceil_div(J, mh));
            mp.utilization = static_cast<double>(I) /
                             static_cast<double>(ceil_div(I, mw) * mw);
            break;
        }
        case Scheme::Img2ColCS: {
            mp.x_data_per_load = L * n * I * J;
            mp.x_load_times = 1;
            mp.w_data_per_load = L * ceil_div(n * I, mw) * J;
            mp.w_load_times = ceil_div(kn, L);
            mp.parallel_cols = std::min(mw, n * I);
            mp.occupied_cmas = ceil_div(2 * J, mh) * ceil_div(n * I, mw) * L;
            mp.computing_time_units = ceil_div(kn * (mh_eff + ceil_div(2 * J, mh)), L);
            // Half of every occupied column stores reserved intervals.
            mp.utilization = 0.5 * static_cast<double>(n * I) /
                             static_cast<double>(ceil_div(n * I, mw) * mw);
            mp.schedule = cs_schedule(shape, hw);
            break;
        }
    }
    if (scheme == Scheme::Img2ColIS) {
        // Same grid decomposition as combined-stationary but with
        // full-height blocks; used by the execution engine.
        HwConfig full = hw;
        full.mh = 2 * hw.mh;  // so mh_eff == hw.mh
        mp.schedule = cs_schedule(shape, full);
    }
    mp.x_load_times_effective = mp.x_load_times;
    if (scheme == Scheme::Img2ColWS && mp.occupied_cmas > hw.num_cmas) {
        // Weights cannot all stay resident, so the activation tiles
        // restream once per (J block, column block) as under the
        // output-stationary flow.
        mp.x_load_times_effective = ceil_div(J, mh) * ceil_div(I, mw);
    }
    return mp;
}

ColumnLayout layout_with_intervals(int operands_needed, const HwConfig& hw,
                                   int total_rows, int first_row) {
    hw.validate();
    if (total_rows == 0) total_rows = hw.mh * hw.operand_bits;
    const int slot = hw.operand_bits;
    const int group = 4 * slot;  // two operand slots plus one interval pair
    const int groups = (total_rows - first_row) / group;
    ColumnLayout out;
    for (int g = 0; g < groups; ++g) {
        const int base = first_row + g * group;
        out.operand_base_rows.push_back(base);
        out.operand_base_rows.push_back(base + slot);
        out.interval_base_rows.push_back(base + 2 * slot);
        out.interval_base_rows.push_back(base + 3 * slot);
        out.interval_pair_base_rows.push_back(base + 2 * slot);
    }
    out.operand_slots = static_cast<int>(out.operand_base_rows.size());
    out.interval_slots = static_cast<int>(out.interval_base_rows.size());
    require(operands_needed <= out.operand_slots,
            "layout: sub-array taller than the interval layout allows");
    return out;
}

double wear_report(const WearLedger& ledger, const WearLedger& baseline_ledger) {
    require(!ledger.empty() && !baseline_ledger.empty(), "wear: empty ledger");
    return static_cast<double>(baseline_ledger.max_single_cell) /
           static_cast<double>(ledger.max_single_cell);
}

WearModel::WearModel(int interval_slots)
    : slots_(interval_slots), fixed_(1, 1), rotating_(1, interval_slots) {
    require(interval_slots >= 1, "wear: need at least one interval slot");
}

void WearModel::record_fixed(std::int64_t passes) {
    fixed_.record(0, 0, static_cast<std::uint32_t>(passes));
}

void WearModel::record_rotating(std::int64_t passes) {
    for (std::int64_t i = 0; i < passes; ++i) {
        rotating_.record(0, static_cast<int>(cursor_ % slots_));
        ++cursor_;
    }
}

std::int64_t wear_max_cell_per_fold(Scheme scheme, const HwConfig& hw) {
    if (scheme == Scheme::Img2ColCS) {
        // mh_eff passes walk mh_eff interval slots: one write per cell.
        return 1;
    }
    // A dense mixed-sign fold of mh operands issues mh accumulator passes
    // onto the same fixed rows.
    return hw.mh;
}

std::string MappingPlan::to_json() const {
    std::ostringstream os;
    os << "{\"scheme\":\"" << scheme_name(scheme) << "\""
       << ",\"x_data_per_load\":" << x_data_per_load
       << ",\"x_load_times\":" << x_load_times
       << ",\"w_data_per_load\":" << w_data_per_load
       << ",\"w_load_times\":" << w_load_times
       << ",\"parallel_cols\":" << parallel_cols
       << ",\"occupied_cmas\":" << occupied_cmas
       << ",\"computing_time_units\":" << computing_time_units
       << ",\"utilization\":" << utilization
       << ",\"schedule_steps\":" << schedule.size() << "}";
    return os.str();
}

}  // namespace fat
