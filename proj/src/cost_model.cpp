#include "fat/cost_model.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "fat/errors.hpp"
#include "fat/tensor.hpp"

namespace fat {

using nlohmann::json;

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

// Reference layer totals used to back-solve the per-scheme unit times:
// loading follows the row-fill and register-bus models, the remainder of
// each reported layer total is attributed to the computing steps.
struct UnitFit {
    double x_ns, w_ns, total_ns;
    std::int64_t units, dpu_ops;
};

double solve_unit(const UnitFit& f, double dpu_per_elem_ns) {
    return (f.total_ns - f.x_ns - f.w_ns - f.dpu_ops * dpu_per_elem_ns) /
           static_cast<double>(f.units);
}

}  // namespace

TimingParams::TimingParams() {
    const double fill = 512.0 * cell_write_ns;       // one full column-height load
    const double half_fill = 256.0 * cell_write_ns;  // interval layout load
    const double reg = weight_reg_write_ns;
    const std::int64_t dpu_ops = 256LL * 5 * 196;
    // (x load, w load, reported total, step units, dpu elements)
    const UnitFit direct{8 * fill, 5898240 * reg, 71314.0, 4752, dpu_ops};
    const UnitFit os{18 * fill, 1474560 * reg, 60883.0, 1476, dpu_ops};
    const UnitFit is{1 * fill, 1179648 * reg, 14622.0, 20992, dpu_ops};
    const UnitFit ws{18 * fill, 294912 * reg, 60481.0, 410, dpu_ops};
    const UnitFit cs{1 * half_fill, 1179648 * reg / 2, 10400.0, 17408, dpu_ops};
    unit_ns_direct_os = solve_unit(direct, dpu_per_element_ns);
    unit_ns_img2col_os = solve_unit(os, dpu_per_element_ns);
    unit_ns_img2col_is = solve_unit(is, dpu_per_element_ns);
    unit_ns_img2col_ws = solve_unit(ws, dpu_per_element_ns);
    unit_ns_img2col_cs = solve_unit(cs, dpu_per_element_ns);
}

double TimingParams::unit_ns(Scheme s) const {
    switch (s) {
        case Scheme::DirectOS: return unit_ns_direct_os;
        case Scheme::Img2ColOS: return unit_ns_img2col_os;
        case Scheme::Img2ColIS: return unit_ns_img2col_is;
        case Scheme::Img2ColWS: return unit_ns_img2col_ws;
        case Scheme::Img2ColCS: return unit_ns_img2col_cs;
    }
    throw SimError("timing: unknown scheme");
}

const char* add_scheme_name(AddScheme s) {
    switch (s) {
        case AddScheme::FAT: return "fat";
        case AddScheme::STTCiM: return "stt-cim";
        case AddScheme::ParaPIM: return "parapim";
        case AddScheme::GraphS: return "graphs";
    }
    return "?";
}

AddScheme add_scheme_from_name(const std::string& name) {
    if (name == "fat") return AddScheme::FAT;
    if (name == "stt-cim" || name == "sttcim") return AddScheme::STTCiM;
    if (name == "parapim") return AddScheme::ParaPIM;
    if (name == "graphs") return AddScheme::GraphS;
    throw ConfigError("unknown addition scheme: " + name);
}

namespace {

double bit_step_ns(AddScheme scheme, const TimingParams& t) {
    const double rw = t.cell_read_ns + t.cell_write_ns - t.bit_pipeline_overlap_ns;
    switch (scheme) {
        case AddScheme::FAT:
            // Carry stays in the SA latch: one sense, one sum write.
            return rw + t.cp_bit_fat_ns;
        case AddScheme::ParaPIM:
            // Carry written back to cells and sensed again next bit.
            return 2.0 * rw + t.cp_bit_parapim_ns;
        case AddScheme::GraphS:
            return 2.0 * rw + t.cp_bit_graphs_ns;
        case AddScheme::STTCiM:
            throw SimError("timing: one-step scheme has no bit step");
    }
    throw SimError("timing: unknown scheme");
}

double stt_vector_cp(int n_bits, const TimingParams& t) {
    return t.stt_vec_cp_quad_a * n_bits * n_bits + t.stt_vec_cp_quad_b * n_bits;
}

}  // namespace

double scalar_add_latency(AddScheme scheme, int n_bits, const TimingParams& t) {
    require(n_bits >= 1, "timing: bitwidth must be positive");
    if (scheme == AddScheme::STTCiM) {
        return t.stt_base_per_add_ns + (n_bits - 1) * t.stt_carry_stage_ns;
    }
    return n_bits * bit_step_ns(scheme, t);
}

double vector_add_latency(AddScheme scheme, int n_bits, std::int64_t length,
                          std::int64_t available_cols, const TimingParams& t) {
    require(n_bits >= 1 && length >= 1 && available_cols >= 1,
            "timing: bad vector parameters");
    if (scheme == AddScheme::STTCiM) {
        // n sequential one-step adds for an n-bit vector, per occupancy round.
        const double one_round = n_bits * t.stt_base_per_add_ns + stt_vector_cp(n_bits, t);
        return one_round * static_cast<double>(ceil_div(length, available_cols));
    }
    return scalar_add_latency(scheme, n_bits, t) *
           static_cast<double>(ceil_div(length, available_cols));
}

double add_critical_path(AddScheme scheme, int n_bits, bool vector,
                         const TimingParams& t) {
    require(n_bits >= 1, "timing: bitwidth must be positive");
    switch (scheme) {
        case AddScheme::FAT: return n_bits * t.cp_bit_fat_ns;
        case AddScheme::ParaPIM: return n_bits * t.cp_bit_parapim_ns;
        case AddScheme::GraphS: return n_bits * t.cp_bit_graphs_ns;
        case AddScheme::STTCiM:
            return vector ? stt_vector_cp(n_bits, t)
                          : (n_bits - 1) * t.stt_carry_stage_ns;
    }
    throw SimError("timing: unknown scheme");
}

CostLedger closed_form_ledger(const MappingPlan& plan, const ConvShape& shape,
                              const HwConfig& hw) {
    shape.validate();
    CostLedger l;
    const std::int64_t outputs = static_cast<std::int64_t>(shape.kn) * shape.n *
                                 shape.out_positions();
    const std::int64_t adds = outputs * shape.patch_len();
    l.sa_cycles = adds * hw.operand_bits;
    l.cell_writes = plan.x_data_per_load * plan.x_load_times * hw.operand_bits;
    l.reg_loads = plan.w_data_per_load * plan.w_load_times;
    const std::int64_t blocks =
        plan.scheme == Scheme::Img2ColCS
            ? ceil_div(2 * shape.patch_len(), hw.mh)
            : (plan.scheme == Scheme::DirectOS
                   ? ceil_div(shape.c, hw.mh) * shape.kh * shape.kw
                   : ceil_div(shape.patch_len(), hw.mh));
    l.reduce_ops = outputs * blocks;
    l.dpu_ops = outputs;
    return l;
}

LayerCost layer_cost(const CostLedger& ledger, const MappingPlan& plan,
                     const TimingParams& t, const EnergyParams& e) {
    require(ledger.dpu_ops >= 0 && plan.computing_time_units >= 0,
            "cost: ledger/plan mismatch");
    LayerCost c;
    c.x_load_ns = static_cast<double>(plan.x_load_times_effective) *
                  static_cast<double>(plan.rows_per_fill) * t.cell_write_ns;
    // Weight registers fill over a shared bus; half-depth register files
    // load two banks in parallel.
    const double bank = plan.scheme == Scheme::Img2ColCS ? 2.0 : 1.0;
    c.w_load_ns = static_cast<double>(plan.w_data_per_load) *
                  static_cast<double>(plan.w_load_times) * t.weight_reg_write_ns / bank;
    c.compute_ns = static_cast<double>(plan.computing_time_units) * t.unit_ns(plan.scheme);
    c.dpu_ns = static_cast<double>(ledger.dpu_ops) * t.dpu_per_element_ns;
    c.total_ns = c.x_load_ns + c.w_load_ns + c.compute_ns + c.dpu_ns;
    c.energy_j = ledger.sa_cycles * e.sa_cycle_j + ledger.cell_writes * e.cell_write_j +
                 ledger.cell_reads * e.cell_read_j + ledger.reg_loads * e.reg_load_j +
                 ledger.reduce_ops * e.reduce_j + ledger.dpu_ops * e.dpu_j;
    return c;
}

std::pair<double, double> sparsity_speedup(double sparsity, const TimingParams& t,
                                           const EnergyParams& e) {
    require(sparsity >= 0.0 && sparsity < 1.0, "sparsity must be in [0, 1)");
    const double base = bit_step_ns(AddScheme::ParaPIM, t) / bit_step_ns(AddScheme::FAT, t);
    const double speedup = base / (1.0 - sparsity);
    const double energy_eff = base * e.parapim_power_ratio / (1.0 - sparsity);
    return {speedup, energy_eff};
}

// --- calibration (de)serialization ------------------------------------

std::string TimingParams::to_json() const {
    json j{{"cell_read_ns", cell_read_ns},
           {"cell_write_ns", cell_write_ns},
           {"cp_bit_fat_ns", cp_bit_fat_ns},
           {"cp_bit_parapim_ns", cp_bit_parapim_ns},
           {"cp_bit_graphs_ns", cp_bit_graphs_ns},
           {"stt_base_per_add_ns", stt_base_per_add_ns},
           {"stt_carry_stage_ns", stt_carry_stage_ns},
           {"stt_vec_cp_quad_a", stt_vec_cp_quad_a},
           {"stt_vec_cp_quad_b", stt_vec_cp_quad_b},
           {"bit_pipeline_overlap_ns", bit_pipeline_overlap_ns},
           {"weight_reg_write_ns", weight_reg_write_ns},
           {"reduce_transfer_ns", reduce_transfer_ns},
           {"dpu_per_element_ns", dpu_per_element_ns},
           {"unit_ns_direct_os", unit_ns_direct_os},
           {"unit_ns_img2col_os", unit_ns_img2col_os},
           {"unit_ns_img2col_is", unit_ns_img2col_is},
           {"unit_ns_img2col_ws", unit_ns_img2col_ws},
           {"unit_ns_img2col_cs", unit_ns_img2col_cs}};
    return j.dump(2);
}

TimingParams TimingParams::from_json(const std::string& text) {
    TimingParams t;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("calibration: ") + ex.what());
    }
    auto get = [&](const char* key, double& field) {
        if (j.contains(key)) field = j.at(key).get<double>();
    };
    get("cell_read_ns", t.cell_read_ns);
    get("cell_write_ns", t.cell_write_ns);
    get("cp_bit_fat_ns", t.cp_bit_fat_ns);
    get("cp_bit_parapim_ns", t.cp_bit_parapim_ns);
    get("cp_bit_graphs_ns", t.cp_bit_graphs_ns);
    get("stt_base_per_add_ns", t.stt_base_per_add_ns);
    get("stt_carry_stage_ns", t.stt_carry_stage_ns);
    get("stt_vec_cp_quad_a", t.stt_vec_cp_quad_a);
    get("stt_vec_cp_quad_b", t.stt_vec_cp_quad_b);
    get("bit_pipeline_overlap_ns", t.bit_pipeline_overlap_ns);
    get("weight_reg_write_ns", t.weight_reg_write_ns);
    get("reduce_transfer_ns", t.reduce_transfer_ns);
    get("dpu_per_element_ns", t.dpu_per_element_ns);
    get("unit_ns_direct_os", t.unit_ns_direct_os);
    get("unit_ns_img2col_os", t.unit_ns_img2col_os);
    get("unit_ns_img2col_is", t.unit_ns_img2col_is);
    get("unit_ns_img2col_ws", t.unit_ns_img2col_ws);
    get("unit_ns_img2col_cs", t.unit_ns_img2col_cs);
    for (double v : {t.cell_read_ns, t.cell_write_ns, t.cp_bit_fat_ns,
                     t.cp_bit_parapim_ns, t.cp_bit_graphs_ns, t.stt_base_per_add_ns,
                     t.stt_carry_stage_ns, t.weight_reg_write_ns, t.reduce_transfer_ns,
                     t.dpu_per_element_ns}) {
        require_config(v >= 0.0, "calibration: timing values must be non-negative");
    }
    return t;
}

std::string EnergyParams::to_json() const {
    json j{{"sa_cycle_j", sa_cycle_j},
           {"cell_write_j", cell_write_j},
           {"cell_read_j", cell_read_j},
           {"reg_load_j", reg_load_j},
           {"reduce_j", reduce_j},
           {"dpu_j", dpu_j},
           {"parapim_power_ratio", parapim_power_ratio},
           {"parapim_step_ratio", parapim_step_ratio}};
    return j.dump(2);
}

EnergyParams EnergyParams::from_json(const std::string& text) {
    EnergyParams e;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("calibration: ") + ex.what());
    }
    auto get = [&](const char* key, double& field) {
        if (j.contains(key)) field = j.at(key).get<double>();
    };
    get("sa_cycle_j", e.sa_cycle_j);
    get("cell_write_j", e.cell_write_j);
    get("cell_read_j", e.cell_read_j);
    get("reg_load_j", e.reg_load_j);
    get("reduce_j", e.reduce_j);
    get("dpu_j", e.dpu_j);
    get("parapim_power_ratio", e.parapim_power_ratio);
    get("parapim_step_ratio", e.parapim_step_ratio);
    for (double v : {e.sa_cycle_j, e.cell_write_j, e.cell_read_j, e.reg_load_j,
                     e.reduce_j, e.dpu_j, e.parapim_power_ratio, e.parapim_step_ratio}) {
        require_config(v >= 0.0, "calibration: energy values must be non-negative");
    }
    return e;
}

std::string Calibration::to_json() const {
    json j{{"timing", json::parse(timing.to_json())},
           {"energy", json::parse(energy.to_json())}};
    return j.dump(2);
}

Calibration Calibration::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("calibration: ") + ex.what());
    }
    Calibration c;
    if (j.contains("timing")) c.timing = TimingParams::from_json(j.at("timing").dump());
    if (j.contains("energy")) c.energy = EnergyParams::from_json(j.at("energy").dump());
    return c;
}

Calibration Calibration::load_file(const std::string& path) {
    return from_json(read_text_file(path));
}

}  // namespace fat
