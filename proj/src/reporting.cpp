#include "fat/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fat/errors.hpp"

namespace fat {

using nlohmann::json;

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

std::string hash_header(const std::string& kind, const std::string& config,
                        const Calibration& cal) {
    std::ostringstream os;
    os << "# fat " << kind << " report\n";
    os << "# config_hash=" << std::hex << std::setw(16) << std::setfill('0')
       << fnv1a64(config) << "\n";
    os << "# calibration_hash=" << std::setw(16) << std::setfill('0')
       << fnv1a64(cal.to_json()) << std::dec << "\n";
    return os.str();
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(prec) << v;
    return os.str();
}

HwConfig load_hw(const std::string& path) {
    if (path.empty()) return HwConfig{};
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("hw: ") + ex.what());
    }
    HwConfig hw;
    hw.num_cmas = j.value("num_cmas", hw.num_cmas);
    hw.mw = j.value("mw", hw.mw);
    hw.mh = j.value("mh", hw.mh);
    hw.weight_regs = j.value("weight_regs", hw.weight_regs);
    hw.unroll_l = j.value("unroll_l", hw.unroll_l);
    hw.operand_bits = j.value("operand_bits", hw.operand_bits);
    hw.acc_bits = j.value("acc_bits", hw.acc_bits);
    hw.validate();
    return hw;
}

Calibration load_calibration(const std::string& explicit_path) {
    std::string path = explicit_path;
    if (path.empty()) {
        if (const char* env = std::getenv("FAT_CALIBRATION")) path = env;
    }
    if (path.empty()) return Calibration{};
    return Calibration::load_file(path);
}

}  // namespace

std::string add_bench_csv(int bitwidth, const std::string& kind, std::int64_t length,
                          const TimingParams& t) {
    require_config(kind == "scalar" || kind == "vector" || kind == "both",
                   "add-bench: kind must be scalar, vector or both");
    Calibration cal;
    cal.timing = t;
    std::ostringstream os;
    os << hash_header("add-bench",
                      "bitwidth=" + std::to_string(bitwidth) + ",kind=" + kind +
                          ",length=" + std::to_string(length),
                      cal);
    os << "scheme,kind,bitwidth,critical_path_ns,latency_ns\n";
    for (AddScheme s : {AddScheme::STTCiM, AddScheme::ParaPIM, AddScheme::GraphS,
                        AddScheme::FAT}) {
        if (kind != "vector") {
            os << add_scheme_name(s) << ",scalar," << bitwidth << ','
               << fmt(add_critical_path(s, bitwidth, false, t), 2) << ','
               << fmt(scalar_add_latency(s, bitwidth, t), 2) << '\n';
        }
        if (kind != "scalar") {
            os << add_scheme_name(s) << ",vector," << bitwidth << ','
               << fmt(add_critical_path(s, bitwidth, true, t), 2) << ','
               << fmt(vector_add_latency(s, bitwidth, length, 256, t), 2) << '\n';
        }
    }
    return os.str();
}

std::vector<MapCompareRow> map_compare(const ConvShape& shape, const HwConfig& hw,
                                       const Calibration& cal) {
    shape.validate();
    hw.validate();
    std::vector<MapCompareRow> rows;
    for (Scheme s : {Scheme::DirectOS, Scheme::Img2ColOS, Scheme::Img2ColIS,
                     Scheme::Img2ColWS, Scheme::Img2ColCS}) {
        MapCompareRow row;
        row.scheme = s;
        row.plan = plan(s, shape, hw);
        const CostLedger ledger = closed_form_ledger(row.plan, shape, hw);
        row.cost = layer_cost(ledger, row.plan, cal.timing, cal.energy);
        row.max_cell_write = wear_max_cell_per_fold(s, hw);
        rows.push_back(std::move(row));
    }
    const double base_time = rows.front().cost.total_ns;
    const double base_energy = rows.front().cost.energy_j;
    for (auto& row : rows) {
        row.speedup = base_time / row.cost.total_ns;
        row.energy_ratio = row.cost.energy_j / base_energy;
    }
    return rows;
}

std::string map_compare_csv(const ConvShape& shape, const HwConfig& hw,
                            const Calibration& cal) {
    const auto rows = map_compare(shape, hw, cal);
    std::ostringstream cfg;
    cfg << shape.n << 'x' << shape.c << 'x' << shape.h << 'x' << shape.w << ",kn"
        << shape.kn << ",k" << shape.kh << 'x' << shape.kw << ",s" << shape.s << ",p"
        << shape.p << ",cmas" << hw.num_cmas;
    std::ostringstream os;
    os << hash_header("map-compare", cfg.str(), cal);
    os << "scheme,cmas,x_load_time_ns,x_writes,w_load_time_ns,w_writes,"
          "parallel_cols,total_cols,utilization_pct,time_ns,speedup,"
          "energy_j,energy_ratio_pct,max_single_cell_write\n";
    for (const auto& r : rows) {
        os << scheme_name(r.scheme) << ',' << hw.num_cmas << ','
           << fmt(r.cost.x_load_ns, 1) << ','
           << r.plan.x_data_per_load * r.plan.x_load_times << ','
           << fmt(r.cost.w_load_ns, 1) << ','
           << r.plan.w_data_per_load * r.plan.w_load_times << ','
           << r.plan.parallel_cols << ',' << hw.mw << ','
           << fmt(100.0 * r.plan.utilization, 2) << ',' << fmt(r.cost.total_ns, 1)
           << ',' << fmt(r.speedup, 2) << ',' << fmt(r.cost.energy_j, 3) << ','
           << fmt(100.0 * r.energy_ratio, 1) << ',' << r.max_cell_write << "x\n";
    }
    return os.str();
}

SparsityPoint sweep_point(double sparsity, const Calibration& cal, std::uint64_t seed,
                          int j_len, int block) {
    require(sparsity >= 0.0 && sparsity < 1.0, "sweep: sparsity must be in [0, 1)");
    SparsityPoint pt;
    pt.sparsity = sparsity;
    std::tie(pt.speedup_closed, pt.energy_closed) =
        sparsity_speedup(sparsity, cal.timing, cal.energy);

    // Synthetic layer: one output column accumulated over j_len weighted
    // operands, in register-depth blocks. Nonzeros spread evenly across
    // blocks, split between the sign groups, placed by a seeded shuffle.
    const int blocks = (j_len + block - 1) / block;
    const std::int64_t nnz_total = std::llround((1.0 - sparsity) * j_len);
    std::mt19937_64 rng(seed ^ 0x5eed5eedULL);

    CmaGeometry geo;
    Cma cma(geo);
    Sacu sacu(cma);
    FixedAllocator alloc(geo.rows - 4 * geo.acc_bits, geo.acc_bits);
    const ColumnMask mask = ColumnMask::single(0);
    std::vector<SlotFamily> operands;
    std::vector<OperandSlot> slots;
    for (int k = 0; k < block; ++k) {
        operands.push_back(SlotFamily{2 + k * geo.operand_bits, geo.operand_bits,
                                      Signedness::Unsigned});
        slots.push_back(OperandSlot{0, 2 + k * geo.operand_bits, geo.operand_bits,
                                    Signedness::Unsigned});
    }

    DotProductStats fat_stats;
    std::int64_t parapim_passes = 0;
    std::int64_t expected = 0, simulated = 0;
    std::int64_t assigned = 0;
    for (int b = 0; b < blocks; ++b) {
        const int rows_here = std::min(block, j_len - b * block);
        // Even spread, remainder front-loaded.
        std::int64_t quota = nnz_total * (b + 1) / blocks - assigned;
        quota = std::min<std::int64_t>(quota, rows_here);
        assigned += quota;
        const int p = static_cast<int>((quota + 1) / 2);
        const int m = static_cast<int>(quota / 2);
        std::vector<int> w(rows_here, 0);
        for (int i = 0; i < p; ++i) w[i] = 1;
        for (int i = 0; i < m; ++i) w[p + i] = -1;
        std::shuffle(w.begin(), w.end(), rng);

        std::uniform_int_distribution<int> dist(0, 255);
        std::vector<int> x(rows_here);
        for (int i = 0; i < rows_here; ++i) {
            x[i] = dist(rng);
            cma.write_operand(slots[i], x[i]);
            expected += static_cast<std::int64_t>(w[i]) * x[i];
        }
        std::vector<SlotFamily> ops(operands.begin(), operands.begin() + rows_here);
        sacu.load_weights(w);
        const DotProductResult dp = sacu.sparse_dot_product(ops, mask, alloc);
        fat_stats.merge(dp.stats);
        simulated += cma.read_operand(OperandSlot{0, dp.result.base_row, geo.acc_bits,
                                                  Signedness::TwosComplement});
        // The dense baseline activates every row: the zero codes join the
        // plus group, so each block costs a full-height fold.
        const int zeros = rows_here - p - m;
        parapim_passes += dot_product_passes(p + zeros, m);
    }
    pt.sim_verified = simulated == expected;

    const double fat_pass_ns = geo.acc_bits * cal.timing.fat_bit_step_ns();
    const double para_bit_ns =
        2.0 * (cal.timing.cell_read_ns + cal.timing.cell_write_ns) +
        cal.timing.cp_bit_parapim_ns;
    const double para_pass_ns = geo.acc_bits * para_bit_ns;
    const double fat_ns = static_cast<double>(fat_stats.total_passes()) * fat_pass_ns;
    const double para_ns = static_cast<double>(parapim_passes) * para_pass_ns;
    pt.speedup_sim = para_ns / fat_ns;
    pt.energy_sim = para_ns * cal.energy.parapim_power_ratio / fat_ns;
    return pt;
}

std::string sweep_sparsity_csv(double from, double to, double step,
                               const Calibration& cal, std::uint64_t seed) {
    require_config(from >= 0.0 && from <= to && to < 1.0 && step > 0.0,
                   "sweep: range must satisfy 0 <= from <= to < 1 with positive step");
    std::ostringstream os;
    os << hash_header("sweep-sparsity",
                      fmt(from) + ":" + fmt(to) + ":" + fmt(step) + ",seed=" +
                          std::to_string(seed),
                      cal);
    os << "sparsity,speedup_closed,energy_eff_closed,speedup_sim,energy_eff_sim,"
          "sim_verified\n";
    for (double s = from; s <= to + 1e-12; s += step) {
        const SparsityPoint pt = sweep_point(std::min(s, to), cal, seed);
        os << fmt(pt.sparsity, 2) << ',' << fmt(pt.speedup_closed, 4) << ','
           << fmt(pt.energy_closed, 4) << ',' << fmt(pt.speedup_sim, 4) << ','
           << fmt(pt.energy_sim, 4) << ',' << (pt.sim_verified ? 1 : 0) << '\n';
    }
    return os.str();
}

namespace {

TwnModel load_model(const std::string& path) {
    return TwnModel::from_json(read_text_file(path));
}

QuantizedActivations load_input(const std::string& path) {
    QuantizedActivations acts;
    acts.data = blob_decode_u8(read_file(path));
    require_config(acts.data.dims.size() == 4, "input: expected a 4-d tensor blob");
    return acts;
}

}  // namespace

int cmd_run(const RunConfig& cfg, std::ostream& out) {
    const TwnModel model = load_model(cfg.model_path);
    const QuantizedActivations input = load_input(cfg.input_path);
    const HwConfig hw = load_hw(cfg.hw_path);
    const Calibration cal = load_calibration(cfg.calibration_path);
    const Scheme scheme = scheme_from_name(cfg.scheme);
    require_config(scheme != Scheme::DirectOS,
                   "run: direct-os is a cost-model-only scheme; choose an img2col scheme");

    const NetworkResult net = run_network(model, input, hw, scheme);
    const NetworkResult ref = run_network_reference(model, input);

    bool ok = net.last_pre_dpu.data == ref.last_pre_dpu.data &&
              net.output.data.data == ref.output.data.data;
    for (size_t i = 0; ok && i < net.layers.size(); ++i) {
        ok = net.layers[i].pre_dpu.data == ref.layers[i].pre_dpu.data;
    }

    if (!cfg.output_path.empty()) {
        write_file(cfg.output_path, blob_encode(net.output.data));
    }
    if (!cfg.report_path.empty()) {
        json rep;
        rep["scheme"] = scheme_name(scheme);
        rep["seed"] = cfg.seed;
        rep["verification"] = ok ? "PASS" : "FAIL";
        rep["layers"] = json::array();
        for (size_t i = 0; i < net.layers.size(); ++i) {
            const LayerResult& lr = net.layers[i];
            const CostLedger cl = closed_form_ledger(
                lr.plan, model.layers[i].shape, hw);
            const LayerCost cost = layer_cost(cl, lr.plan, cal.timing, cal.energy);
            json jl;
            jl["plan"] = json::parse(lr.plan.to_json());
            jl["estimated_time_ns"] = cost.total_ns;
            jl["estimated_energy_j"] = cost.energy_j;
            jl["ledger"] = {{"row_activations", lr.ledger.row_activations},
                            {"sa_cycles", lr.ledger.sa_cycles},
                            {"cell_writes", lr.ledger.cell_writes},
                            {"cell_reads", lr.ledger.cell_reads},
                            {"reg_loads", lr.ledger.reg_loads},
                            {"reduce_ops", lr.ledger.reduce_ops},
                            {"dpu_ops", lr.ledger.dpu_ops}};
            jl["dot_stats"] = {{"row_activations", lr.dot_stats.row_activations},
                               {"add_passes", lr.dot_stats.add_passes},
                               {"sub_passes", lr.dot_stats.sub_passes},
                               {"copy_passes", lr.dot_stats.copy_passes},
                               {"skipped_rows", lr.dot_stats.skipped_rows}};
            rep["layers"].push_back(std::move(jl));
        }
        write_text_file(cfg.report_path, rep.dump(2) + "\n");
    }
    out << "verification: " << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? 0 : 3;
}

int cmd_trace(const RunConfig& cfg, std::ostream& out) {
    const TwnModel model = load_model(cfg.model_path);
    const QuantizedActivations input = load_input(cfg.input_path);
    const HwConfig hw = load_hw(cfg.hw_path);
    const Scheme scheme = scheme_from_name(cfg.scheme);
    require_config(scheme != Scheme::DirectOS, "trace: direct-os has no execution path");
    EngineOptions opts;
    opts.collect_traces = true;
    const NetworkResult net = run_network(model, input, hw, scheme, opts);
    std::ostringstream lines;
    for (size_t li = 0; li < net.layers.size(); ++li) {
        for (const TraceRecord& tr : net.layers[li].traces) {
            lines << "{\"layer\":" << li << ",\"stage\":" << tr.stage << ",\"rows\":[";
            for (size_t i = 0; i < tr.rows.size(); ++i) {
                if (i) lines << ',';
                lines << tr.rows[i];
            }
            lines << "],\"op\":\"" << tr.op << "\"}\n";
        }
    }
    if (!cfg.report_path.empty()) {
        write_text_file(cfg.report_path, lines.str());
    } else {
        out << lines.str();
    }
    return 0;
}

}  // namespace fat
