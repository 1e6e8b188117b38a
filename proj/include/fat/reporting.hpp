// Report emitters (CSV for tables, JSON for machine consumption) and the
// command-line drivers behind the fat tool's subcommands.
#ifndef FAT_REPORTING_HPP
#define FAT_REPORTING_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fat/cost_model.hpp"
#include "fat/inference_engine.hpp"

namespace fat {

std::uint64_t fnv1a64(const std::string& s);

// Addition latency comparison across the four SA schemes.
std::string add_bench_csv(int bitwidth, const std::string& kind, std::int64_t length,
                          const TimingParams& t);

struct MapCompareRow {
    Scheme scheme;
    MappingPlan plan;
    LayerCost cost;
    double speedup = 0;
    double energy_ratio = 0;
    std::int64_t max_cell_write = 0;  // per block fold, relative units
};

std::vector<MapCompareRow> map_compare(const ConvShape& shape, const HwConfig& hw,
                                       const Calibration& cal);
std::string map_compare_csv(const ConvShape& shape, const HwConfig& hw,
                            const Calibration& cal);

struct SparsityPoint {
    double sparsity = 0;
    double speedup_closed = 0;
    double energy_closed = 0;
    double speedup_sim = 0;
    double energy_sim = 0;
    bool sim_verified = false;  // block results matched the integer oracle
};

// Closed form plus a synthetic-layer simulation: a J-long dot product in
// blocks of the register depth, executed on a real CMA with stratified
// random ternary weights; the baseline pays a dense pass per row.
SparsityPoint sweep_point(double sparsity, const Calibration& cal, std::uint64_t seed,
                          int j_len = 4096, int block = 32);
std::string sweep_sparsity_csv(double from, double to, double step,
                               const Calibration& cal, std::uint64_t seed);

struct RunConfig {
    std::string model_path;
    std::string input_path;
    std::string hw_path;          // optional
    std::string calibration_path; // optional
    std::string output_path;      // tensor blob
    std::string report_path;      // per-layer JSON
    std::string scheme = "img2col-cs";
    std::uint64_t seed = 0;
};

// Executes run_network and writes outputs; returns the process exit code
// and prints the verification line to `out`.
int cmd_run(const RunConfig& cfg, std::ostream& out);

// Dumps SACU activation traces as JSON lines.
int cmd_trace(const RunConfig& cfg, std::ostream& out);

// Full CLI entry: parses argv-style arguments, dispatches, returns the
// exit code (0 ok, 1 usage, 2 config/parse, 3 simulation invariant).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fat

#endif
