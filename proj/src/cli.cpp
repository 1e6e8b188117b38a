#include <iostream>
#include <ostream>

#include <CLI11.hpp>

#include "fat/errors.hpp"
#include "fat/reporting.hpp"

namespace fat {

namespace {

Calibration calibration_from(const std::string& path) {
    std::string p = path;
    if (p.empty()) {
        if (const char* env = std::getenv("FAT_CALIBRATION")) p = env;
    }
    if (p.empty()) return Calibration{};
    return Calibration::load_file(p);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"fat: in-memory ternary-weight accelerator simulator"};
    app.require_subcommand(1);

    std::string calibration_path;
    app.add_option("--calibration", calibration_path,
                   "calibration JSON (overrides FAT_CALIBRATION)");

    // add-bench
    auto* bench = app.add_subcommand("add-bench", "addition latency comparison");
    int bitwidth = 8;
    std::string kind = "both";
    std::int64_t length = 256;
    std::string out_path;
    bench->add_option("--bitwidth", bitwidth, "operand bitwidth")->check(CLI::Range(1, 64));
    bench->add_option("--kind", kind, "scalar, vector or both")
        ->check(CLI::IsMember({"scalar", "vector", "both"}));
    bench->add_option("--length", length, "vector length");
    bench->add_option("--out", out_path, "write CSV here instead of stdout");

    // map-compare
    auto* mapc = app.add_subcommand("map-compare", "mapping scheme comparison");
    ConvShape shape{5, 128, 28, 28, 256, 3, 3, 2, 1};
    HwConfig hw;
    std::string map_out;
    mapc->add_option("--n", shape.n);
    mapc->add_option("--c", shape.c);
    mapc->add_option("--height", shape.h);
    mapc->add_option("--width", shape.w);
    mapc->add_option("--kn", shape.kn);
    mapc->add_option("--kh", shape.kh);
    mapc->add_option("--kw", shape.kw);
    mapc->add_option("--stride", shape.s);
    mapc->add_option("--pad", shape.p);
    mapc->add_option("--cmas", hw.num_cmas);
    mapc->add_option("--unroll-l", hw.unroll_l);
    mapc->add_option("--out", map_out, "write CSV here instead of stdout");

    // sweep-sparsity
    auto* sweep = app.add_subcommand("sweep-sparsity", "speedup/energy across sparsity");
    double from = 0.0, to = 0.8, step = 0.2;
    std::uint64_t seed = 1;
    std::string sweep_out;
    sweep->add_option("--from", from);
    sweep->add_option("--to", to);
    sweep->add_option("--step", step);
    sweep->add_option("--seed", seed);
    sweep->add_option("--out", sweep_out, "write CSV here instead of stdout");

    // run
    auto* runc = app.add_subcommand("run", "execute a ternary-weight model");
    RunConfig rc;
    runc->add_option("--model", rc.model_path, "model JSON")->required();
    runc->add_option("--input", rc.input_path, "input tensor blob")->required();
    runc->add_option("--hw", rc.hw_path, "hardware config JSON");
    runc->add_option("--scheme", rc.scheme, "img2col-is or img2col-cs");
    runc->add_option("--output", rc.output_path, "output tensor blob path");
    runc->add_option("--report", rc.report_path, "per-layer JSON report path");
    runc->add_option("--seed", rc.seed);

    // trace
    auto* tracec = app.add_subcommand("trace", "dump SACU activation traces");
    RunConfig tc;
    tracec->add_option("--model", tc.model_path, "model JSON")->required();
    tracec->add_option("--input", tc.input_path, "input tensor blob")->required();
    tracec->add_option("--hw", tc.hw_path, "hardware config JSON");
    tracec->add_option("--scheme", tc.scheme, "img2col-is or img2col-cs");
    tracec->add_option("--out", tc.report_path, "JSON-lines output path");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            out << app.help();
            return 0;
        }
        err << "usage error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (bench->parsed()) {
            const Calibration cal = calibration_from(calibration_path);
            const std::string csv = add_bench_csv(bitwidth, kind, length, cal.timing);
            if (out_path.empty()) out << csv;
            else write_text_file(out_path, csv);
            return 0;
        }
        if (mapc->parsed()) {
            const Calibration cal = calibration_from(calibration_path);
            const std::string csv = map_compare_csv(shape, hw, cal);
            if (map_out.empty()) out << csv;
            else write_text_file(map_out, csv);
            return 0;
        }
        if (sweep->parsed()) {
            const Calibration cal = calibration_from(calibration_path);
            const std::string csv = sweep_sparsity_csv(from, to, step, cal, seed);
            if (sweep_out.empty()) out << csv;
            else write_text_file(sweep_out, csv);
            return 0;
        }
        if (runc->parsed()) {
            rc.calibration_path = calibration_path;
            return cmd_run(rc, out);
        }
        if (tracec->parsed()) {
            tc.calibration_path = calibration_path;
            return cmd_trace(tc, out);
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const SimError& e) {
        err << "simulation error: " << e.what() << "\n";
        return 3;
    }
    err << "usage error: no subcommand\n";
    return 1;
}

}  // namespace fat
