#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fat/inference_engine.hpp"
#include "fat/reporting.hpp"

using namespace fat;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("fat_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int cli(const std::vector<std::string>& args, std::string* out_text = nullptr,
        std::string* err_text = nullptr) {
    std::ostringstream out, err;
    const int rc = run_cli(args, out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return rc;
}

void write_toy_model(const std::string& path) {
    TwnModel model;
    ConvShape s1{1, 2, 4, 4, 3, 3, 3, 1, 1};
    Tensor<std::int8_t> w1({3, 2, 3, 3});
    for (std::size_t i = 0; i < w1.size(); ++i) {
        w1.data[i] = static_cast<std::int8_t>(static_cast<int>(i % 3) - 1);
    }
    BnParams bn;
    bn.mean = {0.0, 0.5, 1.0};
    bn.var = {1.0, 2.0, 0.5};
    model.layers.push_back(LayerSpec{s1, w1, true, bn, 2.0});
    ConvShape s2{1, 3, 4, 4, 2, 1, 1, 1, 0};
    Tensor<std::int8_t> w2({2, 3, 1, 1});
    w2.data = {1, 0, -1, -1, 1, 0};
    model.layers.push_back(LayerSpec{s2, w2, true, std::nullopt, 1.0});
    write_text_file(path, model.to_json());
}

void write_toy_input(const std::string& path) {
    Tensor<std::uint8_t> x({1, 2, 4, 4});
    for (std::size_t i = 0; i < x.size(); ++i) {
        x.data[i] = static_cast<std::uint8_t>((i * 37 + 11) % 256);
    }
    write_file(path, blob_encode(x));
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("add-bench defaults reproduce the latency table") {
    std::string out;
    CHECK(cli({"add-bench", "--bitwidth", "8"}, &out) == 0);
    CHECK(out.find("fat,vector,8,1.13,69.13") != std::string::npos);
    CHECK(out.find("stt-cim,scalar,8,0.41,8.91") != std::string::npos);
    CHECK(out.find("parapim,vector,8,2.47,138.47") != std::string::npos);
    CHECK(out.find("graphs,vector,8,1.18,137.18") != std::string::npos);

    CHECK(cli({"add-bench", "--bitwidth", "16", "--kind", "vector"}, &out) == 0);
    CHECK(out.find("fat,vector,16,2.26,138.26") != std::string::npos);
    CHECK(out.find("parapim,vector,16,4.94,276.94") != std::string::npos);

    CHECK(cli({"add-bench", "--bitwidth", "1", "--kind", "vector"}, &out) == 0);
    CHECK(out.find("fat,vector,1,0.14,8.64") != std::string::npos);
}

TEST_CASE("add-bench rejects bad flags with a usage error") {
    std::string err;
    CHECK(cli({"add-bench", "--bitwidth", "0"}, nullptr, &err) == 1);
    CHECK(cli({"add-bench", "--kind", "sideways"}, nullptr, &err) == 1);
    CHECK(cli({"no-such-command"}, nullptr, &err) == 1);
    CHECK(!err.empty());
}

TEST_CASE("map-compare default layer emits the comparison table") {
    std::string out;
    CHECK(cli({"map-compare"}, &out) == 0);
    CHECK(out.find("img2col-cs") != std::string::npos);
    CHECK(out.find(",6.86,") != std::string::npos);   // combined-stationary speedup
    CHECK(out.find(",4.88,") != std::string::npos);   // input-stationary speedup
    CHECK(out.find(",64x") != std::string::npos);
    CHECK(out.find(",1x") != std::string::npos);
    CHECK(out.find("128,256") != std::string::npos);  // strided parallel columns
}

TEST_CASE("sweep-sparsity emits closed-form and simulated columns that agree") {
    std::string out;
    CHECK(cli({"sweep-sparsity", "--from", "0.0", "--to", "0.8", "--step", "0.4",
               "--seed", "3"},
              &out) == 0);
    std::istringstream is(out);
    std::string line;
    int data_lines = 0;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 's') continue;
        ++data_lines;
        double sp, sc, ec, ss, es;
        int ver;
        char comma;
        std::istringstream ls(line);
        ls >> sp >> comma >> sc >> comma >> ec >> comma >> ss >> comma >> es >>
            comma >> ver;
        CHECK(ver == 1);
        CHECK(std::abs(ss - sc) / sc < 0.02);
        CHECK(std::abs(es - ec) / ec < 0.02);
    }
    CHECK(data_lines == 3);
    CHECK(cli({"sweep-sparsity", "--from", "0.5", "--to", "0.2"}) == 2);
}

TEST_CASE("reports are byte-identical across runs") {
    std::string a, b;
    CHECK(cli({"map-compare"}, &a) == 0);
    CHECK(cli({"map-compare"}, &b) == 0);
    CHECK(a == b);
    CHECK(cli({"sweep-sparsity", "--seed", "9"}, &a) == 0);
    CHECK(cli({"sweep-sparsity", "--seed", "9"}, &b) == 0);
    CHECK(a == b);
}

TEST_CASE("run executes a model end to end and verifies") {
    TempDir dir;
    write_toy_model(dir.file("model.json"));
    write_toy_input(dir.file("input.fatb"));
    std::string out;
    const int rc = cli({"run", "--model", dir.file("model.json"), "--input",
                        dir.file("input.fatb"), "--scheme", "img2col-cs", "--output",
                        dir.file("out.fatb"), "--report", dir.file("report.json")},
                       &out);
    CHECK(rc == 0);
    CHECK(out.find("verification: PASS") != std::string::npos);
    // Output blob decodes to the reference pipeline's output.
    const auto got = blob_decode_u8(read_file(dir.file("out.fatb")));
    const TwnModel model = TwnModel::from_json(read_text_file(dir.file("model.json")));
    QuantizedActivations input;
    input.data = blob_decode_u8(read_file(dir.file("input.fatb")));
    const NetworkResult ref = run_network_reference(model, input);
    CHECK(got.data == ref.output.data.data);
    // Report carries plan and ledger fields.
    const std::string rep = read_text_file(dir.file("report.json"));
    CHECK(rep.find("\"verification\": \"PASS\"") != std::string::npos);
    CHECK(rep.find("\"sa_cycles\"") != std::string::npos);
    CHECK(rep.find("\"skipped_rows\"") != std::string::npos);
}

TEST_CASE("run rejects the cost-only scheme and corrupt inputs") {
    TempDir dir;
    write_toy_model(dir.file("model.json"));
    write_toy_input(dir.file("input.fatb"));
    std::string err;
    CHECK(cli({"run", "--model", dir.file("model.json"), "--input",
               dir.file("input.fatb"), "--scheme", "direct-os"},
              nullptr, &err) == 2);
    CHECK(err.find("cost-model-only") != std::string::npos);

    write_text_file(dir.file("broken.json"), "{\"layers\": [");
    CHECK(cli({"run", "--model", dir.file("broken.json"), "--input",
               dir.file("input.fatb")},
              nullptr, &err) == 2);
    CHECK(cli({"run", "--model", dir.file("model.json")}, nullptr, &err) == 1);
    CHECK(cli({"run", "--model", dir.file("model.json"), "--input",
               dir.file("missing.fatb")},
              nullptr, &err) == 2);
}

TEST_CASE("trace dumps one JSON line per accumulation pass") {
    TempDir dir;
    write_toy_model(dir.file("model.json"));
    write_toy_input(dir.file("input.fatb"));
    std::string out;
    CHECK(cli({"trace", "--model", dir.file("model.json"), "--input",
               dir.file("input.fatb"), "--scheme", "img2col-is"},
              &out) == 0);
    CHECK(out.find("\"stage\":1") != std::string::npos);
    CHECK(out.find("\"op\":\"add\"") != std::string::npos);
    std::istringstream is(out);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        CHECK(line.front() == '{');
        CHECK(line.back() == '}');
        CHECK(line.find("\"layer\":") != std::string::npos);
    }
}

TEST_CASE("calibration file override via flag") {
    TempDir dir;
    Calibration cal;
    cal.timing.cp_bit_fat_ns = 10.0;  // absurd value, easy to spot
    write_text_file(dir.file("cal.json"), cal.to_json());
    std::string out;
    CHECK(cli({"--calibration", dir.file("cal.json"), "add-bench", "--kind",
               "scalar", "--bitwidth", "8"},
              &out) == 0);
    CHECK(out.find("fat,scalar,8,80.00,148.00") != std::string::npos);
    CHECK(cli({"--calibration", dir.file("nope.json"), "add-bench"}, nullptr) == 2);
}

}  // TEST_SUITE
