#include <doctest.h>

#include <random>
#include <set>

#include "fat/errors.hpp"
#include "fat/inference_engine.hpp"
#include "fat/mapping_planner.hpp"

using namespace fat;

namespace {

ConvShape layer10() { return ConvShape{5, 128, 28, 28, 256, 3, 3, 2, 1}; }

Tensor<std::int32_t> random_acts(const ConvShape& s, std::mt19937& rng) {
    Tensor<std::int32_t> x({s.n, s.c, s.h, s.w});
    std::uniform_int_distribution<int> dist(0, 255);
    for (auto& v : x.data) v = dist(rng);
    return x;
}

Tensor<std::int8_t> random_weights(const ConvShape& s, std::mt19937& rng) {
    Tensor<std::int8_t> w({s.kn, s.c, s.kh, s.kw});
    std::uniform_int_distribution<int> dist(-1, 1);
    for (auto& v : w.data) v = static_cast<std::int8_t>(dist(rng));
    return w;
}

}  // namespace

TEST_SUITE("mapping_planner") {

TEST_CASE("img2col gathers patches, direct gather oracle") {
    // 1x1x3x3 input, 2x2 kernel, stride 1, no padding: I = 4, J = 4.
    ConvShape s{1, 1, 3, 3, 1, 2, 2, 1, 0};
    Tensor<std::int32_t> x({1, 1, 3, 3});
    for (int i = 0; i < 9; ++i) x.data[i] = i + 1;
    const Img2ColLayout lay = img2col(x, s);
    CHECK(lay.i == 4);
    CHECK(lay.j == 4);
    // Column 0 is the top-left 2x2 patch (1,2,4,5) in kernel offset order.
    CHECK(lay.ax.at(0, 0) == 1);
    CHECK(lay.ax.at(1, 0) == 2);
    CHECK(lay.ax.at(2, 0) == 4);
    CHECK(lay.ax.at(3, 0) == 5);
    // Column 3 is the bottom-right patch.
    CHECK(lay.ax.at(0, 3) == 5);
    CHECK(lay.ax.at(3, 3) == 9);
}

TEST_CASE("1x1 kernel makes img2col the identity gather") {
    ConvShape s{1, 3, 4, 4, 2, 1, 1, 1, 0};
    std::mt19937 rng(3);
    const Tensor<std::int32_t> x = random_acts(s, rng);
    const Img2ColLayout lay = img2col(x, s);
    CHECK(lay.j == 3);
    CHECK(lay.i == 16);
    for (int c = 0; c < 3; ++c) {
        for (int q = 0; q < 16; ++q) {
            CHECK(lay.ax.at(c, q) == x.data[c * 16 + q]);
        }
    }
}

TEST_CASE("img2col padding reads as zero") {
    ConvShape s{1, 1, 2, 2, 1, 3, 3, 1, 1};
    Tensor<std::int32_t> x({1, 1, 2, 2});
    x.data = {1, 2, 3, 4};
    const Img2ColLayout lay = img2col(x, s);
    CHECK(lay.i == 2 * 2);
    // Output (0,0): kernel offset (0,0) reads the padded corner.
    CHECK(lay.ax.at(0, 0) == 0);
    CHECK(lay.ax.at(4, 0) == 1);  // center tap reads x[0][0]
}

TEST_CASE("layer-10 shape produces I=196, J=1152") {
    const ConvShape s = layer10();
    CHECK(s.oh() == 14);
    CHECK(s.ow() == 14);
    CHECK(s.out_positions() == 196);
    CHECK(s.patch_len() == 1152);
}

TEST_CASE("GEMM equivalence with direct convolution on random shapes") {
    std::mt19937 rng(17);
    const ConvShape shapes[] = {
        {1, 2, 5, 5, 3, 3, 3, 1, 0},
        {2, 3, 6, 6, 2, 3, 3, 2, 1},
        {1, 4, 7, 5, 2, 1, 1, 1, 0},
        {2, 1, 4, 4, 1, 2, 2, 2, 0},
        {1, 3, 8, 8, 4, 3, 3, 1, 1},
    };
    for (const ConvShape& s : shapes) {
        const auto x = random_acts(s, rng);
        const auto w = random_weights(s, rng);
        const auto y = reference_convolution(x, w, s);
        const Img2ColLayout lay = img2col(x, s);
        const auto aw = unroll_weights(w, s);
        for (int n = 0; n < s.n; ++n) {
            for (int kn = 0; kn < s.kn; ++kn) {
                for (int q = 0; q < lay.i; ++q) {
                    std::int64_t acc = 0;
                    for (int r = 0; r < lay.j; ++r) {
                        acc += static_cast<std::int64_t>(aw.at(kn, r)) *
                               lay.ax.at(r, n * lay.i + q);
                    }
                    CHECK(acc == y.data[(static_cast<std::size_t>(n) * s.kn + kn) *
                                            lay.i + q]);
                }
            }
        }
    }
}

TEST_CASE("invalid shapes are rejected") {
    CHECK_THROWS_AS((ConvShape{1, 1, 2, 2, 1, 3, 3, 1, 0}).validate(), SimError);
    CHECK_THROWS_AS((ConvShape{0, 1, 4, 4, 1, 1, 1, 1, 0}).validate(), SimError);
    Tensor<std::int32_t> x({1, 1, 4, 4});
    CHECK_THROWS_AS(img2col(x, ConvShape{1, 2, 4, 4, 1, 1, 1, 1, 0}), SimError);
}

TEST_CASE("plan fills the closed forms for the layer-10 shape") {
    const ConvShape s = layer10();
    const HwConfig hw;
    const MappingPlan is = plan(Scheme::Img2ColIS, s, hw);
    CHECK(is.parallel_cols == 256);
    CHECK(is.x_load_times == 1);
    CHECK(is.w_load_times == 256);
    CHECK(is.occupied_cmas == 72);  // 18 J blocks x 4 column blocks
    CHECK(is.computing_time_units == 20992);

    const MappingPlan cs = plan(Scheme::Img2ColCS, s, hw);
    CHECK(cs.computing_time_units == 17408);
    CHECK(cs.occupied_cmas == 144);
    CHECK(cs.parallel_cols == 256);
    CHECK(static_cast<double>(cs.computing_time_units) / is.computing_time_units ==
          doctest::Approx(0.829).epsilon(0.001));

    const MappingPlan d = plan(Scheme::DirectOS, s, hw);
    CHECK(d.parallel_cols == 128);
    CHECK(d.occupied_cmas == 1280);
    CHECK(d.computing_time_units == 4752);

    const MappingPlan os = plan(Scheme::Img2ColOS, s, hw);
    CHECK(os.parallel_cols == 196);
    CHECK(os.computing_time_units == 1476);

    const MappingPlan ws = plan(Scheme::Img2ColWS, s, hw);
    CHECK(ws.parallel_cols == 196);
    CHECK(ws.occupied_cmas == 4608);
    CHECK(ws.computing_time_units == 410);
    CHECK(ws.x_load_times == 5);
    // Stationary weights exceed the fabric, so activations restream.
    CHECK(ws.x_load_times_effective == 18);
}

TEST_CASE("plan fields are integral with ceiling discipline") {
    const ConvShape s{1, 5, 9, 9, 3, 2, 2, 2, 0};  // nothing divides evenly
    const HwConfig hw{16, 8, 4, 32, 1, 8, 16};
    for (Scheme sc : {Scheme::DirectOS, Scheme::Img2ColOS, Scheme::Img2ColIS,
                      Scheme::Img2ColWS, Scheme::Img2ColCS}) {
        const MappingPlan p = plan(sc, s, hw);
        CHECK(p.x_load_times >= 1);
        CHECK(p.w_load_times >= 1);
        CHECK(p.occupied_cmas >= 1);
        CHECK(p.computing_time_units >= 1);
    }
    // I = 4x4 = 16, J = 20: IS occupied = ceil(20/4) * ceil(16/8) = 10.
    CHECK(plan(Scheme::Img2ColIS, s, hw).occupied_cmas == 10);
    // CS: ceil(40/4) = 10 J blocks x 2 col blocks.
    CHECK(plan(Scheme::Img2ColCS, s, hw).occupied_cmas == 20);
}

TEST_CASE("degenerate 1x1x1x1 layer occupies one CMA under every scheme") {
    const ConvShape s{1, 1, 1, 1, 1, 1, 1, 1, 0};
    const HwConfig hw;
    for (Scheme sc : {Scheme::DirectOS, Scheme::Img2ColOS, Scheme::Img2ColIS,
                      Scheme::Img2ColWS, Scheme::Img2ColCS}) {
        CHECK(plan(sc, s, hw).occupied_cmas == 1);
    }
}

TEST_CASE("register capacity overflow is rejected") {
    const ConvShape s{1, 100, 4, 4, 1, 3, 3, 1, 1};  // J = 900
    HwConfig hw;
    hw.num_cmas = 4;
    hw.weight_regs = 2;
    hw.unroll_l = 1;
    // J = 900 > 2 regs x 4 CMAs x kn(=1) loads.
    CHECK_THROWS_AS(plan(Scheme::Img2ColIS, s, hw), SimError);
}

TEST_CASE("cs_schedule step counts match the CMA budget") {
    // 16 sub-arrays: J blocks x column blocks = 4 x 4.
    ConvShape s{1, 16, 16, 16, 1, 1, 1, 1, 0};  // J = 16, I = 256
    HwConfig hw;
    hw.mh = 8;   // mh_eff = 4 -> 4 J blocks
    hw.mw = 64;  // 256/64 = 4 column blocks
    hw.num_cmas = 8;
    CHECK(cs_schedule(s, hw).size() == 2);
    hw.num_cmas = 3;
    CHECK(cs_schedule(s, hw).size() == 6);
    hw.num_cmas = 16;
    CHECK(cs_schedule(s, hw).size() == 1);
    hw.num_cmas = 17;
    CHECK(cs_schedule(s, hw).size() == 1);
}

TEST_CASE("cs_schedule covers every sub-array exactly once, J fastest") {
    ConvShape s{1, 10, 6, 6, 1, 1, 1, 1, 0};  // J = 10, I = 36
    HwConfig hw;
    hw.mh = 4;   // mh_eff = 2 -> 5 J blocks
    hw.mw = 16;  // ceil(36/16) = 3 column blocks
    hw.num_cmas = 4;
    const auto steps = cs_schedule(s, hw);
    std::set<std::pair<int, int>> seen;
    int previous_col_block = 0;
    for (const auto& step : steps) {
        CHECK(step.assigns.size() <= 4);
        for (const auto& a : step.assigns) {
            CHECK(seen.insert({a.j_block, a.col_block}).second);
            CHECK(a.col_block >= previous_col_block);
            previous_col_block = a.col_block;
        }
    }
    CHECK(seen.size() == 15);
    // First step covers the whole J chain of column block 0 first.
    CHECK(steps[0].assigns[0].j_block == 0);
    CHECK(steps[0].assigns[1].j_block == 1);
    CHECK(steps[0].assigns[0].col_block == 0);
    CHECK(steps[0].assigns[3].col_block == 0);
}

TEST_CASE("interval layout: 512 rows at 8-bit make 32+32 slots") {
    const HwConfig hw;
    const ColumnLayout ly = layout_with_intervals(32, hw);
    CHECK(ly.operand_slots == 32);
    CHECK(ly.interval_slots == 32);
    CHECK(ly.interval_pair_base_rows.size() == 16);
    // Interval pairs are contiguous accumulator-wide row ranges.
    for (size_t i = 0; i < ly.interval_pair_base_rows.size(); ++i) {
        CHECK(ly.interval_pair_base_rows[i] == static_cast<int>(16 + 32 * i));
    }
    CHECK_THROWS_AS(layout_with_intervals(33, hw), SimError);
}

TEST_CASE("wear model: rotation spreads what the fixed slot concentrates") {
    WearModel model(32);
    // 32 identical dot products, 32 passes each.
    for (int i = 0; i < 32; ++i) {
        model.record_fixed(32);
        model.record_rotating(32);
    }
    CHECK(model.fixed_ledger().max_single_cell == 32 * 32);
    CHECK(model.rotating_ledger().max_single_cell == 32);
    CHECK(wear_report(model.rotating_ledger(), model.fixed_ledger()) == 32.0);
}

TEST_CASE("wear report examples") {
    // Single one-pass dot product on each side: nothing to level yet.
    WearModel single(32);
    single.record_fixed(1);
    single.record_rotating(1);
    CHECK(wear_report(single.rotating_ledger(), single.fixed_ledger()) == 1.0);

    // Layer-10-shaped aggregate: 256 filter folds per column, 64-operand
    // blocks against 32-operand rotating blocks.
    WearModel layer(32);
    for (int f = 0; f < 256; ++f) {
        layer.record_fixed(64);
        layer.record_rotating(32);
    }
    CHECK(layer.fixed_ledger().max_single_cell == 256 * 64);
    CHECK(layer.rotating_ledger().max_single_cell == 256);
    CHECK(wear_report(layer.rotating_ledger(), layer.fixed_ledger()) == 64.0);

    WearLedger empty(1, 1);
    CHECK_THROWS_AS(wear_report(empty, empty), SimError);
}

TEST_CASE("per-fold wear column is 64x for fixed rows and 1x rotating") {
    const HwConfig hw;
    CHECK(wear_max_cell_per_fold(Scheme::DirectOS, hw) == 64);
    CHECK(wear_max_cell_per_fold(Scheme::Img2ColOS, hw) == 64);
    CHECK(wear_max_cell_per_fold(Scheme::Img2ColIS, hw) == 64);
    CHECK(wear_max_cell_per_fold(Scheme::Img2ColWS, hw) == 64);
    CHECK(wear_max_cell_per_fold(Scheme::Img2ColCS, hw) == 1);
}

TEST_CASE("rotation wear bound with uneven pass counts") {
    // Random per-dot-product pass counts; round-robin keeps every slot
    // within one pass of the mean.
    std::mt19937 rng(4);
    std::uniform_int_distribution<int> dist(1, 40);
    WearModel model(32);
    std::int64_t total = 0;
    for (int i = 0; i < 100; ++i) {
        const int passes = dist(rng);
        model.record_rotating(passes);
        total += passes;
    }
    const auto& ledger = model.rotating_ledger();
    const std::int64_t bound = (total + 31) / 32 + 1;
    CHECK(ledger.max_single_cell <= bound);
    CHECK(ledger.total() == static_cast<std::uint64_t>(total));
}

TEST_CASE("plan serializes to JSON with all formula fields") {
    const MappingPlan p = plan(Scheme::Img2ColIS, layer10(), HwConfig{});
    const std::string j = p.to_json();
    CHECK(j.find("\"scheme\":\"img2col-is\"") != std::string::npos);
    CHECK(j.find("\"computing_time_units\":20992") != std::string::npos);
    CHECK(j.find("\"parallel_cols\":256") != std::string::npos);
}

}  // TEST_SUITE
