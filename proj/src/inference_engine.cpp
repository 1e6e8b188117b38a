#include "fat/inference_engine.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <nlohmann/json.hpp>

#include "fat/errors.hpp"

namespace fat {

using nlohmann::json;

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

}  // namespace

void LayerSpec::validate() const {
    shape.validate();
    require(weights.dims ==
                std::vector<int>({shape.kn, shape.c, shape.kh, shape.kw}),
            "model: weight dims do not match layer shape");
    for (auto v : weights.data) {
        require(v == -1 || v == 0 || v == 1, "model: weights must be ternary");
    }
    if (bn) {
        require(static_cast<int>(bn->mean.size()) == shape.kn &&
                    static_cast<int>(bn->var.size()) == shape.kn,
                "model: batch-norm parameter count must equal filter count");
        for (double v : bn->var) require(v >= 0.0, "model: variance must be non-negative");
        require(std::isfinite(bn->eps) && bn->eps >= 0.0, "model: bad epsilon");
    }
    require(requant_scale > 0.0, "model: requant scale must be positive");
}

void TwnModel::validate() const {
    require(activation_bits >= 1 && activation_bits <= 8, "model: activation bits in [1,8]");
    require(!layers.empty(), "model: no layers");
    for (size_t i = 0; i < layers.size(); ++i) {
        layers[i].validate();
        if (bwn_mode) {
            for (auto v : layers[i].weights.data) {
                require(v != 0, "model: binary mode forbids zero weights");
            }
        }
        if (i + 1 < layers.size()) {
            const ConvShape& a = layers[i].shape;
            const ConvShape& b = layers[i + 1].shape;
            require(b.n == a.n && b.c == a.kn && b.h == a.oh() && b.w == a.ow(),
                    "model: consecutive layer shapes incompatible");
        }
    }
}

Tensor<std::int8_t> ternarize(const Tensor<double>& w, double th_low, double th_high) {
    require(th_low < th_high, "ternarize: thresholds must satisfy low < high");
    Tensor<std::int8_t> out(w.dims);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double v = w.data[i];
        out.data[i] = v > th_high ? 1 : (v < th_low ? -1 : 0);
    }
    return out;
}

QuantizedActivations dpu_apply(const Tensor<std::int32_t>& y, bool relu,
                               const std::optional<BnParams>& bn, double requant_scale,
                               int activation_bits, CostLedger& ledger) {
    require(requant_scale > 0.0, "dpu: requant scale must be positive");
    require(y.dims.size() == 4, "dpu: expected a 4-d tensor");
    const int n = y.dims[0], c = y.dims[1], h = y.dims[2], w = y.dims[3];
    if (bn) {
        require(static_cast<int>(bn->mean.size()) == c, "dpu: batch-norm channel mismatch");
    }
    const std::int64_t qmax = (std::int64_t{1} << activation_bits) - 1;
    QuantizedActivations out;
    out.data = Tensor<std::uint8_t>(y.dims);
    out.scale = requant_scale;
    for (int in = 0; in < n; ++in) {
        for (int ic = 0; ic < c; ++ic) {
            const double mean = bn ? bn->mean[ic] : 0.0;
            const double inv_dev = bn ? 1.0 / std::sqrt(bn->var[ic] + bn->eps) : 1.0;
            for (int iy = 0; iy < h; ++iy) {
                for (int ix = 0; ix < w; ++ix) {
                    double v = static_cast<double>(y.at4(in, ic, iy, ix));
                    if (bn) v = (v - mean) * inv_dev;
                    if (relu && v <= 0.0) v = 0.0;
                    std::int64_t q = std::llround(v / requant_scale);
                    q = std::clamp<std::int64_t>(q, 0, qmax);
                    out.data.at4(in, ic, iy, ix) = static_cast<std::uint8_t>(q);
                }
            }
        }
    }
    ledger.dpu_ops += static_cast<std::int64_t>(y.size());
    return out;
}

Tensor<std::int32_t> reference_convolution(const Tensor<std::int32_t>& x,
                                           const Tensor<std::int8_t>& w,
                                           const ConvShape& shape) {
    shape.validate();
    require(x.dims == std::vector<int>({shape.n, shape.c, shape.h, shape.w}),
            "reference: input dims mismatch");
    require(w.dims == std::vector<int>({shape.kn, shape.c, shape.kh, shape.kw}),
            "reference: weight dims mismatch");
    Tensor<std::int32_t> y({shape.n, shape.kn, shape.oh(), shape.ow()});
    for (int n = 0; n < shape.n; ++n) {
        for (int kn = 0; kn < shape.kn; ++kn) {
            for (int oy = 0; oy < shape.oh(); ++oy) {
                for (int ox = 0; ox < shape.ow(); ++ox) {
                    std::int64_t acc = 0;
                    for (int c = 0; c < shape.c; ++c) {
                        for (int ky = 0; ky < shape.kh; ++ky) {
                            for (int kx = 0; kx < shape.kw; ++kx) {
                                const int iy = oy * shape.s + ky - shape.p;
                                const int ix = ox * shape.s + kx - shape.p;
                                if (iy < 0 || iy >= shape.h || ix < 0 || ix >= shape.w)
                                    continue;
                                acc += static_cast<std::int64_t>(x.at4(n, c, iy, ix)) *
                                       w.at4(kn, c, ky, kx);
                            }
                        }
                    }
                    y.at4(n, kn, oy, ox) = static_cast<std::int32_t>(acc);
                }
            }
        }
    }
    return y;
}

namespace {

// Functional per-column block capacity and slot placement for one scheme.
struct ExecLayout {
    int capacity = 0;                 // operands per column block
    std::vector<int> operand_bases;   // row base per local operand index
    int scratch_base = 0;             // fixed allocator region (row-stationary)
    std::vector<int> pair_bases;      // rotating allocator sites (intervals)
    bool rotating = false;
};

ExecLayout make_exec_layout(Scheme scheme, const HwConfig& hw, const CmaGeometry& geo) {
    ExecLayout ly;
    if (scheme == Scheme::Img2ColCS) {
        HwConfig func = hw;
        func.operand_bits = geo.operand_bits;
        func.acc_bits = geo.acc_bits;
        const ColumnLayout cl = layout_with_intervals(0, func, geo.rows, 2);
        ly.rotating = true;
        ly.pair_bases = cl.interval_pair_base_rows;
        require(static_cast<int>(cl.interval_pair_base_rows.size()) >= 3,
                "engine: geometry too small for interval rotation");
        ly.capacity = std::min(hw.weight_regs, cl.operand_slots);
        ly.operand_bases.assign(cl.operand_base_rows.begin(),
                                cl.operand_base_rows.begin() + ly.capacity);
    } else {
        const int scratch_rows = 4 * geo.acc_bits;
        ly.scratch_base = geo.rows - scratch_rows;
        const int slots = (ly.scratch_base - 2) / geo.operand_bits;
        require(slots >= 1, "engine: geometry too small for operands plus scratch");
        ly.capacity = std::min(hw.weight_regs, slots);
        for (int k = 0; k < ly.capacity; ++k) {
            ly.operand_bases.push_back(2 + k * geo.operand_bits);
        }
    }
    return ly;
}

}  // namespace

LayerResult run_layer(const LayerSpec& layer, const QuantizedActivations& input,
                      const HwConfig& hw, Scheme scheme, bool bwn_mode,
                      const EngineOptions& opts) {
    layer.validate();
    hw.validate();
    require(scheme != Scheme::DirectOS,
            "engine: direct-os is a cost-model-only scheme");
    const ConvShape& shape = layer.shape;
    require(input.data.dims == std::vector<int>({shape.n, shape.c, shape.h, shape.w}),
            "engine: input dims do not match layer shape");

    CmaGeometry geo = opts.geometry;
    geo.validate();

    // Gather and unroll.
    Tensor<std::int32_t> x32({shape.n, shape.c, shape.h, shape.w});
    for (std::size_t i = 0; i < x32.size(); ++i) x32.data[i] = input.data.data[i];
    const Img2ColLayout lay = img2col(x32, shape);
    const Matrix<std::int32_t> aw = unroll_weights(layer.weights, shape);

    LayerResult res;
    res.plan = plan(scheme, shape, hw);

    const ExecLayout exec = make_exec_layout(scheme, hw, geo);
    const int total_cols = shape.n * lay.i;
    const int cols_per_block = std::min(hw.mw, geo.cols);
    const std::int64_t col_blocks = ceil_div(total_cols, cols_per_block);
    const std::int64_t j_blocks = ceil_div(lay.j, exec.capacity);

    // Partials per (filter, output column, j block).
    Matrix<std::int64_t> ay(shape.kn, total_cols);
    std::vector<std::vector<std::int64_t>> chain(
        static_cast<size_t>(shape.kn) * total_cols);

    CostLedger reduce_ledger;
    for (std::int64_t cb = 0; cb < col_blocks; ++cb) {
        const int col0 = static_cast<int>(cb) * cols_per_block;
        const int ncols = std::min(cols_per_block, total_cols - col0);
        const ColumnMask mask = ColumnMask::range(0, ncols);
        for (std::int64_t jb = 0; jb < j_blocks; ++jb) {
            const int j0 = static_cast<int>(jb) * exec.capacity;
            const int nj = std::min<int>(exec.capacity, lay.j - j0);

            Cma cma(geo);
            Sacu sacu(cma);
            std::unique_ptr<AccumAllocator> alloc;
            if (exec.rotating) {
                alloc = std::make_unique<RotatingAllocator>(exec.pair_bases, geo.acc_bits);
            } else {
                alloc = std::make_unique<FixedAllocator>(exec.scratch_base, geo.acc_bits);
            }

            // Load the activation sub-array once.
            std::vector<SlotFamily> operands;
            for (int lj = 0; lj < nj; ++lj) {
                const int base = exec.operand_bases[lj];
                operands.push_back(SlotFamily{base, geo.operand_bits, Signedness::Unsigned});
                for (int lc = 0; lc < ncols; ++lc) {
                    cma.write_operand(OperandSlot{lc, base, geo.operand_bits,
                                                  Signedness::Unsigned},
                                      lay.ax.at(j0 + lj, col0 + lc));
                }
            }

            // All filters visit the resident sub-array; weights reload per filter.
            for (int kn = 0; kn < shape.kn; ++kn) {
                std::vector<int> wslice(static_cast<size_t>(nj));
                for (int lj = 0; lj < nj; ++lj) wslice[lj] = aw.at(kn, j0 + lj);
                sacu.load_weights(wslice, bwn_mode);
                DotProductResult dp = sacu.sparse_dot_product(operands, mask, *alloc,
                                                              opts.collect_traces);
                res.dot_stats.merge(dp.stats);
                if (opts.collect_traces) {
                    for (auto& tr : dp.trace) res.traces.push_back(std::move(tr));
                }
                for (int lc = 0; lc < ncols; ++lc) {
                    const std::int64_t v = cma.read_operand(
                        OperandSlot{lc, dp.result.base_row, geo.acc_bits,
                                    Signedness::TwosComplement});
                    chain[static_cast<size_t>(kn) * total_cols + col0 + lc].push_back(v);
                }
            }
            res.ledger.merge(cma.ledger());
            res.cma_wear.push_back(cma.wear());
        }
    }

    for (int kn = 0; kn < shape.kn; ++kn) {
        for (int q = 0; q < total_cols; ++q) {
            const auto& parts = chain[static_cast<size_t>(kn) * total_cols + q];
            ay.at(kn, q) = reduce_across_cmas(parts, reduce_ledger);
        }
    }
    res.ledger.merge(reduce_ledger);

    res.pre_dpu = Tensor<std::int32_t>({shape.n, shape.kn, shape.oh(), shape.ow()});
    for (int n = 0; n < shape.n; ++n) {
        for (int kn = 0; kn < shape.kn; ++kn) {
            for (int oy = 0; oy < shape.oh(); ++oy) {
                for (int ox = 0; ox < shape.ow(); ++ox) {
                    const int q = n * lay.i + oy * shape.ow() + ox;
                    res.pre_dpu.at4(n, kn, oy, ox) =
                        static_cast<std::int32_t>(ay.at(kn, q));
                }
            }
        }
    }
    res.post_dpu = dpu_apply(res.pre_dpu, layer.relu, layer.bn, layer.requant_scale,
                             opts.activation_bits, res.ledger);
    return res;
}

NetworkResult run_network(const TwnModel& model, const QuantizedActivations& input,
                          const HwConfig& hw, Scheme scheme, const EngineOptions& opts) {
    model.validate();
    NetworkResult net;
    EngineOptions layer_opts = opts;
    layer_opts.activation_bits = model.activation_bits;
    QuantizedActivations acts = input;
    for (const LayerSpec& layer : model.layers) {
        LayerResult lr = run_layer(layer, acts, hw, scheme, model.bwn_mode, layer_opts);
        acts = lr.post_dpu;
        net.total_ledger.merge(lr.ledger);
        net.last_pre_dpu = lr.pre_dpu;
        net.layers.push_back(std::move(lr));
    }
    net.output = acts;
    return net;
}

NetworkResult run_network_reference(const TwnModel& model,
                                    const QuantizedActivations& input) {
    model.validate();
    NetworkResult net;
    QuantizedActivations acts = input;
    for (const LayerSpec& layer : model.layers) {
        Tensor<std::int32_t> x32({layer.shape.n, layer.shape.c, layer.shape.h,
                                  layer.shape.w});
        require(acts.data.dims == x32.dims, "reference: input dims mismatch");
        for (std::size_t i = 0; i < x32.size(); ++i) x32.data[i] = acts.data.data[i];
        LayerResult lr;
        lr.pre_dpu = reference_convolution(x32, layer.weights, layer.shape);
        lr.post_dpu = dpu_apply(lr.pre_dpu, layer.relu, layer.bn, layer.requant_scale,
                                model.activation_bits, lr.ledger);
        acts = lr.post_dpu;
        net.total_ledger.merge(lr.ledger);
        net.last_pre_dpu = lr.pre_dpu;
        net.layers.push_back(std::move(lr));
    }
    net.output = acts;
    return net;
}

// --- model (de)serialization -------------------------------------------

TwnModel TwnModel::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("model: ") + ex.what());
    }
    TwnModel m;
    try {
        m.activation_bits = j.value("activation_bits", 8);
        m.bwn_mode = j.value("bwn_mode", false);
        for (const auto& jl : j.at("layers")) {
            require_config(!jl.contains("bias"), "model: bias terms are not supported");
            LayerSpec layer;
            const std::string type = jl.value("type", "conv");
            if (type == "conv") {
                layer.shape = ConvShape{jl.at("n"), jl.at("c"), jl.at("h"), jl.at("w"),
                                        jl.at("kn"), jl.at("kh"), jl.at("kw"),
                                        jl.value("stride", 1), jl.value("pad", 0)};
            } else if (type == "fc") {
                // A fully connected layer is a 1x1 convolution on a 1x1 grid.
                layer.shape = ConvShape{jl.at("n"), jl.at("in"), 1, 1, jl.at("out"),
                                        1, 1, 1, 0};
            } else {
                throw ConfigError("model: unknown layer type " + type);
            }
            layer.weights = Tensor<std::int8_t>({layer.shape.kn, layer.shape.c,
                                                 layer.shape.kh, layer.shape.kw});
            if (jl.contains("weights_blob")) {
                const auto blob = read_file(jl.at("weights_blob").get<std::string>());
                const auto t = blob_decode_i32(blob);
                require_config(t.size() == layer.weights.size(),
                               "model: weight blob size mismatch");
                for (std::size_t i = 0; i < t.size(); ++i) {
                    layer.weights.data[i] = static_cast<std::int8_t>(t.data[i]);
                }
            } else {
                const auto& wv = jl.at("weights");
                require_config(wv.size() == layer.weights.size(),
                               "model: weight array size mismatch");
                for (std::size_t i = 0; i < layer.weights.size(); ++i) {
                    layer.weights.data[i] = static_cast<std::int8_t>(wv[i].get<int>());
                }
            }
            layer.relu = jl.value("relu", true);
            if (jl.contains("bn")) {
                BnParams bn;
                bn.mean = jl.at("bn").at("mean").get<std::vector<double>>();
                bn.var = jl.at("bn").at("var").get<std::vector<double>>();
                bn.eps = jl.at("bn").value("eps", 1e-5);
                layer.bn = std::move(bn);
            }
            layer.requant_scale = jl.value("requant_scale", 1.0);
            m.layers.push_back(std::move(layer));
        }
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("model: ") + ex.what());
    }
    try {
        m.validate();
    } catch (const SimError& ex) {
        throw ConfigError(ex.what());
    }
    return m;
}

std::string TwnModel::to_json() const {
    json j;
    j["activation_bits"] = activation_bits;
    j["bwn_mode"] = bwn_mode;
    j["layers"] = json::array();
    for (const LayerSpec& l : layers) {
        json jl{{"type", "conv"},   {"n", l.shape.n},   {"c", l.shape.c},
                {"h", l.shape.h},   {"w", l.shape.w},   {"kn", l.shape.kn},
                {"kh", l.shape.kh}, {"kw", l.shape.kw}, {"stride", l.shape.s},
                {"pad", l.shape.p}, {"relu", l.relu},   {"requant_scale", l.requant_scale}};
        jl["weights"] = json::array();
        for (auto v : l.weights.data) jl["weights"].push_back(static_cast<int>(v));
        if (l.bn) {
            jl["bn"] = json{{"mean", l.bn->mean}, {"var", l.bn->var}, {"eps", l.bn->eps}};
        }
        j["layers"].push_back(std::move(jl));
    }
    return j.dump(2);
}

}  // namespace fat
