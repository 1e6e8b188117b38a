// End-to-end ternary-weight network execution on simulated CMAs:
// load activations, load weight codes, sparse dot products per column,
// cross-CMA reduction, then the digital ReLU/BN/requantization unit.
#ifndef FAT_INFERENCE_ENGINE_HPP
#define FAT_INFERENCE_ENGINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "fat/cost_model.hpp"
#include "fat/mapping_planner.hpp"
#include "fat/memory_array.hpp"
#include "fat/sparse_control.hpp"
#include "fat/tensor.hpp"

namespace fat {

struct BnParams {
    std::vector<double> mean;
    std::vector<double> var;
    double eps = 1e-5;
};

struct LayerSpec {
    ConvShape shape;
    Tensor<std::int8_t> weights;  // ternary, [kn][c][kh][kw]
    bool relu = true;
    std::optional<BnParams> bn;
    double requant_scale = 1.0;

    void validate() const;
};

struct TwnModel {
    int activation_bits = 8;
    bool bwn_mode = false;
    std::vector<LayerSpec> layers;

    void validate() const;
    static TwnModel from_json(const std::string& text);
    std::string to_json() const;
};

struct QuantizedActivations {
    Tensor<std::uint8_t> data;  // [n][c][h][w]
    double scale = 1.0;
};

// +1 above th_high, -1 below th_low, 0 otherwise (strict comparisons).
Tensor<std::int8_t> ternarize(const Tensor<double>& w, double th_low, double th_high);

// BN in real arithmetic, then ReLU, then clamp(round(v / scale)) into
// activation_bits unsigned. Rounds half away from zero.
QuantizedActivations dpu_apply(const Tensor<std::int32_t>& y, bool relu,
                               const std::optional<BnParams>& bn, double requant_scale,
                               int activation_bits, CostLedger& ledger);

// Direct triple-loop integer convolution; the oracle for the array path.
Tensor<std::int32_t> reference_convolution(const Tensor<std::int32_t>& x,
                                           const Tensor<std::int8_t>& w,
                                           const ConvShape& shape);

struct EngineOptions {
    bool collect_traces = false;
    int activation_bits = 8;
    CmaGeometry geometry;
};

struct LayerResult {
    Tensor<std::int32_t> pre_dpu;  // [n][kn][oh][ow]
    QuantizedActivations post_dpu;
    CostLedger ledger;
    DotProductStats dot_stats;
    MappingPlan plan;
    std::vector<WearLedger> cma_wear;  // one per executed sub-array
    std::vector<TraceRecord> traces;
};

LayerResult run_layer(const LayerSpec& layer, const QuantizedActivations& input,
                      const HwConfig& hw, Scheme scheme, bool bwn_mode = false,
                      const EngineOptions& opts = {});

struct NetworkResult {
    QuantizedActivations output;
    Tensor<std::int32_t> last_pre_dpu;
    CostLedger total_ledger;
    std::vector<LayerResult> layers;
};

NetworkResult run_network(const TwnModel& model, const QuantizedActivations& input,
                          const HwConfig& hw, Scheme scheme,
                          const EngineOptions& opts = {});

// Reference pipeline (direct convolution plus the same DPU), for
// end-to-end verification of the array path.
NetworkResult run_network_reference(const TwnModel& model,
                                    const QuantizedActivations& input);

}  // namespace fat

#endif
