#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "rsmt/net_model.hpp"

namespace rsmt {

enum class Activation : std::uint8_t { Elu, Sigmoid };
enum class HeadCombine : std::uint8_t { Concatenate, Average };

inline constexpr double kLeakySlope = 0.2;
inline constexpr double kSigmoidClamp = 30.0;

struct LayerShape {
    int in_dim = 0;
    int out_dim = 0;
    int heads = 1;
    Activation activation = Activation::Elu;
    HeadCombine combine = HeadCombine::Concatenate;

    friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

// One graph attention layer. Head h owns kernel columns
// [h * out_dim, (h + 1) * out_dim) and row h of the attention/bias matrices.
struct GatLayerParams {
    int in_dim = 0;
    int out_dim = 0;
    int heads = 1;
    Activation activation = Activation::Elu;
    HeadCombine combine = HeadCombine::Concatenate;

    Matrix kernel;         // in_dim x (heads * out_dim)
    Matrix attention_src;  // heads x out_dim, scores the receiving node
    Matrix attention_dst;  // heads x out_dim, scores the neighbor
    Matrix bias;           // heads x out_dim

    static GatLayerParams zeros(int in_dim, int out_dim, int heads, Activation activation, HeadCombine combine);

    int output_dim() const { return combine == HeadCombine::Concatenate ? heads * out_dim : out_dim; }
    LayerShape shape() const { return {in_dim, out_dim, heads, activation, combine}; }
    void validate() const;

    std::array<Matrix*, 4> tensors() { return {&kernel, &attention_src, &attention_dst, &bias}; }
    std::array<const Matrix*, 4> tensors() const { return {&kernel, &attention_src, &attention_dst, &bias}; }

    friend bool operator==(const GatLayerParams&, const GatLayerParams&) = default;
};

struct ModelDefaults {
    static constexpr int input_dim = kFeatureDim;
    static constexpr int hidden_channels = 2;
    static constexpr int hidden_heads = 8;
    static constexpr double attention_dropout = 0.225;
    static constexpr double layer_dropout = 0.0;
};

struct ModelParams {
    GatLayerParams layer1;
    GatLayerParams layer2;
    double attention_dropout_rate = ModelDefaults::attention_dropout;
    double layer_dropout_rate = ModelDefaults::layer_dropout;

    // 3 -> 2 channels x 8 heads (ELU, concatenated) -> 1 channel x 1 head (sigmoid).
    static ModelParams zeros();

    std::array<GatLayerParams*, 2> layers() { return {&layer1, &layer2}; }
    std::array<const GatLayerParams*, 2> layers() const { return {&layer1, &layer2}; }
    void validate() const;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Gradients share the parameter layout.
struct Gradients {
    GatLayerParams layer1;
    GatLayerParams layer2;

    static Gradients zeros_like(const ModelParams& params);

    std::array<GatLayerParams*, 2> layers() { return {&layer1, &layer2}; }
    std::array<const GatLayerParams*, 2> layers() const { return {&layer1, &layer2}; }
    Gradients& operator+=(const Gradients& other);
};

// Glorot-uniform kernels and attention vectors (the fan counts every head),
// zero biases.
ModelParams init_params(std::uint64_t seed);

// Directed neighborhoods N(i) + {i}, sorted ascending per receiving node.
struct Neighborhoods {
    std::vector<int> row_ptr;
    std::vector<int> cols;

    static Neighborhoods with_self_loops(const Adjacency& adjacency);
    std::size_t node_count() const { return row_ptr.size() - 1; }
    std::size_t entry_count() const { return cols.size(); }
};

// Per-head attention, head-major: entry (h, k) sits at h * entry_count + k,
// where k indexes Neighborhoods::cols.
struct AttentionCoefficients {
    Neighborhoods support;
    int heads = 0;
    std::vector<double> scores;   // e_ij = LeakyReLU(src . W h_i + dst . W h_j)
    std::vector<double> weights;  // alpha_ij, 0 for dropped entries
};

// keep[h * entry_count + k] == 0 drops that neighbor for that head.
using AttentionMask = std::vector<std::uint8_t>;

AttentionCoefficients attention_coefficients(const GatLayerParams& layer, const Matrix& inputs, const Graph& graph,
                                             const AttentionMask* mask = nullptr);

Matrix gat_layer_forward(const GatLayerParams& layer, const Matrix& inputs, const Graph& graph,
                         const AttentionCoefficients& coefficients);

struct ForwardMode {
    bool train = false;
    std::uint64_t seed = 0;

    static ForwardMode infer() { return {false, 0}; }
    static ForwardMode training(std::uint64_t seed) { return {true, seed}; }
};

struct LayerCache {
    Matrix input;             // after feature dropout
    Matrix input_scale;       // per-entry dropout scale; empty when unused
    Matrix projected;         // input * kernel
    std::vector<double> pre_scores;  // before LeakyReLU
    std::vector<double> weights;
    AttentionMask keep;       // empty when no attention dropout
    Matrix combined;          // heads combined, before activation
    Matrix output;
};

struct ForwardCache {
    Neighborhoods support;
    std::array<LayerCache, 2> layers;
    std::array<LayerShape, 2> shapes;
    ForwardMode mode;
};

struct ForwardResult {
    Vector probabilities;
    ForwardCache cache;
};

// Attention dropout applies to the hidden layer only; the output layer has a
// single head producing the probability.
ForwardResult model_forward(const ModelParams& params, const Graph& graph, ForwardMode mode);
ForwardResult model_forward(const ModelParams& params, const BatchGraph& batch, ForwardMode mode);

Gradients model_backward(const ModelParams& params, const ForwardCache& cache, const Vector& loss_grad);

}  // namespace rsmt
