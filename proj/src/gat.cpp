#include "rsmt/gat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rsmt/error.hpp"
#include "rsmt/prng.hpp"

namespace rsmt {

namespace {

void require(bool ok, ErrorCode code, const std::string& what) {
    if (!ok) throw Error(code, what);
}

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
    require(m.rows() == rows && m.cols() == cols, ErrorCode::ShapeError,
            std::string(name) + " is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ", expected " +
                std::to_string(rows) + "x" + std::to_string(cols));
}

double leaky(double u) { return u > 0.0 ? u : kLeakySlope * u; }
double leaky_slope(double u) { return u > 0.0 ? 1.0 : kLeakySlope; }

double activate(Activation act, double y) {
    if (act == Activation::Elu) return y > 0.0 ? y : std::expm1(y);
    const double z = std::clamp(y, -kSigmoidClamp, kSigmoidClamp);
    return 1.0 / (1.0 + std::exp(-z));
}

double activation_slope(Activation act, double y, double out) {
    if (act == Activation::Elu) return y > 0.0 ? 1.0 : out + 1.0;
    if (y <= -kSigmoidClamp || y >= kSigmoidClamp) return 0.0;
    return out * (1.0 - out);
}

void fill_uniform(Matrix& m, Pcg32& rng, double limit) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-limit, limit);
}

// Projection, scores and softmax for one layer. Writes pre-LeakyReLU scores
// and attention weights in head-major order.
void attend(const GatLayerParams& layer, const Matrix& projected, const Neighborhoods& support, const AttentionMask* keep,
            std::vector<double>& pre_scores, std::vector<double>& weights) {
    const std::size_t n = support.node_count();
    const std::size_t entries = support.entry_count();
    const int out = layer.out_dim;
    const Eigen::Index width = projected.cols();
    pre_scores.assign(entries * static_cast<std::size_t>(layer.heads), 0.0);
    weights.assign(entries * static_cast<std::size_t>(layer.heads), 0.0);

    std::vector<double> src(n);
    std::vector<double> dst(n);
    for (int h = 0; h < layer.heads; ++h) {
        for (std::size_t i = 0; i < n; ++i) {
            const double* z = projected.data() + static_cast<Eigen::Index>(i) * width + h * out;
            double s = 0.0;
            double d = 0.0;
            for (int c = 0; c < out; ++c) {
                s += layer.attention_src(h, c) * z[c];
                d += layer.attention_dst(h, c) * z[c];
            }
            src[i] = s;
            dst[i] = d;
        }
        const std::size_t base = static_cast<std::size_t>(h) * entries;
        for (std::size_t i = 0; i < n; ++i) {
            const auto begin = static_cast<std::size_t>(support.row_ptr[i]);
            const auto end = static_cast<std::size_t>(support.row_ptr[i + 1]);
            double top = -std::numeric_limits<double>::infinity();
            for (std::size_t k = begin; k < end; ++k) {
                const double u = src[i] + dst[static_cast<std::size_t>(support.cols[k])];
                pre_scores[base + k] = u;
                if (keep == nullptr || (*keep)[base + k]) top = std::max(top, leaky(u));
            }
            double total = 0.0;
            for (std::size_t k = begin; k < end; ++k) {
                if (keep != nullptr && !(*keep)[base + k]) continue;
                const double w = std::exp(leaky(pre_scores[base + k]) - top);
                weights[base + k] = w;
                total += w;
            }
            if (total > 0.0) {
                for (std::size_t k = begin; k < end; ++k) weights[base + k] /= total;
            }
        }
    }
}

// Weighted aggregation plus bias, heads combined; no activation.
Matrix aggregate(const GatLayerParams& layer, const Matrix& projected, const Neighborhoods& support,
                 const std::vector<double>& weights) {
    const std::size_t n = support.node_count();
    const std::size_t entries = support.entry_count();
    const int out = layer.out_dim;
    const Eigen::Index width = projected.cols();
    const bool concat = layer.combine == HeadCombine::Concatenate;
    const double head_scale = concat ? 1.0 : 1.0 / layer.heads;

    Matrix combined = Matrix::Zero(static_cast<Eigen::Index>(n), layer.output_dim());
    for (int h = 0; h < layer.heads; ++h) {
        const std::size_t base = static_cast<std::size_t>(h) * entries;
        const int col0 = concat ? h * out : 0;
        for (std::size_t i = 0; i < n; ++i) {
            double* y = combined.data() + static_cast<Eigen::Index>(i) * combined.cols() + col0;
            for (int c = 0; c < out; ++c) {
                double acc = layer.bias(h, c);
                for (auto k = static_cast<std::size_t>(support.row_ptr[i]); k < static_cast<std::size_t>(support.row_ptr[i + 1]); ++k) {
                    const double* z = projected.data() + static_cast<Eigen::Index>(support.cols[k]) * width + h * out;
                    acc += weights[base + k] * z[c];
                }
                y[c] += head_scale * acc;
            }
        }
    }
    return combined;
}

Matrix apply_activation(Activation act, const Matrix& combined) {
    Matrix out(combined.rows(), combined.cols());
    for (Eigen::Index i = 0; i < combined.size(); ++i) out.data()[i] = activate(act, combined.data()[i]);
    return out;
}

void check_inputs(const GatLayerParams& layer, const Matrix& inputs, std::size_t node_count) {
    layer.validate();
    require(inputs.cols() == layer.in_dim, ErrorCode::ShapeError,
            "layer expects " + std::to_string(layer.in_dim) + " input features, got " + std::to_string(inputs.cols()));
    require(static_cast<std::size_t>(inputs.rows()) == node_count, ErrorCode::ShapeError,
            "feature rows (" + std::to_string(inputs.rows()) + ") != graph nodes (" + std::to_string(node_count) + ")");
}

AttentionMask draw_attention_mask(std::size_t size, double rate, std::uint64_t seed) {
    AttentionMask keep(size, 1);
    Pcg32 rng(seed);
    for (auto& k : keep) k = rng.uniform() < rate ? 0 : 1;
    return keep;
}

Matrix draw_feature_scale(Eigen::Index rows, Eigen::Index cols, double rate, std::uint64_t seed) {
    Matrix scale(rows, cols);
    Pcg32 rng(seed);
    const double kept = 1.0 / (1.0 - rate);
    for (Eigen::Index i = 0; i < scale.size(); ++i) scale.data()[i] = rng.uniform() < rate ? 0.0 : kept;
    return scale;
}

void layer_forward(const GatLayerParams& layer, const Matrix& inputs, const Neighborhoods& support, double feature_rate,
                   double attention_rate, const ForwardMode& mode, int layer_index, LayerCache& cache) {
    if (mode.train && feature_rate > 0.0) {
        cache.input_scale = draw_feature_scale(inputs.rows(), inputs.cols(), feature_rate,
                                               derive_seed(mode.seed, {static_cast<std::uint64_t>(layer_index), 0}));
        cache.input = inputs.cwiseProduct(cache.input_scale);
    } else {
        cache.input_scale.resize(0, 0);
        cache.input = inputs;
    }
    if (mode.train && attention_rate > 0.0) {
        cache.keep = draw_attention_mask(support.entry_count() * static_cast<std::size_t>(layer.heads), attention_rate,
                                         derive_seed(mode.seed, {static_cast<std::uint64_t>(layer_index), 1}));
    } else {
        cache.keep.clear();
    }
    cache.projected = cache.input * layer.kernel;
    attend(layer, cache.projected, support, cache.keep.empty() ? nullptr : &cache.keep, cache.pre_scores, cache.weights);
    cache.combined = aggregate(layer, cache.projected, support, cache.weights);
    cache.output = apply_activation(layer.activation, cache.combined);
}

// Returns the gradient with respect to the layer input (before feature dropout).
Matrix layer_backward(const GatLayerParams& layer, const LayerCache& cache, const Neighborhoods& support,
                      const Matrix& output_grad, GatLayerParams& grads) {
    const std::size_t n = support.node_count();
    const std::size_t entries = support.entry_count();
    const int out = layer.out_dim;
    const Eigen::Index width = cache.projected.cols();
    const bool concat = layer.combine == HeadCombine::Concatenate;
    const double head_scale = concat ? 1.0 : 1.0 / layer.heads;

    Matrix combined_grad(cache.combined.rows(), cache.combined.cols());
    for (Eigen::Index i = 0; i < combined_grad.size(); ++i) {
        combined_grad.data()[i] = output_grad.data()[i] *
                                  activation_slope(layer.activation, cache.combined.data()[i], cache.output.data()[i]);
    }

    Matrix projected_grad = Matrix::Zero(cache.projected.rows(), width);
    std::vector<double> src_grad(n);
    std::vector<double> dst_grad(n);
    std::vector<double> weight_grad;
    for (int h = 0; h < layer.heads; ++h) {
        const std::size_t base = static_cast<std::size_t>(h) * entries;
        const int col0 = concat ? h * out : 0;
        std::fill(src_grad.begin(), src_grad.end(), 0.0);
        std::fill(dst_grad.begin(), dst_grad.end(), 0.0);

        for (std::size_t i = 0; i < n; ++i) {
            const double* g = combined_grad.data() + static_cast<Eigen::Index>(i) * combined_grad.cols() + col0;
            for (int c = 0; c < out; ++c) grads.bias(h, c) += head_scale * g[c];

            const auto begin = static_cast<std::size_t>(support.row_ptr[i]);
            const auto end = static_cast<std::size_t>(support.row_ptr[i + 1]);
            weight_grad.assign(end - begin, 0.0);
            double weighted_sum = 0.0;
            for (std::size_t k = begin; k < end; ++k) {
                const double alpha = cache.weights[base + k];
                const auto j = static_cast<Eigen::Index>(support.cols[k]);
                const double* z = cache.projected.data() + j * width + h * out;
                double* dz = projected_grad.data() + j * width + h * out;
                double dalpha = 0.0;
                for (int c = 0; c < out; ++c) {
                    const double gc = head_scale * g[c];
                    dz[c] += alpha * gc;
                    dalpha += gc * z[c];
                }
                weight_grad[k - begin] = dalpha;
                weighted_sum += alpha * dalpha;
            }
            for (std::size_t k = begin; k < end; ++k) {
                const double alpha = cache.weights[base + k];
                if (alpha == 0.0) continue;
                const double de = alpha * (weight_grad[k - begin] - weighted_sum);
                const double du = de * leaky_slope(cache.pre_scores[base + k]);
                src_grad[i] += du;
                dst_grad[static_cast<std::size_t>(support.cols[k])] += du;
            }
        }

        for (std::size_t i = 0; i < n; ++i) {
            const double* z = cache.projected.data() + static_cast<Eigen::Index>(i) * width + h * out;
            double* dz = projected_grad.data() + static_cast<Eigen::Index>(i) * width + h * out;
            for (int c = 0; c < out; ++c) {
                grads.attention_src(h, c) += src_grad[i] * z[c];
                grads.attention_dst(h, c) += dst_grad[i] * z[c];
                dz[c] += src_grad[i] * layer.attention_src(h, c) + dst_grad[i] * layer.attention_dst(h, c);
            }
        }
    }

    grads.kernel.noalias() += cache.input.transpose() * projected_grad;
    Matrix input_grad = projected_grad * layer.kernel.transpose();
    if (cache.input_scale.size() > 0) input_grad = input_grad.cwiseProduct(cache.input_scale);
    return input_grad;
}

}  // namespace

GatLayerParams GatLayerParams::zeros(int in_dim, int out_dim, int heads, Activation activation, HeadCombine combine) {
    require(in_dim > 0 && out_dim > 0 && heads > 0, ErrorCode::ShapeError, "layer dimensions must be positive");
    GatLayerParams p;
    p.in_dim = in_dim;
    p.out_dim = out_dim;
    p.heads = heads;
    p.activation = activation;
    p.combine = combine;
    p.kernel = Matrix::Zero(in_dim, heads * out_dim);
    p.attention_src = Matrix::Zero(heads, out_dim);
    p.attention_dst = Matrix::Zero(heads, out_dim);
    p.bias = Matrix::Zero(heads, out_dim);
    return p;
}

void GatLayerParams::validate() const {
    require(in_dim > 0 && out_dim > 0 && heads > 0, ErrorCode::ShapeError, "layer dimensions must be positive");
    require_shape(kernel, in_dim, heads * out_dim, "kernel");
    require_shape(attention_src, heads, out_dim, "attention_src");
    require_shape(attention_dst, heads, out_dim, "attention_dst");
    require_shape(bias, heads, out_dim, "bias");
}

ModelParams ModelParams::zeros() {
    ModelParams p;
    p.layer1 = GatLayerParams::zeros(ModelDefaults::input_dim, ModelDefaults::hidden_channels,
                                     ModelDefaults::hidden_heads, Activation::Elu, HeadCombine::Concatenate);
    p.layer2 = GatLayerParams::zeros(p.layer1.output_dim(), 1, 1, Activation::Sigmoid, HeadCombine::Average);
    return p;
}

void ModelParams::validate() const {
    layer1.validate();
    layer2.validate();
    require(layer2.in_dim == layer1.output_dim(), ErrorCode::ShapeError, "layer2 input must match layer1 output");
    require(layer2.output_dim() == 1, ErrorCode::ShapeError, "output layer must produce one value per node");
    require(attention_dropout_rate >= 0.0 && attention_dropout_rate < 1.0, ErrorCode::InvalidConfig,
            "attention dropout rate must lie in [0, 1)");
    require(layer_dropout_rate >= 0.0 && layer_dropout_rate < 1.0, ErrorCode::InvalidConfig,
            "layer dropout rate must lie in [0, 1)");
}

Gradients Gradients::zeros_like(const ModelParams& params) {
    Gradients g;
    g.layer1 = GatLayerParams::zeros(params.layer1.in_dim, params.layer1.out_dim, params.layer1.heads,
                                     params.layer1.activation, params.layer1.combine);
    g.layer2 = GatLayerParams::zeros(params.layer2.in_dim, params.layer2.out_dim, params.layer2.heads,
                                     params.layer2.activation, params.layer2.combine);
    return g;
}

Gradients& Gradients::operator+=(const Gradients& other) {
    for (std::size_t l = 0; l < 2; ++l) {
        auto mine = layers()[l]->tensors();
        auto theirs = other.layers()[l]->tensors();
        for (std::size_t t = 0; t < mine.size(); ++t) *mine[t] += *theirs[t];
    }
    return *this;
}

ModelParams init_params(std::uint64_t seed) {
    ModelParams p = ModelParams::zeros();
    Pcg32 rng(seed);
    for (GatLayerParams* layer : p.layers()) {
        const int width = layer->heads * layer->out_dim;
        fill_uniform(layer->kernel, rng, std::sqrt(6.0 / (layer->in_dim + width)));
        const double attention_limit = std::sqrt(6.0 / (width + layer->heads));
        fill_uniform(layer->attention_src, rng, attention_limit);
        fill_uniform(layer->attention_dst, rng, attention_limit);
    }
    return p;
}

Neighborhoods Neighborhoods::with_self_loops(const Adjacency& adjacency) {
    Neighborhoods nb;
    const std::size_t n = adjacency.node_count();
    nb.row_ptr.reserve(n + 1);
    nb.row_ptr.push_back(0);
    nb.cols.reserve(adjacency.cols.size() + n);
    for (std::size_t i = 0; i < n; ++i) {
        bool placed = false;
        for (int j : adjacency.neighbors(i)) {
            if (!placed && j > static_cast<int>(i)) {
                nb.cols.push_back(static_cast<int>(i));
                placed = true;
            }
            nb.cols.push_back(j);
        }
        if (!placed) nb.cols.push_back(static_cast<int>(i));
        nb.row_ptr.push_back(static_cast<int>(nb.cols.size()));
    }
    return nb;
}

AttentionCoefficients attention_coefficients(const GatLayerParams& layer, const Matrix& inputs, const Graph& graph,
                                             const AttentionMask* mask) {
    check_inputs(layer, inputs, graph.node_count());
    AttentionCoefficients coeffs;
    coeffs.support = Neighborhoods::with_self_loops(graph.adjacency);
    coeffs.heads = layer.heads;
    if (mask != nullptr) {
        require(mask->size() == coeffs.support.entry_count() * static_cast<std::size_t>(layer.heads),
                ErrorCode::ShapeError, "attention mask size does not match heads x neighborhood entries");
    }
    const Matrix projected = inputs * layer.kernel;
    attend(layer, projected, coeffs.support, mask, coeffs.scores, coeffs.weights);
    for (double& s : coeffs.scores) s = leaky(s);
    return coeffs;
}

Matrix gat_layer_forward(const GatLayerParams& layer, const Matrix& inputs, const Graph& graph,
                         const AttentionCoefficients& coefficients) {
    check_inputs(layer, inputs, graph.node_count());
    require(coefficients.heads == layer.heads &&
                coefficients.support.node_count() == graph.node_count() &&
                coefficients.weights.size() == coefficients.support.entry_count() * static_cast<std::size_t>(layer.heads),
            ErrorCode::ShapeError, "attention coefficients do not belong to this layer and graph");
    const Matrix projected = inputs * layer.kernel;
    return apply_activation(layer.activation, aggregate(layer, projected, coefficients.support, coefficients.weights));
}

ForwardResult model_forward(const ModelParams& params, const Graph& graph, ForwardMode mode) {
    params.validate();
    check_inputs(params.layer1, graph.features, graph.node_count());

    ForwardResult result;
    ForwardCache& cache = result.cache;
    cache.mode = mode;
    cache.support = Neighborhoods::with_self_loops(graph.adjacency);
    cache.shapes = {params.layer1.shape(), params.layer2.shape()};

    layer_forward(params.layer1, graph.features, cache.support, params.layer_dropout_rate,
                  params.attention_dropout_rate, mode, 0, cache.layers[0]);
    layer_forward(params.layer2, cache.layers[0].output, cache.support, params.layer_dropout_rate, 0.0, mode, 1,
                  cache.layers[1]);
    result.probabilities = Eigen::Map<const Vector>(cache.layers[1].output.data(), cache.layers[1].output.rows());
    return result;
}

ForwardResult model_forward(const ModelParams& params, const BatchGraph& batch, ForwardMode mode) {
    return model_forward(params, batch.graph, mode);
}

Gradients model_backward(const ModelParams& params, const ForwardCache& cache, const Vector& loss_grad) {
    if (cache.shapes[0] != params.layer1.shape() || cache.shapes[1] != params.layer2.shape()) {
        throw Error(ErrorCode::CacheMismatch, "forward cache was produced with differently shaped parameters");
    }
    if (static_cast<std::size_t>(loss_grad.size()) != cache.support.node_count() ||
        cache.layers[1].output.rows() != loss_grad.size()) {
        throw Error(ErrorCode::CacheMismatch, "gradient length " + std::to_string(loss_grad.size()) +
                                                  " does not match cached node count " +
                                                  std::to_string(cache.support.node_count()));
    }

    Gradients grads = Gradients::zeros_like(params);
    Matrix output_grad = Eigen::Map<const Matrix>(loss_grad.data(), loss_grad.size(), 1);
    Matrix hidden_grad = layer_backward(params.layer2, cache.layers[1], cache.support, output_grad, grads.layer2);
    layer_backward(params.layer1, cache.layers[0], cache.support, hidden_grad, grads.layer1);
    return grads;
}

}  // namespace rsmt
