#include "rsmt/checkpoint.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>

#include <json.hpp>

#include "rsmt/dataset.hpp"
#include "rsmt/error.hpp"

namespace rsmt {

namespace {

using ordered_json = nlohmann::ordered_json;

const char* activation_name(Activation a) { return a == Activation::Elu ? "elu" : "sigmoid"; }
const char* combine_name(HeadCombine c) { return c == HeadCombine::Concatenate ? "concatenate" : "average"; }

[[noreturn]] void corrupt(const std::string& source, const std::string& what) {
    throw Error(ErrorCode::ParseError, source + ": " + what);
}

Activation parse_activation(const std::string& s, const std::string& source) {
    if (s == "elu") return Activation::Elu;
    if (s == "sigmoid") return Activation::Sigmoid;
    corrupt(source, "unknown activation '" + s + "'");
}

HeadCombine parse_combine(const std::string& s, const std::string& source) {
    if (s == "concatenate") return HeadCombine::Concatenate;
    if (s == "average") return HeadCombine::Average;
    corrupt(source, "unknown head combination '" + s + "'");
}

ordered_json encode_values(const double* data, std::size_t count) {
    ordered_json arr = ordered_json::array();
    for (std::size_t i = 0; i < count; ++i) arr.push_back(to_hex_float(data[i]));
    return arr;
}

ordered_json encode_tensor(std::vector<int> shape, const double* data, std::size_t count) {
    ordered_json t;
    t["shape"] = std::move(shape);
    t["values"] = encode_values(data, count);
    return t;
}

void decode_tensor(const nlohmann::json& j, const std::vector<int>& shape, double* out, const std::string& source,
                   const std::string& name) {
    if (j.at("shape").get<std::vector<int>>() != shape) corrupt(source, name + ": declared shape does not match layer");
    std::size_t expected = 1;
    for (int d : shape) expected *= static_cast<std::size_t>(d);
    const auto& values = j.at("values");
    if (!values.is_array() || values.size() != expected) {
        corrupt(source, name + ": expected " + std::to_string(expected) + " values, found " +
                            std::to_string(values.is_array() ? values.size() : 0));
    }
    for (std::size_t i = 0; i < expected; ++i) {
        try {
            out[i] = from_hex_float(values[i].get<std::string>());
        } catch (const Error& e) {
            corrupt(source, name + "[" + std::to_string(i) + "]: " + e.what());
        }
    }
}

ordered_json encode_layer(const GatLayerParams& layer) {
    ordered_json j;
    j["in_dim"] = layer.in_dim;
    j["out_dim"] = layer.out_dim;
    j["heads"] = layer.heads;
    j["activation"] = activation_name(layer.activation);
    j["combine"] = combine_name(layer.combine);
    // Reorder the kernel from [in, heads*out] into declared [heads, in, out].
    std::vector<double> kernel;
    kernel.reserve(static_cast<std::size_t>(layer.kernel.size()));
    for (int h = 0; h < layer.heads; ++h) {
        for (int r = 0; r < layer.in_dim; ++r) {
            for (int c = 0; c < layer.out_dim; ++c) kernel.push_back(layer.kernel(r, h * layer.out_dim + c));
        }
    }
    j["kernel"] = encode_tensor({layer.heads, layer.in_dim, layer.out_dim}, kernel.data(), kernel.size());
    const std::vector<int> vec_shape{layer.heads, layer.out_dim};
    j["attention_src"] = encode_tensor(vec_shape, layer.attention_src.data(), static_cast<std::size_t>(layer.attention_src.size()));
    j["attention_dst"] = encode_tensor(vec_shape, layer.attention_dst.data(), static_cast<std::size_t>(layer.attention_dst.size()));
    j["bias"] = encode_tensor(vec_shape, layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
    return j;
}

GatLayerParams decode_layer(const nlohmann::json& j, const std::string& source) {
    const int in_dim = j.at("in_dim").get<int>();
    const int out_dim = j.at("out_dim").get<int>();
    const int heads = j.at("heads").get<int>();
    if (in_dim <= 0 || out_dim <= 0 || heads <= 0 || in_dim > 4096 || out_dim > 4096 || heads > 4096) {
        corrupt(source, "layer dimensions out of range");
    }
    GatLayerParams layer = GatLayerParams::zeros(in_dim, out_dim, heads,
                                                 parse_activation(j.at("activation").get<std::string>(), source),
                                                 parse_combine(j.at("combine").get<std::string>(), source));
    std::vector<double> kernel(static_cast<std::size_t>(in_dim * out_dim * heads));
    decode_tensor(j.at("kernel"), {heads, in_dim, out_dim}, kernel.data(), source, "kernel");
    std::size_t k = 0;
    for (int h = 0; h < heads; ++h) {
        for (int r = 0; r < in_dim; ++r) {
            for (int c = 0; c < out_dim; ++c) layer.kernel(r, h * out_dim + c) = kernel[k++];
        }
    }
    const std::vector<int> vec_shape{heads, out_dim};
    decode_tensor(j.at("attention_src"), vec_shape, layer.attention_src.data(), source, "attention_src");
    decode_tensor(j.at("attention_dst"), vec_shape, layer.attention_dst.data(), source, "attention_dst");
    decode_tensor(j.at("bias"), vec_shape, layer.bias.data(), source, "bias");
    return layer;
}

}  // namespace

std::string to_hex_float(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", value);
    return buf;
}

double from_hex_float(const std::string& text) {
    if (text.empty()) throw Error(ErrorCode::ParseError, "empty number");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || errno == ERANGE) {
        throw Error(ErrorCode::ParseError, "not a floating-point literal: '" + text + "'");
    }
    return v;
}

std::string checkpoint_to_string(const Checkpoint& checkpoint) {
    checkpoint.params.validate();
    ordered_json j;
    j["format"] = kCheckpointFormat;
    j["version"] = kCheckpointVersion;
    ordered_json model;
    model["attention_dropout_rate"] = to_hex_float(checkpoint.params.attention_dropout_rate);
    model["layer_dropout_rate"] = to_hex_float(checkpoint.params.layer_dropout_rate);
    model["layers"] = ordered_json::array({encode_layer(checkpoint.params.layer1), encode_layer(checkpoint.params.layer2)});
    j["model"] = std::move(model);
    ordered_json training;
    training["seed"] = checkpoint.training.seed;
    training["epochs_run"] = checkpoint.training.epochs_run;
    training["best_epoch"] = checkpoint.training.best_epoch;
    training["best_val_loss"] = to_hex_float(checkpoint.training.best_val_loss);
    j["training"] = std::move(training);
    return j.dump(2) + "\n";
}

Checkpoint checkpoint_from_string(std::string_view text, const std::string& source) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        corrupt(source, "invalid JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    try {
        if (!j.is_object() || j.value("format", std::string()) != kCheckpointFormat) {
            corrupt(source, "not a checkpoint (format tag missing)");
        }
        const int version = j.at("version").get<int>();
        if (version != kCheckpointVersion) {
            throw Error(ErrorCode::UnsupportedVersion, source + ": checkpoint version " + std::to_string(version) +
                                                           ", this build reads version " +
                                                           std::to_string(kCheckpointVersion));
        }
        const auto& model = j.at("model");
        const auto& layers = model.at("layers");
        if (!layers.is_array() || layers.size() != 2) corrupt(source, "expected exactly 2 layers");

        Checkpoint ckpt;
        ckpt.params.layer1 = decode_layer(layers[0], source);
        ckpt.params.layer2 = decode_layer(layers[1], source);
        ckpt.params.attention_dropout_rate = from_hex_float(model.at("attention_dropout_rate").get<std::string>());
        ckpt.params.layer_dropout_rate = from_hex_float(model.at("layer_dropout_rate").get<std::string>());
        const auto& training = j.at("training");
        ckpt.training.seed = training.at("seed").get<std::uint64_t>();
        ckpt.training.epochs_run = training.at("epochs_run").get<int>();
        ckpt.training.best_epoch = training.at("best_epoch").get<int>();
        ckpt.training.best_val_loss = from_hex_float(training.at("best_val_loss").get<std::string>());
        try {
            ckpt.params.validate();
        } catch (const Error& e) {
            corrupt(source, e.what());
        }
        return ckpt;
    } catch (const nlohmann::json::exception& e) {
        corrupt(source, e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    write_file_atomically(path, checkpoint_to_string(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    return checkpoint_from_string(read_file(path), path.string());
}

}  // namespace rsmt
