#include "cowm/serialize.hpp"

#include <cstdio>
#include <cstdlib>

namespace cowm {

namespace {
constexpr const char* kLayerFormat = "cowm.layer/1";
constexpr const char* kMlpFormat = "cowm.mlp/1";
}  // namespace

std::string encode_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double decode_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw RunError("decode_double: unparsable value '" + s + "'");
    return v;
}

nlohmann::json to_json(const Matrix& m) {
    nlohmann::json vals = nlohmann::json::array();
    for (double v : m.values()) vals.push_back(encode_double(v));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"values", std::move(vals)}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
    Vector vals;
    vals.reserve(j.at("values").size());
    for (const auto& s : j.at("values")) vals.push_back(decode_double(s.get<std::string>()));
    return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                  std::move(vals));
}

nlohmann::json to_json(const Vector& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (double x : v) arr.push_back(encode_double(x));
    return arr;
}

Vector vector_from_json(const nlohmann::json& j) {
    Vector v;
    v.reserve(j.size());
    for (const auto& s : j) v.push_back(decode_double(s.get<std::string>()));
    return v;
}

nlohmann::json to_json(const CowmLayer& layer) {
    const CowmConfig& cfg = layer.config();
    nlohmann::json buf = nlohmann::json::array();
    for (const Vector& e : layer.buffer().entries()) buf.push_back(to_json(e));

    nlohmann::json j{
        {"format", kLayerFormat},
        {"d_in", layer.d_in()},
        {"d_out", layer.d_out()},
        {"weights", to_json(layer.weights())},
        {"bias", layer.bias() ? to_json(*layer.bias()) : nlohmann::json(nullptr)},
        {"buffer", {{"capacity", layer.buffer().capacity()}, {"entries", std::move(buf)}}},
        {"config",
         {{"cluster_count", cfg.cluster_count},
          {"cluster_iters", cfg.cluster_iters},
          {"ridge", encode_double(cfg.ridge)},
          {"project", cfg.project},
          {"seed", cfg.seed}}},
    };
    j["preserved"] =
        layer.preserved() ? to_json(*layer.preserved()) : nlohmann::json(nullptr);
    j["projection_part"] =
        layer.projection_part() ? to_json(*layer.projection_part()) : nlohmann::json(nullptr);
    return j;
}

CowmLayer layer_from_json(const nlohmann::json& j) {
    if (j.at("format").get<std::string>() != kLayerFormat) {
        throw RunError("layer_from_json: unsupported format '" +
                       j.at("format").get<std::string>() + "'");
    }
    const auto& jc = j.at("config");
    CowmConfig cfg;
    cfg.cluster_count = jc.at("cluster_count").get<std::size_t>();
    cfg.cluster_iters = jc.at("cluster_iters").get<std::size_t>();
    cfg.buffer_capacity = j.at("buffer").at("capacity").get<std::size_t>();
    cfg.ridge = decode_double(jc.at("ridge").get<std::string>());
    cfg.project = jc.at("project").get<bool>();
    cfg.seed = jc.at("seed").get<std::uint64_t>();

    std::optional<Vector> bias;
    if (!j.at("bias").is_null()) bias = vector_from_json(j.at("bias"));

    CowmLayer layer(matrix_from_json(j.at("weights")), std::move(bias), cfg);
    for (const auto& e : j.at("buffer").at("entries")) {
        layer.buffer().push(vector_from_json(e));
    }
    if (!j.at("preserved").is_null()) {
        layer.set_projection_state(matrix_from_json(j.at("preserved")),
                                   matrix_from_json(j.at("projection_part")));
    }
    return layer;
}

nlohmann::json to_json(const Mlp& net) {
    nlohmann::json layers = nlohmann::json::array();
    for (const CowmLayer& l : net.layers()) layers.push_back(to_json(l));
    nlohmann::json acts = nlohmann::json::array();
    for (Activation a : net.activations()) {
        acts.push_back(a == Activation::Identity ? "identity"
                       : a == Activation::Tanh   ? "tanh"
                                                 : "relu");
    }
    return {{"format", kMlpFormat}, {"layers", std::move(layers)}, {"activations", acts}};
}

Mlp mlp_from_json(const nlohmann::json& j) {
    if (j.at("format").get<std::string>() != kMlpFormat) {
        throw RunError("mlp_from_json: unsupported format");
    }
    std::vector<CowmLayer> layers;
    for (const auto& jl : j.at("layers")) layers.push_back(layer_from_json(jl));
    std::vector<Activation> acts;
    for (const auto& s : j.at("activations")) {
        const std::string name = s.get<std::string>();
        acts.push_back(name == "identity" ? Activation::Identity
                       : name == "tanh"   ? Activation::Tanh
                                          : Activation::Relu);
    }
    return Mlp(std::move(layers), std::move(acts));
}

bool state_equal(const CowmLayer& a, const CowmLayer& b) {
    return to_json(a) == to_json(b);
}

bool state_equal(const Mlp& a, const Mlp& b) { return to_json(a) == to_json(b); }

}  // namespace cowm
