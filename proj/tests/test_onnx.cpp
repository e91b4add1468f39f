#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "adspeech/common/rng.hpp"
#include "adspeech/embed/onnx.hpp"
#include "onnx_builder.hpp"

using namespace adspeech;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

// Minimal encoder: Conv(stride 320, kernel 320, 1->8 channels) ->
// Transpose -> MatMul(8->768) -> Add bias -> Relu. Deterministic weights.
std::string build_encoder_model(int hidden = 768) {
    using namespace onnx_builder;
    SplitMix64 rng(2024);

    GraphSpec g;
    g.inputs.push_back({"waveform", {1, -1}});
    g.outputs.push_back({"hidden_states", {1, -1, hidden}});

    // waveform [1, T] -> [1, 1, T]
    NodeSpec unsq{"Unsqueeze", {"waveform"}, {"wave3"}, {AttrSpec{"axes", 7, 0, 0.0f, {1}, {}}}};
    g.nodes.push_back(unsq);

    TensorSpec conv_w;
    conv_w.name = "conv_w";
    conv_w.dims = {8, 1, 320};
    conv_w.floats.resize(8 * 320);
    for (auto& v : conv_w.floats) v = static_cast<float>(rng.next_double(-0.05, 0.05));
    g.initializers.push_back(conv_w);

    NodeSpec conv{"Conv", {"wave3", "conv_w"}, {"conv_out"}, {AttrSpec{"strides", 7, 0, 0.0f, {320}, {}}}};
    g.nodes.push_back(conv);

    // [1, 8, n_t] -> [1, n_t, 8]
    NodeSpec tr{"Transpose", {"conv_out"}, {"frames"}, {AttrSpec{"perm", 7, 0, 0.0f, {0, 2, 1}, {}}}};
    g.nodes.push_back(tr);

    TensorSpec proj;
    proj.name = "proj_w";
    proj.dims = {8, hidden};
    proj.floats.resize(static_cast<std::size_t>(8 * hidden));
    for (auto& v : proj.floats) v = static_cast<float>(rng.next_double(-0.3, 0.3));
    g.initializers.push_back(proj);

    TensorSpec bias;
    bias.name = "proj_b";
    bias.dims = {hidden};
    bias.floats.resize(static_cast<std::size_t>(hidden));
    for (auto& v : bias.floats) v = static_cast<float>(rng.next_double(-0.1, 0.1));
    g.initializers.push_back(bias);

    g.nodes.push_back(NodeSpec{"MatMul", {"frames", "proj_w"}, {"projected"}, {}});
    g.nodes.push_back(NodeSpec{"Add", {"projected", "proj_b"}, {"biased"}, {}});
    g.nodes.push_back(NodeSpec{"Relu", {"biased"}, {"hidden_states"}, {}});
    return g.encode_model();
}

}  // namespace

TEST_CASE("onnx parser reads the model structure") {
    const std::string bytes = build_encoder_model();
    const onnx::Model m = onnx::parse_model(bytes);
    REQUIRE(m.ir_version == 8);
    REQUIRE(m.opset_version == 17);
    REQUIRE(m.nodes.size() == 6);
    REQUIRE(m.initializers.size() == 3);
    REQUIRE(m.inputs.size() == 1);
    REQUIRE(m.inputs[0].name == "waveform");
    REQUIRE(m.inputs[0].dims == std::vector<std::int64_t>({1, -1}));
    REQUIRE(m.outputs.size() == 1);
    REQUIRE(m.outputs[0].dims == std::vector<std::int64_t>({1, -1, 768}));
    REQUIRE(m.initializers.at("conv_w").shape == std::vector<std::int64_t>({8, 1, 320}));
    REQUIRE(m.initializers.at("conv_w").f.size() == 8 * 320);
}

TEST_CASE("encoder contract accepts the declared shape and rejects drift") {
    REQUIRE_NOTHROW(onnx::check_encoder_contract(onnx::parse_model(build_encoder_model())));

    // Wrong hidden size.
    const onnx::Model narrow = onnx::parse_model(build_encoder_model(512));
    REQUIRE_THROWS_MATCHES(onnx::check_encoder_contract(narrow), Error,
                           Catch::Matchers::Predicate<Error>(
                               [](const Error& e) { return e.code() == Errc::SchemaViolation; }));

    // Wrong input name.
    using namespace onnx_builder;
    GraphSpec g;
    g.inputs.push_back({"audio", {1, -1}});
    g.outputs.push_back({"hidden_states", {1, -1, 768}});
    g.nodes.push_back(NodeSpec{"Identity", {"audio"}, {"hidden_states"}, {}});
    REQUIRE_THROWS_AS(onnx::check_encoder_contract(onnx::parse_model(g.encode_model())), Error);
}

TEST_CASE("executor matches hand computation on a tiny conv graph") {
    using namespace onnx_builder;
    GraphSpec g;
    g.inputs.push_back({"waveform", {1, -1}});
    g.outputs.push_back({"hidden_states", {1, -1, 2}});
    g.nodes.push_back(NodeSpec{"Unsqueeze", {"waveform"}, {"w3"}, {AttrSpec{"axes", 7, 0, 0.0f, {1}, {}}}});
    TensorSpec w;
    w.name = "k";
    w.dims = {2, 1, 2};
    w.floats = {1.0f, 1.0f, 1.0f, -1.0f};  // channel 0: sum of pairs; channel 1: difference
    g.initializers.push_back(w);
    g.nodes.push_back(NodeSpec{"Conv", {"w3", "k"}, {"c"}, {AttrSpec{"strides", 7, 0, 0.0f, {2}, {}}}});
    g.nodes.push_back(NodeSpec{"Transpose", {"c"}, {"hidden_states"}, {AttrSpec{"perm", 7, 0, 0.0f, {0, 2, 1}, {}}}});

    onnx::Runtime rt(onnx::parse_model(g.encode_model()));
    onnx::Tensor wave;
    wave.shape = {1, 6};
    wave.f = {1.0f, 2.0f, 3.0f, 5.0f, 8.0f, 13.0f};
    auto out = rt.run({{"waveform", wave}});
    const onnx::Tensor& h = out.at("hidden_states");
    REQUIRE(h.shape == std::vector<std::int64_t>({1, 3, 2}));
    // Pairs (1,2), (3,5), (8,13): sums 3, 8, 21; differences -1, -2, -5.
    REQUIRE(h.f[0] == Catch::Approx(3.0f));
    REQUIRE(h.f[1] == Catch::Approx(-1.0f));
    REQUIRE(h.f[2] == Catch::Approx(8.0f));
    REQUIRE(h.f[3] == Catch::Approx(-2.0f));
    REQUIRE(h.f[4] == Catch::Approx(21.0f));
    REQUIRE(h.f[5] == Catch::Approx(-5.0f));
}

TEST_CASE("executor elementwise, normalization, and reduction ops agree with direct math") {
    using namespace onnx_builder;
    GraphSpec g;
    g.inputs.push_back({"waveform", {1, 4}});
    g.outputs.push_back({"hidden_states", {1, 1, 4}});

    TensorSpec scale;
    scale.name = "scale";
    scale.dims = {4};
    scale.floats = {1.0f, 2.0f, 3.0f, 4.0f};
    g.initializers.push_back(scale);
    TensorSpec bias;
    bias.name = "bias";
    bias.dims = {4};
    bias.floats = {0.5f, 0.5f, 0.5f, 0.5f};
    g.initializers.push_back(bias);

    g.nodes.push_back(NodeSpec{"LayerNormalization", {"waveform", "scale", "bias"}, {"ln"},
                               {AttrSpec{"epsilon", 1, 0, 1e-5f, {}, {}}}});
    g.nodes.push_back(NodeSpec{"Sigmoid", {"ln"}, {"sg"}, {}});
    g.nodes.push_back(NodeSpec{"Unsqueeze", {"sg"}, {"hidden_states"}, {AttrSpec{"axes", 7, 0, 0.0f, {1}, {}}}});

    onnx::Runtime rt(onnx::parse_model(g.encode_model()));
    onnx::Tensor wave;
    wave.shape = {1, 4};
    wave.f = {1.0f, 2.0f, 3.0f, 4.0f};
    auto out = rt.run({{"waveform", wave}});
    const auto& h = out.at("hidden_states");
    REQUIRE(h.shape == std::vector<std::int64_t>({1, 1, 4}));

    // Direct computation.
    const double mean = 2.5;
    const double var = (2.25 + 0.25 + 0.25 + 2.25) / 4.0;
    for (int i = 0; i < 4; ++i) {
        const double z = ((i + 1.0) - mean) / std::sqrt(var + 1e-5);
        const double expect = 1.0 / (1.0 + std::exp(-(z * (i + 1.0) + 0.5)));
        REQUIRE(h.f[static_cast<std::size_t>(i)] == Catch::Approx(expect).margin(1e-5));
    }
}

TEST_CASE("unsupported operators fail loudly at load time") {
    using namespace onnx_builder;
    GraphSpec g;
    g.inputs.push_back({"waveform", {1, -1}});
    g.outputs.push_back({"hidden_states", {1, -1, 768}});
    g.nodes.push_back(NodeSpec{"FancyCustomOp", {"waveform"}, {"hidden_states"}, {}});
    REQUIRE_THROWS_MATCHES(onnx::Runtime(onnx::parse_model(g.encode_model())), Error,
                           Catch::Matchers::Predicate<Error>(
                               [](const Error& e) { return e.code() == Errc::UnsupportedOperator; }));
}

TEST_CASE("onnx backend encodes deterministically through the chunking path") {
    const std::string path = temp_path("encoder_test.onnx");
    {
        std::ofstream out(path, std::ios::binary);
        const std::string bytes = build_encoder_model();
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    onnx::OnnxEncoderBackend backend(path);
    REQUIRE(backend.name() == "onnx:" + path);

    AudioClip clip;
    clip.sample_rate_hz = kCanonicalRateHz;
    SplitMix64 rng(5150);
    clip.samples.resize(400000);  // two chunks
    for (auto& v : clip.samples) v = rng.next_double(-0.8, 0.8);

    const EmbeddingVector a = extract_embedding(clip, backend);
    const EmbeddingVector b = extract_embedding(clip, backend);
    REQUIRE(a.values.size() == kEmbeddingDim);
    REQUIRE(a.values == b.values);
    double energy = 0.0;
    for (double v : a.values) {
        REQUIRE(std::isfinite(v));
        energy += std::abs(v);
    }
    REQUIRE(energy > 0.0);  // Relu output driven by real signal
}

TEST_CASE("backend with wrong contract is rejected at construction") {
    const std::string path = temp_path("encoder_bad.onnx");
    {
        std::ofstream out(path, std::ios::binary);
        const std::string bytes = build_encoder_model(512);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    REQUIRE_THROWS_AS(onnx::OnnxEncoderBackend(path), Error);
}
