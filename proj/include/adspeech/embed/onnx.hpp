#pragma once

// Self-contained reader and executor for a restricted ONNX subset: enough
// to load a serialized frozen sequence encoder, validate its input/output
// contract, and run deterministic float32 inference. Supported operators
// are listed in onnx_detail::kSupportedOps; anything else fails loudly.
// Single batch, static graphs, no control flow.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "adspeech/common/error.hpp"
#include "adspeech/common/matrix.hpp"
#include "adspeech/embed/backend.hpp"

namespace adspeech::onnx {

// ---------------------------------------------------------------------------
// Protobuf wire format

namespace pb {

struct Cursor {
    const std::uint8_t* p;
    const std::uint8_t* end;

    bool done() const { return p >= end; }

    std::uint64_t varint() {
        std::uint64_t v = 0;
        int shift = 0;
        while (p < end) {
            const std::uint8_t b = *p++;
            v |= static_cast<std::uint64_t>(b & 0x7F) << shift;
            if ((b & 0x80) == 0) return v;
            shift += 7;
            if (shift >= 64) break;
        }
        raise(Errc::SchemaViolation, "truncated varint in encoder file");
    }

    // Returns (field number, wire type).
    std::pair<std::uint32_t, std::uint32_t> tag() {
        const std::uint64_t t = varint();
        return {static_cast<std::uint32_t>(t >> 3), static_cast<std::uint32_t>(t & 7)};
    }

    Cursor sub() {
        const std::uint64_t len = varint();
        require(p + len <= end, Errc::SchemaViolation, "truncated length-delimited field in encoder file");
        Cursor c{p, p + len};
        p += len;
        return c;
    }

    std::string bytes() {
        Cursor c = sub();
        return std::string(reinterpret_cast<const char*>(c.p), static_cast<std::size_t>(c.end - c.p));
    }

    float fixed32() {
        require(p + 4 <= end, Errc::SchemaViolation, "truncated fixed32 in encoder file");
        float f;
        std::memcpy(&f, p, 4);
        p += 4;
        return f;
    }

    std::uint64_t fixed64() {
        require(p + 8 <= end, Errc::SchemaViolation, "truncated fixed64 in encoder file");
        std::uint64_t v;
        std::memcpy(&v, p, 8);
        p += 8;
        return v;
    }

    void skip(std::uint32_t wire_type) {
        switch (wire_type) {
            case 0: varint(); break;
            case 1: fixed64(); break;
            case 2: sub(); break;
            case 5: fixed32(); break;
            default: raise(Errc::SchemaViolation, "unsupported wire type in encoder file");
        }
    }
};

}  // namespace pb

// ---------------------------------------------------------------------------
// Model structures (the subset we read)

enum ElemType : int { kFloat32 = 1, kInt64 = 7 };

struct Tensor {
    std::vector<std::int64_t> shape;
    int elem_type = kFloat32;
    std::vector<float> f;
    std::vector<std::int64_t> i;

    std::size_t numel() const {
        std::size_t n = 1;
        for (auto d : shape) n *= static_cast<std::size_t>(d);
        return n;
    }
};

struct Attribute {
    std::string name;
    int type = 0;  // AttributeProto.AttributeType
    float f = 0.0f;
    std::int64_t i = 0;
    std::string s;
    Tensor t;
    std::vector<float> floats;
    std::vector<std::int64_t> ints;
};

struct Node {
    std::string op_type;
    std::string name;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::map<std::string, Attribute> attrs;

    const Attribute* attr(const std::string& key) const {
        auto it = attrs.find(key);
        return it == attrs.end() ? nullptr : &it->second;
    }
    std::int64_t attr_i(const std::string& key, std::int64_t dflt) const {
        const Attribute* a = attr(key);
        return a ? a->i : dflt;
    }
    float attr_f(const std::string& key, float dflt) const {
        const Attribute* a = attr(key);
        return a ? a->f : dflt;
    }
    std::vector<std::int64_t> attr_ints(const std::string& key) const {
        const Attribute* a = attr(key);
        return a ? a->ints : std::vector<std::int64_t>{};
    }
};

// Declared graph input/output: -1 marks a dynamic (named) dimension.
struct ValueSpec {
    std::string name;
    int elem_type = 0;
    std::vector<std::int64_t> dims;
};

struct Model {
    std::int64_t ir_version = 0;
    std::int64_t opset_version = 0;
    std::vector<Node> nodes;
    std::unordered_map<std::string, Tensor> initializers;
    std::vector<ValueSpec> inputs;   // excludes initializers
    std::vector<ValueSpec> outputs;
};

// ---------------------------------------------------------------------------
// Parsing

namespace onnx_detail {

inline Tensor parse_tensor(pb::Cursor c) {
    Tensor t;
    std::string raw;
    while (!c.done()) {
        auto [field, wire] = c.tag();
        switch (field) {
            case 1:  // dims
                if (wire == 2) {
                    pb::Cursor packed = c.sub();
                    while (!packed.done()) t.shape.push_back(static_cast<std::int64_t>(packed.varint()));
                } else {
                    t.shape.push_back(static_cast<std::int64_t>(c.varint()));
                }
                break;
            case 2: t.elem_type = static_cast<int>(c.varint()); break;
            case 4:  // float_data
                if (wire == 2) {
                    pb::Cursor packed = c.sub();
                    while (!packed.done()) t.f.push_back(packed.fixed32());
                } else {
                    t.f.push_back(c.fixed32());
                }
                break;
            case 7:  // int64_data
                if (wire == 2) {
                    pb::Cursor packed = c.sub();
                    while (!packed.done()) t.i.push_back(static_cast<std::int64_t>(packed.varint()));
                } else {
                    t.i.push_back(static_cast<std::int64_t>(c.varint()));
                }
                break;
            case 9: raw = c.bytes(); break;  // raw_data
            case 8: c.bytes(); break;        // name (unused here)
            default: c.skip(wire); break;
        }
    }
    if (!raw.empty()) {
        if (t.elem_type == kFloat32) {
            t.f.resize(raw.size() / 4);
            std::memcpy(t.f.data(), raw.data(), t.f.size() * 4);
        } else if (t.elem_type == kInt64) {
            t.i.resize(raw.size() / 8);
            std::memcpy(t.i.data(), raw.data(), t.i.size() * 8);
        } else {
            raise(Errc::UnsupportedOperator,
                  "encoder file uses tensor element type " + std::to_string(t.elem_type) +
                      "; only float32 and int64 are supported");
        }
    }
    return t;
}

inline Attribute parse_attribute(pb::Cursor c) {
    Attribute a;
    while (!c.done()) {
        auto [field, wire] = c.tag();
        switch (field) {
            case 1: a.name = c.bytes(); break;
            case 2: a.f = c.fixed32(); break;
            case 3: a.i = static_cast<std::int64_t>(c.varint()); break;
            case 4: a.s = c.bytes(); break;
            case 5: a.t = parse_tensor(c.sub()); break;
            case 7:
                if (wire == 2) {
                    pb::Cursor packed = c.sub();
                    while (!packed.done()) a.floats.push_back(packed.fixed32());
                } else {
                    a.floats.push_back(c.fixed32());
                }
                break;
            case 8:
                if (wire == 2) {
                    pb::Cursor packed = c.sub();
                    while (!packed.done()) a.ints.push_back(static_cast<std::int64_t>(packed.varint()));
                } else {
                    a.ints.push_back(static_cast<std::int64_t>(c.varint()));
                }
                break;
            case 20: a.type = static_cast<int>(c.varint()); break;
            default: c.skip(wire); break;
        }
    }
    return a;
}

inline Node parse_node(pb::Cursor c) {
    Node n;
    while (!c.done()) {
        auto [field, wire] = c.tag();
        switch (field) {
            case 1: n.inputs.push_back(c.bytes()); break;
            case 2: n.outputs.push_back(c.bytes()); break;
            case 3: n.name = c.bytes(); break;
            case 4: n.op_type = c.bytes(); break;
            case 5: {
                Attribute a = parse_attribute(c.sub());
                n.attrs[a.name] = std::move(a);
                break;
            }
            default: c.skip(wire); break;
        }
    }
    return n;
}

inline ValueSpec parse_value_info(pb::Cursor c) {
    ValueSpec v;
    while (!c.done()) {
        auto [field, wire] = c.tag();
        if (field == 1) {
            v.name = c.bytes();
        } else if (field == 2) {  // TypeProto
            pb::Cursor tc = c.sub();
            while (!tc.done()) {
                auto [tf, tw] = tc.tag();
                if (tf == 1) {  // tensor_type
                    pb::Cursor tt = tc.sub();
                    while (!tt.done()) {
                        auto [ttf, ttw] = tt.tag();
                        if (ttf == 1) {
                            v.elem_type = static_cast<int>(tt.varint());
                        } else if (ttf == 2) {  // shape
                            pb::Cursor sc = tt.sub();
                            while (!sc.done()) {
                                auto [sf, sw] = sc.tag();
                                if (sf == 1) {  // dim
                                    pb::Cursor dc = sc.sub();
                                    std::int64_t dim = -1;
                                    while (!dc.done()) {
                                        auto [df, dw] = dc.tag();
                                        if (df == 1) dim = static_cast<std::int64_t>(dc.varint());
                                        else dc.skip(dw);  // dim_param -> dynamic
                                    }
                                    v.dims.push_back(dim);
                                } else {
                                    sc.skip(sw);
                                }
                            }
                        } else {
                            tt.skip(ttw);
                        }
                    }
                } else {
                    tc.skip(tw);
                }
            }
        } else {
            c.skip(wire);
        }
    }
    return v;
}

inline void parse_graph(pb::Cursor c, Model& m) {
    std::vector<std::pair<std::string, Tensor>> inits;
    std::vector<ValueSpec> raw_inputs;
    while (!c.done()) {
        auto [field, wire] = c.tag();
        switch (field) {
            case 1: m.nodes.push_back(parse_node(c.sub())); break;
            case 5: {
                // Re-parse for the name this time.
                pb::Cursor tc = c.sub();
                pb::Cursor copy = tc;
                std::string name;
                while (!tc.done()) {
                    auto [tf, tw] = tc.tag();
                    if (tf == 8) name = tc.bytes();
                    else tc.skip(tw);
                }
                inits.emplace_back(name, parse_tensor(copy));
                break;
            }
            case 11: raw_inputs.push_back(parse_value_info(c.sub())); break;
            case 12: m.outputs.push_back(parse_value_info(c.sub())); break;
            default: c.skip(wire); break;
        }
    }
    for (auto& [name, t] : inits) m.initializers[name] = std::move(t);
    for (auto& v : raw_inputs)
        if (!m.initializers.count(v.name)) m.inputs.push_back(v);
}

}  // namespace onnx_detail

inline Model parse_model(const std::string& bytes) {
    pb::Cursor c{reinterpret_cast<const std::uint8_t*>(bytes.data()),
                 reinterpret_cast<const std::uint8_t*>(bytes.data()) + bytes.size()};
    Model m;
    bool have_graph = false;
    while (!c.done()) {
        auto [field, wire] = c.tag();
        switch (field) {
            case 1: m.ir_version = static_cast<std::int64_t>(c.varint()); break;
            case 7:
                onnx_detail::parse_graph(c.sub(), m);
                have_graph = true;
                break;
            case 8: {  // opset_import
                pb::Cursor oc = c.sub();
                while (!oc.done()) {
                    auto [of, ow] = oc.tag();
                    if (of == 2) m.opset_version = static_cast<std::int64_t>(oc.varint());
                    else oc.skip(ow);
                }
                break;
            }
            default: c.skip(wire); break;
        }
    }
    require(have_graph, Errc::SchemaViolation, "encoder file contains no graph");
    return m;
}

inline Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::FileMissing, "encoder file not found: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_model(bytes);
}

// ---------------------------------------------------------------------------
// Execution

namespace onnx_detail {

inline const char* kSupportedOps[] = {
    "Conv",    "MatMul",  "Gemm",      "Add",     "Sub",       "Mul",
    "Div",     "Sqrt",    "Pow",       "Erf",     "Exp",       "Neg",
    "Relu",    "Tanh",    "Sigmoid",   "Softmax", "Transpose", "Reshape",
    "Squeeze", "Unsqueeze", "Concat",  "ReduceMean", "Constant", "Identity",
    "LayerNormalization",
};

inline std::vector<std::int64_t> broadcast_shape(const std::vector<std::int64_t>& a,
                                                 const std::vector<std::int64_t>& b) {
    const std::size_t rank = std::max(a.size(), b.size());
    std::vector<std::int64_t> out(rank);
    for (std::size_t k = 0; k < rank; ++k) {
        const std::int64_t da = k < rank - a.size() ? 1 : a[k - (rank - a.size())];
        const std::int64_t db = k < rank - b.size() ? 1 : b[k - (rank - b.size())];
        require(da == db || da == 1 || db == 1, Errc::InferenceFailure,
                "incompatible shapes for elementwise broadcast");
        out[k] = std::max(da, db);
    }
    return out;
}

inline std::vector<std::size_t> row_strides(const std::vector<std::int64_t>& shape) {
    std::vector<std::size_t> s(shape.size(), 1);
    for (std::size_t k = shape.size(); k-- > 1;)
        s[k - 1] = s[k] * static_cast<std::size_t>(shape[k]);
    return s;
}

// Offset of `index` (in the broadcast shape) within a tensor of `shape`.
inline std::size_t broadcast_offset(const std::vector<std::int64_t>& index,
                                    const std::vector<std::int64_t>& shape,
                                    const std::vector<std::size_t>& strides) {
    const std::size_t pad = index.size() - shape.size();
    std::size_t off = 0;
    for (std::size_t k = 0; k < shape.size(); ++k) {
        const std::int64_t i = shape[k] == 1 ? 0 : index[pad + k];
        off += static_cast<std::size_t>(i) * strides[k];
    }
    return off;
}

}  // namespace onnx_detail

class Runtime {
public:
    explicit Runtime(Model model) : model_(std::move(model)) {
        for (const auto& n : model_.nodes) {
            bool ok = false;
            for (const char* op : onnx_detail::kSupportedOps)
                if (n.op_type == op) { ok = true; break; }
            if (!ok)
                raise(Errc::UnsupportedOperator,
                      "encoder graph uses operator '" + n.op_type + "' outside the supported subset");
        }
    }

    const Model& model() const { return model_; }

    std::map<std::string, Tensor> run(const std::map<std::string, Tensor>& feeds) {
        env_.clear();
        for (const auto& [name, t] : model_.initializers) env_[name] = t;
        for (const auto& [name, t] : feeds) env_[name] = t;
        for (const auto& node : model_.nodes) exec(node);
        std::map<std::string, Tensor> out;
        for (const auto& spec : model_.outputs) {
            auto it = env_.find(spec.name);
            require(it != env_.end(), Errc::InferenceFailure, "graph output '" + spec.name + "' never produced");
            out[spec.name] = it->second;
        }
        return out;
    }

private:
    Model model_;
    std::unordered_map<std::string, Tensor> env_;

    const Tensor& in(const Node& n, std::size_t k) {
        require(k < n.inputs.size() && !n.inputs[k].empty(), Errc::InferenceFailure,
                "node '" + n.op_type + "' missing input " + std::to_string(k));
        auto it = env_.find(n.inputs[k]);
        require(it != env_.end(), Errc::InferenceFailure,
                "node '" + n.op_type + "' input '" + n.inputs[k] + "' not materialized");
        return it->second;
    }

    void out(const Node& n, Tensor t, std::size_t k = 0) {
        require(k < n.outputs.size(), Errc::InferenceFailure, "node output index out of range");
        env_[n.outputs[k]] = std::move(t);
    }

    static std::int64_t norm_axis(std::int64_t axis, std::size_t rank) {
        if (axis < 0) axis += static_cast<std::int64_t>(rank);
        require(axis >= 0 && axis < static_cast<std::int64_t>(rank), Errc::InferenceFailure,
                "axis out of range");
        return axis;
    }

    void exec(const Node& n) {
        const std::string& op = n.op_type;
        if (op == "Constant") {
            const Attribute* a = n.attr("value");
            require(a != nullptr, Errc::UnsupportedOperator, "Constant without a 'value' tensor");
            out(n, a->t);
        } else if (op == "Identity") {
            out(n, in(n, 0));
        } else if (op == "Relu" || op == "Tanh" || op == "Sigmoid" || op == "Erf" || op == "Sqrt" ||
                   op == "Exp" || op == "Neg") {
            Tensor t = in(n, 0);
            for (float& v : t.f) {
                if (op == "Relu") v = v > 0.0f ? v : 0.0f;
                else if (op == "Tanh") v = std::tanh(v);
                else if (op == "Sigmoid") v = 1.0f / (1.0f + std::exp(-v));
                else if (op == "Erf") v = std::erf(v);
                else if (op == "Sqrt") v = std::sqrt(v);
                else if (op == "Exp") v = std::exp(v);
                else v = -v;
            }
            out(n, std::move(t));
        } else if (op == "Add" || op == "Sub" || op == "Mul" || op == "Div" || op == "Pow") {
            exec_elementwise(n);
        } else if (op == "MatMul") {
            exec_matmul(n);
        } else if (op == "Gemm") {
            exec_gemm(n);
        } else if (op == "Conv") {
            exec_conv(n);
        } else if (op == "Softmax") {
            exec_softmax(n);
        } else if (op == "Transpose") {
            exec_transpose(n);
        } else if (op == "Reshape") {
            exec_reshape(n);
        } else if (op == "Squeeze" || op == "Unsqueeze") {
            exec_squeeze(n, op == "Unsqueeze");
        } else if (op == "Concat") {
            exec_concat(n);
        } else if (op == "ReduceMean") {
            exec_reduce_mean(n);
        } else if (op == "LayerNormalization") {
            exec_layer_norm(n);
        } else {
            raise(Errc::UnsupportedOperator, "operator '" + op + "' outside the supported subset");
        }
    }

    void exec_elementwise(const Node& n) {
        using namespace onnx_detail;
        const Tensor& a = in(n, 0);
        const Tensor& b = in(n, 1);
        Tensor r;
        r.shape = broadcast_shape(a.shape, b.shape);
        r.f.resize(r.numel());
        const auto sa = row_strides(a.shape);
        const auto sb = row_strides(b.shape);
        std::vector<std::int64_t> idx(r.shape.size(), 0);
        for (std::size_t flat = 0; flat < r.f.size(); ++flat) {
            const float x = a.f[broadcast_offset(idx, a.shape, sa)];
            const float y = b.f[broadcast_offset(idx, b.shape, sb)];
            float v;
            if (n.op_type == "Add") v = x + y;
            else if (n.op_type == "Sub") v = x - y;
            else if (n.op_type == "Mul") v = x * y;
            else if (n.op_type == "Div") v = x / y;
            else v = std::pow(x, y);
            r.f[flat] = v;
            for (std::size_t k = r.shape.size(); k-- > 0;) {
                if (++idx[k] < r.shape[k]) break;
                idx[k] = 0;
            }
        }
        out(n, std::move(r));
    }

    void exec_matmul(const Node& n) {
        const Tensor& a = in(n, 0);
        const Tensor& b = in(n, 1);
        require(a.shape.size() >= 2 && b.shape.size() >= 2, Errc::InferenceFailure,
                "MatMul expects rank >= 2");
        const auto m = a.shape[a.shape.size() - 2];
        const auto k = a.shape[a.shape.size() - 1];
        const auto kb = b.shape[b.shape.size() - 2];
        const auto nn = b.shape[b.shape.size() - 1];
        require(k == kb, Errc::InferenceFailure, "MatMul inner dimensions disagree");

        std::size_t batch_a = 1, batch_b = 1;
        for (std::size_t d = 0; d + 2 < a.shape.size(); ++d) batch_a *= static_cast<std::size_t>(a.shape[d]);
        for (std::size_t d = 0; d + 2 < b.shape.size(); ++d) batch_b *= static_cast<std::size_t>(b.shape[d]);
        require(batch_a == batch_b || batch_b == 1 || batch_a == 1, Errc::InferenceFailure,
                "MatMul batch dimensions disagree");
        const std::size_t batch = std::max(batch_a, batch_b);

        Tensor r;
        if (a.shape.size() >= b.shape.size())
            r.shape.assign(a.shape.begin(), a.shape.end() - 2);
        else
            r.shape.assign(b.shape.begin(), b.shape.end() - 2);
        r.shape.push_back(m);
        r.shape.push_back(nn);
        r.f.resize(r.numel());

        const std::size_t a_step = static_cast<std::size_t>(m * k);
        const std::size_t b_step = static_cast<std::size_t>(kb * nn);
        for (std::size_t bt = 0; bt < batch; ++bt) {
            const float* pa = a.f.data() + (batch_a == 1 ? 0 : bt * a_step);
            const float* pb = b.f.data() + (batch_b == 1 ? 0 : bt * b_step);
            float* pr = r.f.data() + bt * static_cast<std::size_t>(m * nn);
            for (std::int64_t i = 0; i < m; ++i)
                for (std::int64_t j = 0; j < nn; ++j) {
                    double acc = 0.0;
                    for (std::int64_t t = 0; t < k; ++t)
                        acc += static_cast<double>(pa[i * k + t]) * pb[t * nn + j];
                    pr[i * nn + j] = static_cast<float>(acc);
                }
        }
        out(n, std::move(r));
    }

    void exec_gemm(const Node& n) {
        const Tensor& a = in(n, 0);
        const Tensor& b = in(n, 1);
        const float alpha = n.attr_f("alpha", 1.0f);
        const float beta = n.attr_f("beta", 1.0f);
        const bool ta = n.attr_i("transA", 0) != 0;
        const bool tb = n.attr_i("transB", 0) != 0;
        require(a.shape.size() == 2 && b.shape.size() == 2, Errc::InferenceFailure, "Gemm expects matrices");
        const auto m = ta ? a.shape[1] : a.shape[0];
        const auto k = ta ? a.shape[0] : a.shape[1];
        const auto kb = tb ? b.shape[1] : b.shape[0];
        const auto nn = tb ? b.shape[0] : b.shape[1];
        require(k == kb, Errc::InferenceFailure, "Gemm inner dimensions disagree");

        Tensor r;
        r.shape = {m, nn};
        r.f.resize(r.numel());
        for (std::int64_t i = 0; i < m; ++i)
            for (std::int64_t j = 0; j < nn; ++j) {
                double acc = 0.0;
                for (std::int64_t t = 0; t < k; ++t) {
                    const float av = ta ? a.f[t * m + i] : a.f[i * k + t];
                    const float bv = tb ? b.f[j * k + t] : b.f[t * nn + j];
                    acc += static_cast<double>(av) * bv;
                }
                r.f[i * nn + j] = alpha * static_cast<float>(acc);
            }
        if (n.inputs.size() > 2 && !n.inputs[2].empty()) {
            const Tensor& c = in(n, 2);
            const auto sc = onnx_detail::row_strides(c.shape);
            std::vector<std::int64_t> idx(2, 0);
            for (std::size_t flat = 0; flat < r.f.size(); ++flat) {
                r.f[flat] += beta * c.f[onnx_detail::broadcast_offset(idx, c.shape, sc)];
                if (++idx[1] >= nn) { idx[1] = 0; ++idx[0]; }
            }
        }
        out(n, std::move(r));
    }

    void exec_conv(const Node& n) {
        const Tensor& x = in(n, 0);
        const Tensor& w = in(n, 1);
        require(x.shape.size() == 3 && w.shape.size() == 3, Errc::UnsupportedOperator,
                "Conv support is limited to 1-D (rank-3 tensors)");
        require(n.attr_i("group", 1) == 1, Errc::UnsupportedOperator, "grouped Conv is not supported");
        const auto dil = n.attr_ints("dilations");
        require(dil.empty() || dil[0] == 1, Errc::UnsupportedOperator, "dilated Conv is not supported");
        const auto strides = n.attr_ints("strides");
        const std::int64_t stride = strides.empty() ? 1 : strides[0];
        const auto pads = n.attr_ints("pads");
        const std::int64_t pad_l = pads.empty() ? 0 : pads[0];
        const std::int64_t pad_r = pads.size() > 1 ? pads[1] : pad_l;

        const auto batch = x.shape[0], cin = x.shape[1], len = x.shape[2];
        const auto cout = w.shape[0], kcin = w.shape[1], kern = w.shape[2];
        require(batch == 1, Errc::UnsupportedOperator, "Conv supports batch size 1");
        require(cin == kcin, Errc::InferenceFailure, "Conv channel mismatch");
        const std::int64_t len_out = (len + pad_l + pad_r - kern) / stride + 1;
        require(len_out > 0, Errc::InferenceFailure, "Conv input shorter than its kernel");

        const float* bias = nullptr;
        if (n.inputs.size() > 2 && !n.inputs[2].empty()) bias = in(n, 2).f.data();

        Tensor r;
        r.shape = {1, cout, len_out};
        r.f.resize(r.numel());
        for (std::int64_t oc = 0; oc < cout; ++oc) {
            for (std::int64_t t = 0; t < len_out; ++t) {
                double acc = bias ? bias[oc] : 0.0;
                const std::int64_t start = t * stride - pad_l;
                for (std::int64_t ic = 0; ic < cin; ++ic) {
                    const float* xp = x.f.data() + ic * len;
                    const float* wp = w.f.data() + (oc * kcin + ic) * kern;
                    for (std::int64_t j = 0; j < kern; ++j) {
                        const std::int64_t src = start + j;
                        if (src >= 0 && src < len) acc += static_cast<double>(xp[src]) * wp[j];
                    }
                }
                r.f[(oc * len_out) + t] = static_cast<float>(acc);
            }
        }
        out(n, std::move(r));
    }

    void exec_softmax(const Node& n) {
        Tensor t = in(n, 0);
        const auto axis = norm_axis(n.attr_i("axis", -1), t.shape.size());
        require(axis == static_cast<std::int64_t>(t.shape.size()) - 1, Errc::UnsupportedOperator,
                "Softmax support is limited to the last axis");
        const auto width = static_cast<std::size_t>(t.shape.back());
        for (std::size_t base = 0; base < t.f.size(); base += width) {
            float mx = t.f[base];
            for (std::size_t j = 1; j < width; ++j) mx = std::max(mx, t.f[base + j]);
            double sum = 0.0;
            for (std::size_t j = 0; j < width; ++j) {
                t.f[base + j] = std::exp(t.f[base + j] - mx);
                sum += t.f[base + j];
            }
            for (std::size_t j = 0; j < width; ++j)
                t.f[base + j] = static_cast<float>(t.f[base + j] / sum);
        }
        out(n, std::move(t));
    }

    void exec_transpose(const Node& n) {
        const Tensor& x = in(n, 0);
        std::vector<std::int64_t> perm = n.attr_ints("perm");
        if (perm.empty()) {
            perm.resize(x.shape.size());
            for (std::size_t k = 0; k < perm.size(); ++k)
                perm[k] = static_cast<std::int64_t>(perm.size() - 1 - k);
        }
        require(perm.size() == x.shape.size(), Errc::InferenceFailure, "Transpose perm rank mismatch");

        Tensor r;
        r.shape.resize(x.shape.size());
        for (std::size_t k = 0; k < perm.size(); ++k) r.shape[k] = x.shape[static_cast<std::size_t>(perm[k])];
        r.f.resize(x.f.size());
        const auto sx = onnx_detail::row_strides(x.shape);
        const auto sr = onnx_detail::row_strides(r.shape);
        std::vector<std::int64_t> idx(r.shape.size(), 0);
        for (std::size_t flat = 0; flat < r.f.size(); ++flat) {
            std::size_t src = 0;
            for (std::size_t k = 0; k < idx.size(); ++k)
                src += static_cast<std::size_t>(idx[k]) * sx[static_cast<std::size_t>(perm[k])];
            r.f[flat] = x.f[src];
            for (std::size_t k = idx.size(); k-- > 0;) {
                if (++idx[k] < r.shape[k]) break;
                idx[k] = 0;
            }
        }
        out(n, std::move(r));
    }

    void exec_reshape(const Node& n) {
        const Tensor& x = in(n, 0);
        const Tensor& shape_t = in(n, 1);
        require(shape_t.elem_type == kInt64, Errc::InferenceFailure, "Reshape expects an int64 shape");
        std::vector<std::int64_t> shape = shape_t.i;
        std::int64_t known = 1;
        std::int64_t infer_at = -1;
        for (std::size_t k = 0; k < shape.size(); ++k) {
            if (shape[k] == 0) shape[k] = x.shape[k];
            if (shape[k] == -1) {
                require(infer_at < 0, Errc::InferenceFailure, "Reshape with multiple -1 dims");
                infer_at = static_cast<std::int64_t>(k);
            } else {
                known *= shape[k];
            }
        }
        if (infer_at >= 0) shape[static_cast<std::size_t>(infer_at)] = static_cast<std::int64_t>(x.numel()) / known;
        Tensor r = x;
        r.shape = shape;
        require(r.numel() == x.numel(), Errc::InferenceFailure, "Reshape changes element count");
        out(n, std::move(r));
    }

    void exec_squeeze(const Node& n, bool unsqueeze) {
        const Tensor& x = in(n, 0);
        std::vector<std::int64_t> axes = n.attr_ints("axes");
        if (axes.empty() && n.inputs.size() > 1 && !n.inputs[1].empty()) axes = in(n, 1).i;
        Tensor r = x;
        if (unsqueeze) {
            require(!axes.empty(), Errc::InferenceFailure, "Unsqueeze without axes");
            std::vector<std::int64_t> shape = x.shape;
            const std::size_t out_rank = x.shape.size() + axes.size();
            for (std::int64_t ax : axes) {
                if (ax < 0) ax += static_cast<std::int64_t>(out_rank);
                shape.insert(shape.begin() + ax, 1);
            }
            r.shape = shape;
        } else {
            std::vector<std::int64_t> shape;
            for (std::size_t k = 0; k < x.shape.size(); ++k) {
                bool drop;
                if (axes.empty()) {
                    drop = x.shape[k] == 1;
                } else {
                    drop = false;
                    for (std::int64_t ax : axes) {
                        if (ax < 0) ax += static_cast<std::int64_t>(x.shape.size());
                        if (ax == static_cast<std::int64_t>(k)) drop = true;
                    }
                    if (drop)
                        require(x.shape[k] == 1, Errc::InferenceFailure, "Squeeze of a non-unit axis");
                }
                if (!drop) shape.push_back(x.shape[k]);
            }
            r.shape = shape;
        }
        out(n, std::move(r));
    }

    void exec_concat(const Node& n) {
        require(!n.inputs.empty(), Errc::InferenceFailure, "Concat without inputs");
        const Tensor& first = in(n, 0);
        const auto axis = norm_axis(n.attr_i("axis", 0), first.shape.size());
        Tensor r;
        r.shape = first.shape;
        std::int64_t total = 0;
        for (std::size_t k = 0; k < n.inputs.size(); ++k) total += in(n, k).shape[static_cast<std::size_t>(axis)];
        r.shape[static_cast<std::size_t>(axis)] = total;
        r.f.resize(r.numel());

        std::size_t outer = 1, inner = 1;
        for (std::size_t d = 0; d < static_cast<std::size_t>(axis); ++d)
            outer *= static_cast<std::size_t>(first.shape[d]);
        for (std::size_t d = static_cast<std::size_t>(axis) + 1; d < first.shape.size(); ++d)
            inner *= static_cast<std::size_t>(first.shape[d]);

        std::size_t axis_off = 0;
        for (std::size_t k = 0; k < n.inputs.size(); ++k) {
            const Tensor& t = in(n, k);
            const auto t_axis = static_cast<std::size_t>(t.shape[static_cast<std::size_t>(axis)]);
            for (std::size_t o = 0; o < outer; ++o)
                for (std::size_t a = 0; a < t_axis; ++a)
                    std::memcpy(r.f.data() + ((o * static_cast<std::size_t>(total) + axis_off + a) * inner),
                                t.f.data() + ((o * t_axis + a) * inner), inner * sizeof(float));
            axis_off += t_axis;
        }
        out(n, std::move(r));
    }

    void exec_reduce_mean(const Node& n) {
        const Tensor& x = in(n, 0);
        std::vector<std::int64_t> axes = n.attr_ints("axes");
        if (axes.empty() && n.inputs.size() > 1 && !n.inputs[1].empty()) axes = in(n, 1).i;
        require(!axes.empty(), Errc::UnsupportedOperator, "ReduceMean over all axes is not supported");
        const bool keepdims = n.attr_i("keepdims", 1) != 0;
        std::vector<bool> reduce(x.shape.size(), false);
        for (std::int64_t ax : axes) reduce[static_cast<std::size_t>(norm_axis(ax, x.shape.size()))] = true;

        std::vector<std::int64_t> out_shape;
        for (std::size_t k = 0; k < x.shape.size(); ++k) {
            if (reduce[k]) {
                if (keepdims) out_shape.push_back(1);
            } else {
                out_shape.push_back(x.shape[k]);
            }
        }
        if (out_shape.empty()) out_shape.push_back(1);

        Tensor r;
        r.shape = out_shape;
        r.f.assign(r.numel(), 0.0f);
        std::vector<double> acc(r.numel(), 0.0);

        const auto sx = onnx_detail::row_strides(x.shape);
        std::vector<std::int64_t> idx(x.shape.size(), 0);
        std::size_t reduced_count = 1;
        for (std::size_t k = 0; k < x.shape.size(); ++k)
            if (reduce[k]) reduced_count *= static_cast<std::size_t>(x.shape[k]);

        // Strides of the kept axes within the output tensor.
        std::vector<std::size_t> out_stride(x.shape.size(), 0);
        {
            std::size_t s = 1;
            for (std::size_t k = x.shape.size(); k-- > 0;) {
                if (!reduce[k]) {
                    out_stride[k] = s;
                    s *= static_cast<std::size_t>(x.shape[k]);
                }
            }
        }
        for (std::size_t flat = 0; flat < x.f.size(); ++flat) {
            std::size_t off = 0;
            for (std::size_t k = 0; k < idx.size(); ++k)
                if (!reduce[k]) off += static_cast<std::size_t>(idx[k]) * out_stride[k];
            acc[off] += x.f[flat];
            for (std::size_t k = idx.size(); k-- > 0;) {
                if (++idx[k] < x.shape[k]) break;
                idx[k] = 0;
            }
        }
        for (std::size_t k = 0; k < acc.size(); ++k)
            r.f[k] = static_cast<float>(acc[k] / static_cast<double>(reduced_count));
        out(n, std::move(r));
    }

    void exec_layer_norm(const Node& n) {
        const Tensor& x = in(n, 0);
        const Tensor& scale = in(n, 1);
        const float* bias = nullptr;
        if (n.inputs.size() > 2 && !n.inputs[2].empty()) bias = in(n, 2).f.data();
        const auto axis = norm_axis(n.attr_i("axis", -1), x.shape.size());
        require(axis == static_cast<std::int64_t>(x.shape.size()) - 1, Errc::UnsupportedOperator,
                "LayerNormalization support is limited to the last axis");
        const float eps = n.attr_f("epsilon", 1e-5f);
        const auto width = static_cast<std::size_t>(x.shape.back());
        require(scale.f.size() == width, Errc::InferenceFailure, "LayerNormalization scale width mismatch");

        Tensor r = x;
        for (std::size_t base = 0; base < r.f.size(); base += width) {
            double mean = 0.0;
            for (std::size_t j = 0; j < width; ++j) mean += r.f[base + j];
            mean /= static_cast<double>(width);
            double var = 0.0;
            for (std::size_t j = 0; j < width; ++j) {
                const double d = r.f[base + j] - mean;
                var += d * d;
            }
            var /= static_cast<double>(width);
            const double inv = 1.0 / std::sqrt(var + eps);
            for (std::size_t j = 0; j < width; ++j) {
                double v = (r.f[base + j] - mean) * inv * scale.f[j];
                if (bias) v += bias[j];
                r.f[base + j] = static_cast<float>(v);
            }
        }
        out(n, std::move(r));
    }
};

// ---------------------------------------------------------------------------
// Encoder contract

inline constexpr const char* kInputName = "waveform";
inline constexpr const char* kOutputName = "hidden_states";

// Declared contract: input "waveform" float32 [1 x T], output
// "hidden_states" float32 [1 x n_t x 768]. The time axes may be dynamic.
inline void check_encoder_contract(const Model& m) {
    require(m.inputs.size() == 1, Errc::SchemaViolation,
            "encoder graph must have exactly one non-initializer input, found " +
                std::to_string(m.inputs.size()));
    const ValueSpec& in = m.inputs.front();
    require(in.name == kInputName, Errc::SchemaViolation,
            "encoder input must be named '" + std::string(kInputName) + "', found '" + in.name + "'");
    require(in.elem_type == kFloat32, Errc::SchemaViolation, "encoder input must be float32");
    require(in.dims.size() == 2, Errc::SchemaViolation, "encoder input must have shape [1 x T]");
    require(in.dims[0] == 1 || in.dims[0] == -1, Errc::SchemaViolation, "encoder input batch must be 1");

    const ValueSpec* found = nullptr;
    for (const auto& o : m.outputs)
        if (o.name == kOutputName) found = &o;
    require(found != nullptr, Errc::SchemaViolation,
            "encoder graph must declare an output named '" + std::string(kOutputName) + "'");
    require(found->elem_type == kFloat32, Errc::SchemaViolation, "encoder output must be float32");
    require(found->dims.size() == 3, Errc::SchemaViolation,
            "encoder output must have shape [1 x n_t x 768]");
    require(found->dims[0] == 1 || found->dims[0] == -1, Errc::SchemaViolation,
            "encoder output batch must be 1");
    require(found->dims[2] == kEmbeddingDim || found->dims[2] == -1, Errc::SchemaViolation,
            "encoder hidden size must be 768, declared " + std::to_string(found->dims[2]));
}

class OnnxEncoderBackend final : public EncoderBackend {
public:
    explicit OnnxEncoderBackend(const std::string& path)
        : path_(path), runtime_(load_model(path)) {
        check_encoder_contract(runtime_.model());
    }

    std::string name() const override { return "onnx:" + path_; }

    Matrix encode(std::span<const double> chunk) override {
        Tensor wave;
        wave.elem_type = kFloat32;
        wave.shape = {1, static_cast<std::int64_t>(chunk.size())};
        wave.f.resize(chunk.size());
        for (std::size_t k = 0; k < chunk.size(); ++k) wave.f[k] = static_cast<float>(chunk[k]);

        auto outputs = runtime_.run({{kInputName, std::move(wave)}});
        const Tensor& h = outputs.at(kOutputName);
        require(h.shape.size() == 3 && h.shape[0] == 1 && h.shape[2] == kEmbeddingDim,
                Errc::InferenceFailure, "encoder produced hidden states outside the declared contract");

        Matrix m(static_cast<std::size_t>(h.shape[1]), kEmbeddingDim);
        for (std::size_t k = 0; k < m.data.size(); ++k) m.data[k] = static_cast<double>(h.f[k]);
        return m;
    }

private:
    std::string path_;
    Runtime runtime_;
};

}  // namespace adspeech::onnx
