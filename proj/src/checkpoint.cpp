#include "copycat/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "copycat/errors.hpp"
#include "copycat/hash.hpp"
#include "copycat/version.hpp"

namespace copycat {

std::string hex_digest(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return s;
}

namespace {

using nlohmann::ordered_json;

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

struct Reader {
    std::istream& in;
    std::size_t offset = 0;

    void read(void* dst, std::size_t n, const char* what) {
        in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n)
            throw ParseError("truncated", offset,
                             std::string("checkpoint truncated reading ") + what + " at offset " +
                                 std::to_string(offset));
        offset += n;
    }

    std::uint32_t u32(const char* what) {
        unsigned char b[4];
        read(b, 4, what);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }

    double f64(const char* what) {
        unsigned char b[8];
        read(b, 8, what);
        std::uint64_t bits = 0;
        for (int i = 7; i >= 0; --i) bits = (bits << 8) | b[i];
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
};

std::vector<std::pair<std::string, const Tensor*>> named_params(const Model& m) {
    std::vector<std::pair<std::string, const Tensor*>> out;
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        if (m.weights[i].numel() == 0) continue;
        out.emplace_back("layer" + std::to_string(i) + ".weight", &m.weights[i]);
        out.emplace_back("layer" + std::to_string(i) + ".bias", &m.biases[i]);
    }
    return out;
}

ordered_json layer_to_json(const LayerSpec& s) {
    ordered_json j;
    j["kind"] = layer_kind_name(s.kind);
    switch (s.kind) {
        case LayerKind::Conv2D:
            j["out_channels"] = s.out_channels;
            j["kernel"] = s.kernel;
            j["stride"] = s.stride;
            j["pad"] = s.pad;
            break;
        case LayerKind::MaxPool:
            j["kernel"] = s.kernel;
            j["stride"] = s.stride;
            break;
        case LayerKind::Dense:
            j["out_features"] = s.out_features;
            break;
        default:
            break;
    }
    return j;
}

LayerSpec layer_from_json(const ordered_json& j) {
    LayerSpec s;
    s.kind = layer_kind_from_name(j.at("kind").get<std::string>());
    switch (s.kind) {
        case LayerKind::Conv2D:
            s.out_channels = j.at("out_channels").get<int>();
            s.kernel = j.at("kernel").get<int>();
            s.stride = j.at("stride").get<int>();
            s.pad = j.at("pad").get<int>();
            break;
        case LayerKind::MaxPool:
            s.kernel = j.at("kernel").get<int>();
            s.stride = j.at("stride").get<int>();
            break;
        case LayerKind::Dense:
            s.out_features = j.at("out_features").get<int>();
            break;
        default:
            break;
    }
    return s;
}

}  // namespace

std::string arch_to_json(const Model& m) {
    ordered_json j;
    j["input"] = {m.input.c, m.input.h, m.input.w};
    j["n_classes"] = m.n_classes;
    j["head_start"] = m.head_start;
    j["layers"] = ordered_json::array();
    for (const auto& l : m.layers) j["layers"].push_back(layer_to_json(l));
    return j.dump();
}

void save_model(const Model& m, std::ostream& out) {
    out.write("CPYC", 4);
    put_u32(out, kCheckpointVersion);
    const std::string arch = arch_to_json(m);
    put_u32(out, static_cast<std::uint32_t>(arch.size()));
    out.write(arch.data(), static_cast<std::streamsize>(arch.size()));
    for (const auto& [name, tensor] : named_params(m)) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(out, static_cast<std::uint32_t>(tensor->shape.size()));
        for (int d : tensor->shape) put_u32(out, static_cast<std::uint32_t>(d));
        for (double v : tensor->data) put_f64(out, v);
    }
    if (!out) throw std::runtime_error("checkpoint write failed");
}

void save_model(const Model& m, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    save_model(m, f);
}

Model load_model(std::istream& in) {
    Reader r{in};
    char magic[4];
    r.read(magic, 4, "magic");
    if (std::memcmp(magic, "CPYC", 4) != 0)
        throw ParseError("bad_magic", 0, "not a CPYC checkpoint (bad magic at offset 0)");
    const std::uint32_t version = r.u32("version");
    if (version != kCheckpointVersion)
        throw ParseError("bad_header", 4, "unsupported checkpoint version " + std::to_string(version));
    const std::uint32_t arch_len = r.u32("arch length");
    std::string arch(arch_len, '\0');
    r.read(arch.data(), arch_len, "arch descriptor");

    ordered_json j;
    try {
        j = ordered_json::parse(arch);
    } catch (const std::exception& e) {
        throw ParseError("bad_header", 12, std::string("bad architecture descriptor: ") + e.what());
    }

    Model m;
    m.input = Shape3{j.at("input").at(0).get<int>(), j.at("input").at(1).get<int>(), j.at("input").at(2).get<int>()};
    m.n_classes = j.at("n_classes").get<int>();
    m.head_start = j.at("head_start").get<int>();
    for (const auto& lj : j.at("layers")) m.layers.push_back(layer_from_json(lj));
    m.weights.resize(m.layers.size());
    m.biases.resize(m.layers.size());

    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        const LayerSpec& s = m.layers[i];
        if (s.kind != LayerKind::Conv2D && s.kind != LayerKind::Dense) continue;
        for (int part = 0; part < 2; ++part) {
            const std::string expect =
                "layer" + std::to_string(i) + (part == 0 ? ".weight" : ".bias");
            const std::uint32_t name_len = r.u32("name length");
            std::string name(name_len, '\0');
            r.read(name.data(), name_len, "name");
            if (name != expect)
                throw ParseError("bad_header", r.offset,
                                 "checkpoint parameter order mismatch: expected " + expect + ", got " + name);
            const std::uint32_t rank = r.u32("rank");
            std::vector<int> dims;
            for (std::uint32_t d = 0; d < rank; ++d) dims.push_back(static_cast<int>(r.u32("dim")));
            Tensor t(dims);
            for (auto& v : t.data) v = r.f64("value");
            if (part == 0)
                m.weights[i] = std::move(t);
            else
                m.biases[i] = std::move(t);
        }
    }
    // must be at EOF now
    char extra;
    in.read(&extra, 1);
    if (in.gcount() != 0)
        throw ParseError("count_mismatch", r.offset, "trailing bytes after checkpoint payload");
    return m;
}

Model load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    return load_model(f);
}

}  // namespace copycat
