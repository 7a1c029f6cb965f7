#include "neucodex/model_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <set>

#include "neucodex/rng.hpp"

namespace neucodex {

namespace {

constexpr char kMagic[8] = {'N', 'C', 'W', 'T', 'S', '0', '0', '1'};

void put_u16(std::vector<uint8_t> &out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void put_u32(std::vector<uint8_t> &out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void put_f32(std::vector<uint8_t> &out, float v) {
    put_u32(out, std::bit_cast<uint32_t>(v));
}

// Cursor with bounds checking; truncation is an integrity failure here
// (storage, not wire).
struct Reader {
    std::span<const uint8_t> buf;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > buf.size())
            throw IntegrityError("weights container truncated");
    }
    uint8_t u8() {
        need(1);
        return buf[pos++];
    }
    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint16_t>(buf[pos] << 8 | buf[pos + 1]);
        pos += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = static_cast<uint32_t>(buf[pos]) << 24 |
                     static_cast<uint32_t>(buf[pos + 1]) << 16 |
                     static_cast<uint32_t>(buf[pos + 2]) << 8 |
                     static_cast<uint32_t>(buf[pos + 3]);
        pos += 4;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    std::string str(size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char *>(buf.data() + pos), n);
        pos += n;
        return s;
    }
};

} // namespace

uint32_t crc32_ieee(std::span<const uint8_t> bytes) {
    static const auto table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k)
                c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    uint32_t crc = 0xFFFFFFFFu;
    for (uint8_t b : bytes)
        crc = table[(crc ^ b) & 0xFFu] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

uint32_t container_crc(std::span<const uint8_t> container_bytes) {
    if (container_bytes.size() < 4)
        throw IntegrityError("weights container truncated");
    Reader r{container_bytes, container_bytes.size() - 4};
    return r.u32();
}

std::vector<uint8_t> save_container(std::span<const WeightEntry> entries) {
    std::set<std::string> seen;
    std::vector<uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 8);
    put_u32(out, static_cast<uint32_t>(entries.size()));
    for (const WeightEntry &e : entries) {
        if (!seen.insert(e.name).second)
            throw IntegrityError("duplicate entry name '" + e.name + "'");
        if (e.name.size() > 0xFFFF)
            throw IntegrityError("entry name too long");
        if (e.values.size() != e.shape.elements())
            throw IntegrityError("entry '" + e.name + "' value count mismatch");
        put_u16(out, static_cast<uint16_t>(e.name.size()));
        out.insert(out.end(), e.name.begin(), e.name.end());
        out.push_back(0); // dtype float32
        out.push_back(static_cast<uint8_t>(e.shape.rank()));
        for (uint32_t d : e.shape.dims())
            put_u32(out, d);
        for (float v : e.values)
            put_f32(out, v);
    }
    put_u32(out, crc32_ieee(out));
    return out;
}

std::vector<WeightEntry> load_container(std::span<const uint8_t> bytes) {
    if (bytes.size() < 16)
        throw IntegrityError("weights container truncated");
    if (std::memcmp(bytes.data(), kMagic, 8) != 0)
        throw IntegrityError("weights container: bad magic");
    const uint32_t stored = container_crc(bytes);
    const uint32_t actual = crc32_ieee(bytes.subspan(0, bytes.size() - 4));
    if (stored != actual)
        throw IntegrityError("weights container: CRC mismatch");

    Reader r{bytes.subspan(0, bytes.size() - 4), 8};
    const uint32_t count = r.u32();
    std::vector<WeightEntry> entries;
    entries.reserve(count);
    std::set<std::string> seen;
    for (uint32_t i = 0; i < count; ++i) {
        WeightEntry e;
        const uint16_t name_len = r.u16();
        e.name = r.str(name_len);
        if (!seen.insert(e.name).second)
            throw IntegrityError("duplicate entry name '" + e.name + "'");
        const uint8_t dtype = r.u8();
        if (dtype != 0)
            throw IntegrityError("entry '" + e.name + "': unknown dtype");
        const uint8_t rank = r.u8();
        std::vector<uint32_t> dims(rank);
        for (auto &d : dims)
            d = r.u32();
        e.shape = Shape(std::move(dims));
        e.values.resize(e.shape.elements());
        for (float &v : e.values)
            v = r.f32();
        entries.push_back(std::move(e));
    }
    if (r.pos != r.buf.size())
        throw IntegrityError("weights container: trailing bytes");
    return entries;
}

void save_container_file(const std::string &path,
                         std::span<const WeightEntry> entries) {
    const std::vector<uint8_t> bytes = save_container(entries);
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw IntegrityError("cannot open " + path + " for writing");
    f.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

std::vector<WeightEntry> load_container_file(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IntegrityError("cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
    return load_container(bytes);
}

namespace {

// Per-tensor stream keyed by (seed, name) so entry order never matters.
void fill_he_uniform(std::vector<float> &values, uint64_t fan_in, uint64_t seed,
                     const std::string &name) {
    SplitMix64 rng(derive_seed(seed, name));
    const float bound = std::sqrt(6.0f / static_cast<float>(fan_in));
    for (float &v : values)
        v = (2.0f * rng.next_float() - 1.0f) * bound;
}

struct NamedTensor {
    std::string name;
    DenseTensor *tensor;
    uint64_t fan_in; // 0 = leave as initialized (bias, BN stats)
};

std::vector<NamedTensor> weight_map(NetworkGraph &net, Bottleneck *codec) {
    std::vector<NamedTensor> out;
    auto add_layer = [&out](const std::string &prefix, LayerSpec &l) {
        switch (l.kind) {
        case LayerKind::Conv2d:
            out.push_back({prefix + ".weight", &l.weight,
                           static_cast<uint64_t>(l.in_ch) * l.kernel * l.kernel});
            out.push_back({prefix + ".bias", &l.bias, 0});
            break;
        case LayerKind::ConvTranspose2d:
            out.push_back({prefix + ".weight", &l.weight,
                           static_cast<uint64_t>(l.in_ch) * l.kernel * l.kernel});
            out.push_back({prefix + ".bias", &l.bias, 0});
            break;
        case LayerKind::Linear:
            out.push_back({prefix + ".weight", &l.weight, l.in_features});
            out.push_back({prefix + ".bias", &l.bias, 0});
            break;
        case LayerKind::BatchNorm:
            out.push_back({prefix + ".bn_scale", &l.bn_scale, 0});
            out.push_back({prefix + ".bn_shift", &l.bn_shift, 0});
            out.push_back({prefix + ".bn_mean", &l.bn_mean, 0});
            out.push_back({prefix + ".bn_var", &l.bn_var, 0});
            break;
        default:
            break;
        }
    };
    for (size_t i = 0; i < net.layers.size(); ++i)
        add_layer("layers." + std::to_string(i), net.layers[i]);
    if (codec) {
        add_layer("bottleneck.encoder.conv", codec->enc_conv);
        add_layer("bottleneck.encoder.bn", codec->enc_bn);
        add_layer("bottleneck.decoder.conv", codec->dec_conv);
        add_layer("bottleneck.decoder.bn", codec->dec_bn);
    }
    return out;
}

} // namespace

std::vector<WeightEntry> seeded_init(const NetworkGraph &net, uint64_t seed) {
    return seeded_init(net, nullptr, seed);
}

// Stand-in for trained BN running stats. He-init conv output on binary
// inputs has variance about 2x the input firing rate, so loading a nominal
// variance of 0.3 (rate ~0.15) renormalizes each stage's drive, and a small
// positive shift keeps membranes charging toward threshold. With identity
// stats the spike activity dies out after two or three layers.
constexpr float kSeededBnShift = 0.45f;
constexpr float kSeededBnVar = 0.3f;

std::vector<WeightEntry> seeded_init(const NetworkGraph &net, const Bottleneck *codec,
                                     uint64_t seed) {
    // Work on copies; callers load the entries back via apply_entries.
    NetworkGraph scratch = net;
    std::unique_ptr<Bottleneck> codec_scratch;
    if (codec)
        codec_scratch = std::make_unique<Bottleneck>(*codec);
    std::vector<WeightEntry> entries;
    for (const NamedTensor &nt : weight_map(scratch, codec_scratch.get())) {
        WeightEntry e;
        e.name = nt.name;
        e.shape = nt.tensor->shape;
        e.values = nt.tensor->data; // zeros / BN identity from finalize()
        auto ends_with = [&e](const char *suffix) {
            const std::string_view s(suffix);
            return e.name.size() > s.size() &&
                   e.name.compare(e.name.size() - s.size(), s.size(), s) == 0;
        };
        if (nt.fan_in > 0)
            fill_he_uniform(e.values, nt.fan_in, seed, nt.name);
        else if (ends_with(".bn_shift"))
            std::fill(e.values.begin(), e.values.end(), kSeededBnShift);
        else if (ends_with(".bn_var"))
            std::fill(e.values.begin(), e.values.end(), kSeededBnVar);
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<WeightEntry> collect_entries(const NetworkGraph &net,
                                         const Bottleneck *codec) {
    NetworkGraph scratch = net;
    std::unique_ptr<Bottleneck> codec_scratch;
    if (codec)
        codec_scratch = std::make_unique<Bottleneck>(*codec);
    std::vector<WeightEntry> entries;
    for (const NamedTensor &nt : weight_map(scratch, codec_scratch.get()))
        entries.push_back({nt.name, nt.tensor->shape, nt.tensor->data});
    return entries;
}

void apply_entries(NetworkGraph &net, Bottleneck *codec,
                   std::span<const WeightEntry> entries) {
    auto targets = weight_map(net, codec);
    for (const WeightEntry &e : entries) {
        bool found = false;
        for (NamedTensor &nt : targets) {
            if (nt.name != e.name)
                continue;
            if (!(nt.tensor->shape == e.shape))
                throw IntegrityError("entry '" + e.name + "' shape " +
                                     e.shape.to_string() + " does not match " +
                                     nt.tensor->shape.to_string());
            nt.tensor->data = e.values;
            found = true;
            break;
        }
        if (!found && e.name.rfind("bottleneck.", 0) == 0 && !codec)
            continue; // container may carry codec weights the edge -B run ignores
        if (!found && !(e.name.rfind("bottleneck.", 0) == 0))
            throw IntegrityError("entry '" + e.name + "' has no target in topology");
    }
}

uint64_t config_digest(const NetworkGraph &net, const Bottleneck *codec,
                       uint32_t weights_crc) {
    std::string text = net.describe();
    if (codec)
        text += codec->cfg.describe();
    uint64_t h = fnv1a64(text);
    h = derive_seed(h, weights_crc);
    return h;
}

} // namespace neucodex
