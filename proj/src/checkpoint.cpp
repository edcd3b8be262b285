#include "dancer/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace fs = std::filesystem;

namespace dancer {

namespace {

const unsigned char kMagic[8] = {'D', 'S', 'Q', '1', 0, 0, 0, 1};
constexpr uint8_t kDtypeF64 = 2;

void put_u32(std::string& buf, uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& buf, uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct Reader {
    std::string data;
    size_t pos = 0;
    std::string file;

    void need(size_t n) const {
        if (pos + n > data.size()) throw DataError(file + ": truncated checkpoint");
    }
    uint8_t u8() {
        need(1);
        return static_cast<uint8_t>(data[pos++]);
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<uint32_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<uint64_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    std::string bytes(size_t n) {
        need(n);
        std::string s = data.substr(pos, n);
        pos += n;
        return s;
    }
};

}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return &t;
    return nullptr;
}

const Tensor& Checkpoint::require(const std::string& name) const {
    const Tensor* t = find(name);
    if (!t) throw DataError("checkpoint missing tensor " + name);
    return *t;
}

void Checkpoint::save(const fs::path& file) const {
    std::string meta = metadata.dump();

    std::string manifest;
    put_u32(manifest, static_cast<uint32_t>(tensors.size()));
    uint64_t offset = 0;
    for (const auto& [name, t] : tensors) {
        put_u32(manifest, static_cast<uint32_t>(name.size()));
        manifest += name;
        manifest.push_back(static_cast<char>(kDtypeF64));
        manifest.push_back(static_cast<char>(t.shape().size()));
        for (int64_t d : t.shape()) put_u64(manifest, static_cast<uint64_t>(d));
        put_u64(manifest, offset);
        offset += static_cast<uint64_t>(t.numel()) * sizeof(real_t);
    }

    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write " + file.string());
    out.write(reinterpret_cast<const char*>(kMagic), sizeof(kMagic));
    std::string len;
    put_u64(len, meta.size());
    out.write(len.data(), static_cast<std::streamsize>(len.size()));
    out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    out.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
    for (const auto& [name, t] : tensors) {
        std::string payload;
        payload.reserve(static_cast<size_t>(t.numel()) * sizeof(real_t));
        for (int64_t i = 0; i < t.numel(); ++i) {
            uint64_t bits;
            real_t v = t[i];
            std::memcpy(&bits, &v, sizeof(bits));
            put_u64(payload, bits);
        }
        out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    }
    if (!out) throw DataError("write failed for " + file.string());
}

Checkpoint Checkpoint::load(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw DataError("cannot read " + file.string());
    Reader r;
    r.file = file.string();
    r.data.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::string magic = r.bytes(sizeof(kMagic));
    if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0)
        throw DataError(r.file + ": not a checkpoint file (bad magic)");

    Checkpoint ckpt;
    uint64_t meta_len = r.u64();
    std::string meta = r.bytes(meta_len);
    try {
        ckpt.metadata = nlohmann::json::parse(meta);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(r.file + ": bad metadata JSON: " + e.what());
    }

    struct Entry {
        std::string name;
        std::vector<int64_t> shape;
        uint64_t offset;
    };
    std::vector<Entry> entries;
    uint32_t count = r.u32();
    for (uint32_t i = 0; i < count; ++i) {
        Entry e;
        e.name = r.bytes(r.u32());
        uint8_t dtype = r.u8();
        if (dtype != kDtypeF64)
            throw DataError(r.file + ": unsupported dtype tag " + std::to_string(dtype));
        uint8_t rank = r.u8();
        for (uint8_t d = 0; d < rank; ++d)
            e.shape.push_back(static_cast<int64_t>(r.u64()));
        e.offset = r.u64();
        entries.push_back(std::move(e));
    }

    size_t payload_base = r.pos;
    for (const auto& e : entries) {
        Tensor t(e.shape);
        size_t start = payload_base + e.offset;
        if (start + static_cast<size_t>(t.numel()) * sizeof(real_t) > r.data.size())
            throw DataError(r.file + ": payload overruns file for " + e.name);
        for (int64_t i = 0; i < t.numel(); ++i) {
            uint64_t bits = 0;
            for (int b = 0; b < 8; ++b)
                bits |= static_cast<uint64_t>(static_cast<unsigned char>(
                            r.data[start + static_cast<size_t>(i) * 8 + static_cast<size_t>(b)]))
                        << (8 * b);
            real_t v;
            std::memcpy(&v, &bits, sizeof(v));
            t[i] = v;
        }
        ckpt.tensors.emplace_back(e.name, std::move(t));
    }
    return ckpt;
}

void Checkpoint::add_params(const ParamSet& params, const std::string& prefix) {
    for (const auto& p : params) add(prefix + p.name, p.value);
}

void Checkpoint::restore_params(ParamSet& params, const std::string& prefix) const {
    for (auto& p : params) {
        const Tensor& t = require(prefix + p.name);
        if (!t.same_shape(p.value))
            throw DataError("checkpoint tensor " + prefix + p.name + " has wrong shape");
        p.value = t;
    }
}

}  // namespace dancer
