#include "arc/nn/checkpoint.hpp"

#include "arc/common/file.hpp"

#include <bit>
#include <cstring>

namespace arc::nn {

namespace {

constexpr char kMagic[8] = {'A', 'R', 'C', 'C', 'K', 'P', 'T', '\0'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& b) : bytes_(b) {}

    const std::uint8_t* take(std::size_t n) {
        if (bytes_.size() - pos_ < n) throw Error(ErrorCode::IoError, "checkpoint truncated");
        const std::uint8_t* p = bytes_.data() + pos_;
        pos_ += n;
        return p;
    }
    std::uint32_t u32() {
        const auto* p = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        const auto* p = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
        return v;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

struct NamedArray {
    std::string name;
    Tensor<float>* value;
};

std::vector<NamedArray> arrays_of(Network<float>& net) {
    std::vector<NamedArray> out;
    for (const auto& p : net.params()) out.push_back({p.name, p.value});
    for (const auto& s : net.state()) out.push_back({s.name, s.value});
    return out;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(Network<float>& net, const CheckpointInfo& info) {
    const auto arrays = arrays_of(net);
    nlohmann::json meta;
    meta["format_version"] = kCheckpointVersion;
    meta["architecture"] = net.spec().to_json();
    meta["epoch"] = info.epoch;
    meta["seed"] = info.seed;
    meta["metrics"] = info.metrics;
    meta["extra"] = info.extra;
    nlohmann::json list = nlohmann::json::array();
    for (const auto& a : arrays) list.push_back({{"name", a.name}, {"shape", a.value->shape()}});
    meta["arrays"] = std::move(list);
    const std::string text = meta.dump();

    std::vector<std::uint8_t> out(kMagic, kMagic + 8);
    put_u32(out, kCheckpointVersion);
    put_u64(out, text.size());
    out.insert(out.end(), text.begin(), text.end());
    for (const auto& a : arrays) {
        for (const float v : a.value->values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

LoadedCheckpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    if (std::memcmp(r.take(8), kMagic, 8) != 0) throw Error(ErrorCode::IoError, "not a checkpoint file");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) {
        throw Error(ErrorCode::IoError, "unsupported checkpoint version " + std::to_string(version));
    }
    const std::uint64_t len = r.u64();
    const auto* text = reinterpret_cast<const char*>(r.take(len));
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(text, text + len);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::IoError, std::string("checkpoint metadata: ") + e.what());
    }

    CheckpointInfo info;
    NetworkSpec spec;
    try {
        info.epoch = meta.at("epoch").get<int>();
        info.seed = meta.at("seed").get<std::uint64_t>();
        info.metrics = meta.at("metrics");
        info.extra = meta.at("extra");
        spec = NetworkSpec::from_json(meta.at("architecture"));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::IoError, std::string("checkpoint metadata: ") + e.what());
    }

    LoadedCheckpoint out{std::move(info), Network<float>(spec, 0)};
    const auto arrays = arrays_of(out.network);
    const auto& listed = meta.at("arrays");
    if (listed.size() != arrays.size()) throw Error(ErrorCode::IoError, "checkpoint array list does not match architecture");
    for (std::size_t i = 0; i < arrays.size(); ++i) {
        const auto& a = arrays[i];
        if (listed[i].at("name").get<std::string>() != a.name || listed[i].at("shape").get<Shape>() != a.value->shape()) {
            throw Error(ErrorCode::IoError, "checkpoint array " + std::to_string(i) + " does not match " + a.name);
        }
        for (auto& v : a.value->values()) v = std::bit_cast<float>(r.u32());
    }
    if (!r.done()) throw Error(ErrorCode::IoError, "trailing bytes after checkpoint arrays");
    return out;
}

void save_checkpoint(const std::filesystem::path& path, Network<float>& net, const CheckpointInfo& info) {
    write_file_atomic(path, encode_checkpoint(net, info));
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    try {
        return decode_checkpoint(read_file_bytes(path));
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

}  // namespace arc::nn
