#include "arc/dataset/loader.hpp"

#include "arc/common/error.hpp"
#include "arc/common/file.hpp"
#include "arc/common/hash.hpp"
#include "arc/common/log.hpp"
#include "arc/vision/image_io.hpp"

#include <algorithm>
#include <thread>

namespace arc::dataset {

namespace fs = std::filesystem;

namespace {

std::vector<float> onehot_of(std::size_t label, std::size_t classes) {
    if (label >= classes) throw Error(ErrorCode::InvalidLabel, "label " + std::to_string(label) + " out of range");
    std::vector<float> v(classes, 0.0f);
    v[label] = 1.0f;
    return v;
}

// Returns true and fills `out` on a usable cache entry.
bool load_cached(const fs::path& file, int side, vision::Raster& out) {
    if (!fs::exists(file)) return false;
    try {
        auto img = vision::read_image(file);
        if (img.height() != side || img.width() != side || img.channels() != 3) return false;
        out = std::move(img);
        return true;
    } catch (const Error&) {
        return false;
    }
}

Example load_impl(const Record& record, const preprocess::PipelineConfig& cfg, std::size_t classes,
                  const fs::path& cache_dir, bool* hit) {
    Example ex;
    ex.label = record.item_id;
    ex.onehot = onehot_of(record.item_id, classes);
    const auto bytes = read_file_bytes(record.path);
    fs::path cached;
    if (!cache_dir.empty()) {
        const std::string key = sha256_hex(bytes) + "-" + sha256_hex(cfg.canonical()).substr(0, 16);
        cached = cache_dir / key.substr(0, 2) / (key + ".png");
        if (load_cached(cached, cfg.target_side, ex.image)) {
            if (hit) *hit = true;
            return ex;
        }
    }
    if (hit) *hit = false;
    ex.image = preprocess::preprocess(vision::decode_image(bytes), cfg);
    if (!cached.empty()) {
        fs::create_directories(cached.parent_path());
        write_file_atomic(cached, vision::encode_png(ex.image));
    }
    return ex;
}

}  // namespace

Example load_example(const Record& record, const preprocess::PipelineConfig& cfg, std::size_t classes,
                     const fs::path& cache_dir) {
    return load_impl(record, cfg, classes, cache_dir, nullptr);
}

ExampleLoader::ExampleLoader(preprocess::PipelineConfig cfg, std::size_t classes, fs::path cache_dir)
    : cfg_(std::move(cfg)), classes_(classes), cache_dir_(std::move(cache_dir)) {
    cfg_.validate();
}

std::optional<Example> ExampleLoader::try_load(const Record& record) {
    try {
        bool hit = false;
        auto ex = load_impl(record, cfg_, classes_, cache_dir_, &hit);
        ++(hit ? hits_ : misses_);
        return ex;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidLabel) throw;
        log::warn("quarantined " + record.path.string() + ": " + e.what());
        std::lock_guard lock(mu_);
        quarantined_.push_back({record.path, std::string(to_string(e.code())) + ": " + e.what()});
        return std::nullopt;
    }
}

std::vector<training::LabeledImage> ExampleLoader::load_split(const DatasetIndex& index, Split split,
                                                              unsigned threads) {
    const auto records = index.of(split);
    std::vector<std::optional<Example>> slots(records.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < records.size(); i = next++) slots[i] = try_load(records[i]);
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(records.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::vector<training::LabeledImage> out;
    out.reserve(records.size());
    for (auto& s : slots)
        if (s) out.push_back({std::move(s->image), s->label});
    return out;
}

std::vector<Quarantined> ExampleLoader::quarantined() const {
    std::lock_guard lock(mu_);
    auto out = quarantined_;
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    return out;
}

unsigned default_threads() {
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace arc::dataset
