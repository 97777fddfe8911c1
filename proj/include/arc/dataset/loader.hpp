#pragma once

#include "arc/dataset/index.hpp"
#include "arc/preprocess/pipeline.hpp"
#include "arc/training/batch.hpp"

#include <atomic>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace arc::dataset {

struct Example {
    vision::Raster image;  ///< preprocessed, target_side x target_side x 3
    std::size_t label = 0;
    std::vector<float> onehot;
};

struct Quarantined {
    std::filesystem::path path;
    std::string reason;
};

/// Decodes and preprocesses a record. With a cache directory, outputs are
/// stored as PNG under a key of (file SHA-256, pipeline config hash) and
/// reused; a cache hit returns the same pixels as the cold path.
/// Throws BadImage/IoError for unreadable files and NoObject from the
/// pipeline.
Example load_example(const Record& record, const preprocess::PipelineConfig& cfg, std::size_t classes,
                     const std::filesystem::path& cache_dir = {});

/// Batch loading with quarantine: failing records are reported and skipped
/// instead of aborting. Safe to call from several threads.
class ExampleLoader {
public:
    ExampleLoader(preprocess::PipelineConfig cfg, std::size_t classes, std::filesystem::path cache_dir = {});

    std::optional<Example> try_load(const Record& record);

    /// All records of one split, in index order, using up to `threads`
    /// workers. Output order does not depend on the thread count.
    std::vector<training::LabeledImage> load_split(const DatasetIndex& index, Split split, unsigned threads = 1);

    /// Sorted by path.
    std::vector<Quarantined> quarantined() const;
    std::size_t cache_hits() const { return hits_; }
    std::size_t cache_misses() const { return misses_; }

private:
    preprocess::PipelineConfig cfg_;
    std::size_t classes_;
    std::filesystem::path cache_dir_;
    mutable std::mutex mu_;
    std::vector<Quarantined> quarantined_;
    std::atomic<std::size_t> hits_{0}, misses_{0};
};

/// Default worker count for loading: hardware concurrency, at least 1.
unsigned default_threads();

}  // namespace arc::dataset
