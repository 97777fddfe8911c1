#pragma once

#include "arc/dataset/catalog.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace arc::dataset {

enum class Split { Unassigned, Train, Val, Test };

std::string_view to_string(Split s);
/// "train", "val", "test" or "unassigned". Throws ConfigError otherwise.
Split parse_split(std::string_view s);

struct Record {
    std::filesystem::path path;  ///< absolute, or relative to the working directory
    std::size_t item_id = 0;
    Split split = Split::Unassigned;

    bool operator==(const Record&) const = default;
};

struct DatasetIndex {
    std::filesystem::path root;
    std::size_t classes = 0;
    std::vector<Record> records;  ///< sorted by item id, then path

    std::vector<std::size_t> class_counts() const;
    std::vector<Record> of(Split s) const;

    bool operator==(const DatasetIndex&) const = default;
};

/// Indexes root/<dir>/<file> for every catalog entry, keeping files that
/// decode as images. Missing class directories and an empty corpus raise
/// ConfigError; directories not in the catalog and undecodable files are
/// skipped with a warning.
DatasetIndex scan(const std::filesystem::path& root, const Catalog& catalog);

struct SplitFractions {
    double train = 0.65;
    double val = 0.25;
    double test = 0.10;
};

/// Per class: shuffle with a seed-derived stream, then floor(train*n) to
/// train, floor(val*n) to val and the rest to test. Classes with fewer than
/// three records raise ConfigError, as do fractions not summing to 1.
DatasetIndex stratified_split(DatasetIndex index, const SplitFractions& f, std::uint64_t seed);

/// CSV `path,item_id,split` with a header; paths relative to the index root.
std::string manifest_csv(const DatasetIndex& index);
/// Parses a manifest; relative paths are resolved against `root`.
DatasetIndex parse_manifest(std::string_view csv, const std::filesystem::path& root, std::size_t classes);
void write_manifest(const DatasetIndex& index, const std::filesystem::path& path);
DatasetIndex read_manifest(const std::filesystem::path& path, const std::filesystem::path& root,
                           std::size_t classes);

}  // namespace arc::dataset
