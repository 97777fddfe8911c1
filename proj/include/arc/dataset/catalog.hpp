#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace arc::dataset {

struct CatalogEntry {
    std::size_t id = 0;
    std::string dir;   ///< corpus subdirectory
    std::string name;  ///< display name
    std::int64_t unit_price = 0;  ///< minor units (cents)

    bool operator==(const CatalogEntry&) const = default;
};

/// Item id -> directory, display name and price. Ids are dense 0..K-1.
class Catalog {
public:
    Catalog() = default;
    /// Throws ConfigError unless ids are exactly 0..K-1, prices are
    /// non-negative and directory names are unique.
    Catalog(std::string currency, std::vector<CatalogEntry> entries);

    static Catalog from_json(const nlohmann::json& j);
    static Catalog parse(std::string_view text);
    static Catalog load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
    void save(const std::filesystem::path& path) const;

    std::size_t size() const { return entries_.size(); }
    const std::string& currency() const { return currency_; }
    const std::vector<CatalogEntry>& entries() const { return entries_; }
    /// Throws UnknownItem.
    const CatalogEntry& at(std::size_t id) const;
    std::optional<std::size_t> find_dir(std::string_view dir) const;
    std::vector<std::string> names() const;

    bool operator==(const Catalog&) const = default;

private:
    std::string currency_;
    std::vector<CatalogEntry> entries_;
};

/// 1250 -> "12.50", -5 -> "-0.05".
std::string format_minor(std::int64_t minor);
/// Inverse of format_minor; exactly two decimals required. Throws ConfigError.
std::int64_t parse_minor(std::string_view text);

}  // namespace arc::dataset
