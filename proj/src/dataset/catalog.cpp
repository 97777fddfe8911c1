#include "arc/dataset/catalog.hpp"

#include "arc/common/error.hpp"
#include "arc/common/file.hpp"

#include <algorithm>
#include <charconv>
#include <set>

namespace arc::dataset {

Catalog::Catalog(std::string currency, std::vector<CatalogEntry> entries)
    : currency_(std::move(currency)), entries_(std::move(entries)) {
    if (currency_.empty()) throw Error(ErrorCode::ConfigError, "catalog currency is empty");
    if (entries_.empty()) throw Error(ErrorCode::ConfigError, "catalog has no items");
    std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    std::set<std::string> dirs;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (e.id != i) throw Error(ErrorCode::ConfigError, "catalog ids must be exactly 0..K-1");
        if (e.unit_price < 0) throw Error(ErrorCode::ConfigError, "negative price for item " + std::to_string(e.id));
        if (e.dir.empty() || e.dir.find('/') != std::string::npos || e.dir == "." || e.dir == "..") {
            throw Error(ErrorCode::ConfigError, "bad directory name for item " + std::to_string(e.id));
        }
        if (!dirs.insert(e.dir).second) throw Error(ErrorCode::ConfigError, "duplicate catalog directory " + e.dir);
    }
}

Catalog Catalog::from_json(const nlohmann::json& j) {
    try {
        std::vector<CatalogEntry> entries;
        for (const auto& it : j.at("items")) {
            CatalogEntry e;
            e.id = it.at("id").get<std::size_t>();
            e.dir = it.at("dir").get<std::string>();
            e.name = it.at("name").get<std::string>();
            if (!it.at("unit_price").is_number_integer()) {
                throw Error(ErrorCode::ConfigError, "unit_price must be an integer number of minor units");
            }
            e.unit_price = it.at("unit_price").get<std::int64_t>();
            entries.push_back(std::move(e));
        }
        return Catalog(j.at("currency").get<std::string>(), std::move(entries));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("bad catalog: ") + e.what());
    }
}

Catalog Catalog::parse(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("catalog is not JSON: ") + e.what());
    }
    return from_json(j);
}

Catalog Catalog::load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error(ErrorCode::ConfigError, "catalog not found: " + path.string());
    return parse(read_text_file(path));
}

nlohmann::json Catalog::to_json() const {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& e : entries_) {
        items.push_back({{"id", e.id}, {"dir", e.dir}, {"name", e.name}, {"unit_price", e.unit_price}});
    }
    return {{"currency", currency_}, {"items", items}};
}

void Catalog::save(const std::filesystem::path& path) const {
    write_text_file(path, to_json().dump(2) + "\n");
}

const CatalogEntry& Catalog::at(std::size_t id) const {
    if (id >= entries_.size()) throw Error(ErrorCode::UnknownItem, "no catalog item " + std::to_string(id));
    return entries_[id];
}

std::optional<std::size_t> Catalog::find_dir(std::string_view dir) const {
    for (const auto& e : entries_)
        if (e.dir == dir) return e.id;
    return std::nullopt;
}

std::vector<std::string> Catalog::names() const {
    std::vector<std::string> out;
    for (const auto& e : entries_) out.push_back(e.name);
    return out;
}

std::string format_minor(std::int64_t minor) {
    const bool neg = minor < 0;
    const std::uint64_t mag = neg ? 0 - static_cast<std::uint64_t>(minor) : static_cast<std::uint64_t>(minor);
    std::string cents = std::to_string(mag % 100);
    if (cents.size() < 2) cents.insert(cents.begin(), '0');
    return (neg ? "-" : "") + std::to_string(mag / 100) + "." + cents;
}

std::int64_t parse_minor(std::string_view text) {
    auto fail = [&] { return Error(ErrorCode::ConfigError, "bad amount '" + std::string(text) + "'"); };
    std::string_view s = text;
    bool neg = false;
    if (!s.empty() && s.front() == '-') {
        neg = true;
        s.remove_prefix(1);
    }
    const auto dot = s.find('.');
    if (dot == std::string_view::npos || dot == 0 || s.size() - dot != 3) throw fail();
    std::int64_t whole = 0, frac = 0;
    const auto w = std::from_chars(s.data(), s.data() + dot, whole);
    const auto f = std::from_chars(s.data() + dot + 1, s.data() + s.size(), frac);
    if (w.ec != std::errc() || w.ptr != s.data() + dot || f.ec != std::errc() || f.ptr != s.data() + s.size() ||
        s[dot + 1] == '-' || s[dot + 1] == '+' || s.front() == '+') {
        throw fail();
    }
    const std::int64_t v = whole * 100 + frac;
    return neg ? -v : v;
}

}  // namespace arc::dataset
