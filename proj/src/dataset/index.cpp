#include "arc/dataset/index.hpp"

#include "arc/common/error.hpp"
#include "arc/common/file.hpp"
#include "arc/common/log.hpp"
#include "arc/common/random.hpp"
#include "arc/vision/image_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace arc::dataset {

namespace fs = std::filesystem;

std::string_view to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
        case Split::Unassigned: break;
    }
    return "unassigned";
}

Split parse_split(std::string_view s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    if (s == "unassigned") return Split::Unassigned;
    throw Error(ErrorCode::ConfigError, "unknown split '" + std::string(s) + "'");
}

std::vector<std::size_t> DatasetIndex::class_counts() const {
    std::vector<std::size_t> n(classes, 0);
    for (const auto& r : records) ++n.at(r.item_id);
    return n;
}

std::vector<Record> DatasetIndex::of(Split s) const {
    std::vector<Record> out;
    for (const auto& r : records)
        if (r.split == s) out.push_back(r);
    return out;
}

DatasetIndex scan(const fs::path& root, const Catalog& catalog) {
    if (!fs::is_directory(root)) throw Error(ErrorCode::ConfigError, "dataset root not found: " + root.string());
    DatasetIndex idx;
    idx.root = root;
    idx.classes = catalog.size();

    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory() && !catalog.find_dir(entry.path().filename().string())) {
            log::warn("ignoring directory not in catalog: " + entry.path().string());
        }
    }
    for (const auto& item : catalog.entries()) {
        const fs::path dir = root / item.dir;
        if (!fs::is_directory(dir)) throw Error(ErrorCode::ConfigError, "missing class directory: " + dir.string());
        std::vector<fs::path> files;
        for (const auto& f : fs::directory_iterator(dir))
            if (f.is_regular_file()) files.push_back(f.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            try {
                vision::read_image(f);
            } catch (const Error& e) {
                log::warn("skipping " + f.string() + ": " + e.what());
                continue;
            }
            idx.records.push_back({f, item.id, Split::Unassigned});
        }
    }
    if (idx.records.empty()) throw Error(ErrorCode::ConfigError, "no images under " + root.string());
    const auto counts = idx.class_counts();
    std::string summary = "scanned " + std::to_string(idx.records.size()) + " images:";
    for (std::size_t c = 0; c < counts.size(); ++c) summary += " " + catalog.at(c).dir + "=" + std::to_string(counts[c]);
    log::info(summary);
    return idx;
}

DatasetIndex stratified_split(DatasetIndex index, const SplitFractions& f, std::uint64_t seed) {
    if (f.train < 0 || f.val < 0 || f.test < 0 || std::abs(f.train + f.val + f.test - 1.0) > 1e-9) {
        throw Error(ErrorCode::ConfigError, "split fractions must be non-negative and sum to 1");
    }
    // Guards floor() against products like 0.65 * 20 landing just under an integer.
    constexpr double kSlack = 1e-9;
    std::vector<std::vector<std::size_t>> by_class(index.classes);
    for (std::size_t i = 0; i < index.records.size(); ++i) by_class.at(index.records[i].item_id).push_back(i);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& members = by_class[c];
        if (members.size() < 3) {
            throw Error(ErrorCode::ConfigError,
                        "class " + std::to_string(c) + " has " + std::to_string(members.size()) + " images; 3 needed");
        }
        Rng rng(derive_seed(seed, c));
        rng.shuffle(members.begin(), members.end());
        const double n = static_cast<double>(members.size());
        const auto n_train = static_cast<std::size_t>(std::floor(f.train * n + kSlack));
        const auto n_val = static_cast<std::size_t>(std::floor(f.val * n + kSlack));
        for (std::size_t k = 0; k < members.size(); ++k) {
            index.records[members[k]].split =
                k < n_train ? Split::Train : (k < n_train + n_val ? Split::Val : Split::Test);
        }
    }
    return index;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        any = true;
        if (quoted) {
            if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else {
            field += c;
        }
    }
    if (quoted) throw Error(ErrorCode::ConfigError, "unterminated quote in manifest");
    if (any) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::string manifest_csv(const DatasetIndex& index) {
    std::string out = "path,item_id,split\n";
    for (const auto& r : index.records) {
        const fs::path rel = index.root.empty() ? r.path : r.path.lexically_relative(index.root);
        out += csv_field(rel.generic_string()) + "," + std::to_string(r.item_id) + "," +
               std::string(to_string(r.split)) + "\n";
    }
    return out;
}

DatasetIndex parse_manifest(std::string_view csv, const fs::path& root, std::size_t classes) {
    const auto rows = parse_csv(csv);
    if (rows.empty() || rows[0] != std::vector<std::string>{"path", "item_id", "split"}) {
        throw Error(ErrorCode::ConfigError, "manifest must start with the header path,item_id,split");
    }
    DatasetIndex idx;
    idx.root = root;
    idx.classes = classes;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 3) throw Error(ErrorCode::ConfigError, "manifest row " + std::to_string(i) + " needs 3 fields");
        std::size_t id = 0;
        const auto [ptr, ec] = std::from_chars(r[1].data(), r[1].data() + r[1].size(), id);
        if (ec != std::errc() || ptr != r[1].data() + r[1].size() || id >= classes) {
            throw Error(ErrorCode::ConfigError, "bad item id in manifest row " + std::to_string(i));
        }
        const fs::path p(r[0]);
        idx.records.push_back({p.is_absolute() ? p : root / p, id, parse_split(r[2])});
    }
    return idx;
}

void write_manifest(const DatasetIndex& index, const fs::path& path) {
    write_text_file(path, manifest_csv(index));
}

DatasetIndex read_manifest(const fs::path& path, const fs::path& root, std::size_t classes) {
    if (!fs::exists(path)) throw Error(ErrorCode::ConfigError, "manifest not found: " + path.string());
    return parse_manifest(read_text_file(path), root, classes);
}

}  // namespace arc::dataset
