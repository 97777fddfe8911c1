#include "arc/common/file.hpp"
#include "arc/dataset/loader.hpp"
#include "arc/dataset/synthetic.hpp"
#include "arc/vision/image_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>

using namespace arc;
using namespace arc::dataset;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("arc_dataset_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// Index with `counts[c]` fake records for class c; paths are never opened.
DatasetIndex fake_index(const std::vector<std::size_t>& counts) {
    DatasetIndex idx;
    idx.root = "/corpus";
    idx.classes = counts.size();
    for (std::size_t c = 0; c < counts.size(); ++c)
        for (std::size_t i = 0; i < counts[c]; ++i)
            idx.records.push_back({idx.root / ("c" + std::to_string(c)) / (std::to_string(i) + ".png"), c});
    return idx;
}

std::array<std::size_t, 4> split_sizes(const DatasetIndex& idx, std::size_t cls) {
    std::array<std::size_t, 4> n{};
    for (const auto& r : idx.records)
        if (r.item_id == cls) ++n[static_cast<int>(r.split)];
    return n;
}

const char* kCatalogJson = R"({"currency":"EUR","items":[
  {"id":1,"dir":"milk","name":"Milk 1L","unit_price":129},
  {"id":0,"dir":"bread","name":"Bread","unit_price":250}]})";

}  // namespace

// --- catalog -----------------------------------------------------------------

TEST(Catalog, ParsesAndSortsById) {
    const auto c = Catalog::parse(kCatalogJson);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c.currency(), "EUR");
    EXPECT_EQ(c.at(0).dir, "bread");
    EXPECT_EQ(c.at(1).unit_price, 129);
    EXPECT_EQ(c.find_dir("milk"), 1u);
    EXPECT_FALSE(c.find_dir("eggs"));
    EXPECT_EQ(Catalog::from_json(c.to_json()), c);
    try {
        c.at(2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownItem);
    }
}

TEST(Catalog, RejectsBrokenDocuments) {
    const char* bad[] = {
        "not json",
        R"({"currency":"EUR","items":[]})",
        R"({"currency":"EUR","items":[{"id":1,"dir":"a","name":"A","unit_price":1}]})",
        R"({"currency":"EUR","items":[{"id":0,"dir":"a","name":"A","unit_price":-1}]})",
        R"({"currency":"EUR","items":[{"id":0,"dir":"a","name":"A","unit_price":1.5}]})",
        R"({"currency":"EUR","items":[{"id":0,"dir":"a","name":"A","unit_price":1},
                                      {"id":1,"dir":"a","name":"B","unit_price":1}]})",
        R"({"currency":"EUR","items":[{"id":0,"dir":"../x","name":"A","unit_price":1}]})",
        R"({"items":[{"id":0,"dir":"a","name":"A","unit_price":1}]})",
    };
    for (const char* text : bad) {
        try {
            Catalog::parse(text);
            ADD_FAILURE() << text;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::ConfigError) << text;
        }
    }
}

TEST(Money, FormatsMinorUnits) {
    EXPECT_EQ(format_minor(1250), "12.50");
    EXPECT_EQ(format_minor(5), "0.05");
    EXPECT_EQ(format_minor(0), "0.00");
    EXPECT_EQ(format_minor(-5), "-0.05");
    EXPECT_EQ(format_minor(123456789), "1234567.89");
}

TEST(Money, ParseIsInverseOfFormat) {
    Rng rng(1);
    for (int i = 0; i < 2000; ++i) {
        const auto v = static_cast<std::int64_t>(rng.uniform_int(2'000'000'000)) - 1'000'000'000;
        ASSERT_EQ(parse_minor(format_minor(v)), v);
    }
    for (const char* bad : {"12.5", "12", ".50", "1.234", "abc", "1.-5", "+1.00", ""}) {
        EXPECT_THROW(parse_minor(bad), Error) << bad;
    }
}

// --- scan / split / manifest -------------------------------------------------

TEST(Scan, IndexesDecodableImagesOnly) {
    const auto root = scratch("scan");
    write_shape_corpus(root, 4, 3, 3, {60, 80});
    write_text_file(root / "red_circle" / "notes.txt", "not an image");
    fs::create_directories(root / "unlisted");
    const auto catalog = Catalog::load(root / "catalog.json");
    const auto idx = scan(root, catalog);
    EXPECT_EQ(idx.records.size(), 12u);
    EXPECT_EQ(idx.class_counts(), (std::vector<std::size_t>{4, 4, 4}));
    for (const auto& r : idx.records) EXPECT_TRUE(fs::exists(r.path));
    EXPECT_EQ(scan(root, catalog), idx);
}

TEST(Scan, MissingDirectoryOrEmptyCorpusIsConfigError) {
    const auto root = scratch("scan_missing");
    write_shape_corpus(root, 2, 3, 3, {60, 80});
    fs::remove_all(root / "blue_triangle");
    const auto catalog = shape_catalog(3);
    try {
        scan(root, catalog);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    }
    const auto empty = scratch("scan_empty");
    for (const auto& item : catalog.entries()) fs::create_directories(empty / item.dir);
    EXPECT_THROW(scan(empty, catalog), Error);
    EXPECT_THROW(scan(empty / "nope", catalog), Error);
}

TEST(Split, FloorRuleOnCorpusSizes) {
    auto idx = stratified_split(fake_index({310, 10}), {}, 5);
    EXPECT_EQ(split_sizes(idx, 0), (std::array<std::size_t, 4>{0, 201, 77, 32}));
    EXPECT_EQ(split_sizes(idx, 1), (std::array<std::size_t, 4>{0, 6, 2, 2}));
}

TEST(Split, PartitionWithinOneRecordOfFractions) {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::size_t> counts(1 + rng.uniform_int(6));
        for (auto& n : counts) n = 3 + rng.uniform_int(400);
        const auto idx = stratified_split(fake_index(counts), {}, trial);
        std::set<fs::path> paths;
        for (const auto& r : idx.records) {
            EXPECT_NE(r.split, Split::Unassigned);
            paths.insert(r.path);
        }
        EXPECT_EQ(paths.size(), idx.records.size());
        for (std::size_t c = 0; c < counts.size(); ++c) {
            const auto n = split_sizes(idx, c);
            const double total = static_cast<double>(counts[c]);
            EXPECT_EQ(n[1] + n[2] + n[3], counts[c]);
            EXPECT_LT(std::abs(n[1] - 0.65 * total), 1.0);
            EXPECT_LT(std::abs(n[2] - 0.25 * total), 1.0);
        }
    }
}

TEST(Split, DeterministicPerSeed) {
    const auto a = stratified_split(fake_index({50, 50}), {}, 9);
    const auto b = stratified_split(fake_index({50, 50}), {}, 9);
    const auto c = stratified_split(fake_index({50, 50}), {}, 10);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
}

TEST(Split, Errors) {
    EXPECT_THROW(stratified_split(fake_index({10, 2}), {}, 1), Error);
    EXPECT_THROW(stratified_split(fake_index({10}), {0.5, 0.3, 0.3}, 1), Error);
}

TEST(Manifest, RoundTripsWithQuotedPaths) {
    auto idx = fake_index({4, 3});
    idx.records[0].path = idx.root / "odd, \"name\".png";
    idx = stratified_split(idx, {}, 4);
    const auto text = manifest_csv(idx);
    EXPECT_EQ(text.substr(0, 19), "path,item_id,split\n");
    EXPECT_EQ(parse_manifest(text, idx.root, 2), idx);
    EXPECT_THROW(parse_manifest("a,b,c\n", "/", 2), Error);
    EXPECT_THROW(parse_manifest("path,item_id,split\nx.png,7,train\n", "/", 2), Error);
    EXPECT_THROW(parse_manifest("path,item_id,split\nx.png,0,holdout\n", "/", 2), Error);
}

// --- loading -----------------------------------------------------------------

TEST(Loader, OneHotAndCacheTransparency) {
    const auto root = scratch("load");
    write_shape_corpus(root, 2, 8, 3);
    const auto idx = scan(root, shape_catalog(3));
    const preprocess::PipelineConfig cfg;
    const auto cache = root / "cache";
    for (const auto& r : idx.records) {
        const auto cold = load_example(r, cfg, 3);
        ASSERT_EQ(cold.onehot.size(), 3u);
        EXPECT_EQ(cold.onehot[r.item_id], 1.0f);
        EXPECT_EQ(std::count(cold.onehot.begin(), cold.onehot.end(), 0.0f), 2);
        EXPECT_EQ(cold.image.height(), 150);
        EXPECT_EQ(cold.image.channels(), 3);
        const auto fill = load_example(r, cfg, 3, cache);
        const auto hit = load_example(r, cfg, 3, cache);
        EXPECT_EQ(fill.image, cold.image);
        EXPECT_EQ(hit.image, cold.image);
    }
    ExampleLoader loader(cfg, 3, cache);
    for (const auto& r : idx.records) ASSERT_TRUE(loader.try_load(r));
    EXPECT_EQ(loader.cache_hits(), idx.records.size());
    EXPECT_EQ(loader.cache_misses(), 0u);
}

TEST(Loader, BadRecordsAreQuarantined) {
    const auto root = scratch("quarantine");
    write_shape_corpus(root, 3, 8, 2);
    auto idx = stratified_split(scan(root, shape_catalog(2)), {1.0, 0.0, 0.0}, 1);
    // Corrupt one file and blank another after scanning.
    write_text_file(idx.records[0].path, "garbage");
    vision::write_png(vision::Raster(240, 320, 3), idx.records[4].path);
    ExampleLoader loader({}, 2);
    const auto loaded = loader.load_split(idx, Split::Train, 2);
    EXPECT_EQ(loaded.size(), 4u);
    const auto q = loader.quarantined();
    ASSERT_EQ(q.size(), 2u);
    std::set<fs::path> bad{q[0].path, q[1].path};
    EXPECT_TRUE(bad.count(idx.records[0].path));
    EXPECT_TRUE(bad.count(idx.records[4].path));
}

TEST(Loader, ThreadCountDoesNotChangeOutput) {
    const auto root = scratch("threads");
    write_shape_corpus(root, 3, 2, 3);
    const auto idx = stratified_split(scan(root, shape_catalog(3)), {1.0, 0.0, 0.0}, 1);
    ExampleLoader one({}, 3), four({}, 3);
    const auto a = one.load_split(idx, Split::Train, 1);
    const auto b = four.load_split(idx, Split::Train, 4);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].label, b[i].label);
        EXPECT_EQ(a[i].image, b[i].image);
    }
}

// --- synthetic corpus --------------------------------------------------------

TEST(Synthetic, FramesAreDeterministicAndSegmentable) {
    for (std::size_t c = 0; c < shape_classes().size(); ++c) {
        Rng a(derive_seed(4, c)), b(derive_seed(4, c));
        const auto fa = render_shape_frame(c, a);
        EXPECT_EQ(fa, render_shape_frame(c, b));
        EXPECT_EQ(fa.height(), 240);
        const auto out = preprocess::preprocess(fa, {});
        EXPECT_EQ(out.height(), 150);
        EXPECT_EQ(out.width(), 150);
        EXPECT_EQ(out.channels(), 3);
    }
    Rng rng(1);
    EXPECT_THROW(render_shape_frame(10, rng), Error);
}

TEST(Synthetic, CatalogMatchesClasses) {
    const auto c = shape_catalog();
    EXPECT_EQ(c.size(), 10u);
    EXPECT_EQ(c.at(3).dir, "yellow_star");
    EXPECT_THROW(shape_catalog(11), Error);
}
