#include "arc/cli/cli.hpp"

#include "arc/checkout/http_api.hpp"
#include "arc/common/error.hpp"
#include "arc/common/file.hpp"
#include "arc/common/keyvalue.hpp"
#include "arc/common/log.hpp"
#include "arc/common/memory.hpp"
#include "arc/dataset/loader.hpp"
#include "arc/dataset/synthetic.hpp"
#include "arc/nn/checkpoint.hpp"
#include "arc/training/evaluate.hpp"
#include "arc/vision/image_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <csignal>
#include <cstdlib>
#include <iostream>

namespace arc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

void TrainSettings::set(const std::string& key, const std::string& v) {
    auto& t = train;
    auto& s = t.schedule;
    auto& o = t.optimizer;
    auto integer = [&] { return parse_integer(key, v); };
    auto real = [&] { return parse_real(key, v); };
    if (key == "root") root = v;
    else if (key == "catalog") catalog = v;
    else if (key == "manifest") manifest = v;
    else if (key == "cache_dir") cache_dir = v;
    else if (key == "pipeline") pipeline = v;
    else if (key == "threads") threads = static_cast<unsigned>(std::max(0LL, integer()));
    else if (key == "out_dir") t.out_dir = v;
    else if (key == "seed") t.seed = static_cast<std::uint64_t>(integer());
    else if (key == "max_epochs") t.max_epochs = static_cast<int>(integer());
    else if (key == "batch_size") t.batch_size = static_cast<std::size_t>(std::max(0LL, integer()));
    else if (key == "precision") t.precision = v;
    else if (key == "checkpoint_every") t.checkpoint_every = static_cast<int>(integer());
    else if (key == "eval_batch") t.eval_batch = static_cast<std::size_t>(std::max(1LL, integer()));
    else if (key == "resume") t.resume = parse_bool(key, v);
    else if (key == "base_lr") s.base_lr = real();
    else if (key == "decay_a") s.decay_a = real();
    else if (key == "decay_b") s.decay_b = real();
    else if (key == "switch_epoch") s.switch_epoch = static_cast<int>(integer());
    else if (key == "plateau_factor") s.plateau_factor = real();
    else if (key == "plateau_patience") s.plateau_patience = static_cast<int>(integer());
    else if (key == "plateau_min_delta") s.plateau_min_delta = real();
    else if (key == "beta1") o.beta1 = real();
    else if (key == "beta2") o.beta2 = real();
    else if (key == "epsilon") o.epsilon = real();
    else if (key == "weight_decay") o.weight_decay = real();
    else if (key == "dropout") dropout = real();
    else if (key == "train_fraction") fractions.train = real();
    else if (key == "val_fraction") fractions.val = real();
    else if (key == "test_fraction") fractions.test = real();
    else throw Error(ErrorCode::ConfigError, "unknown setting '" + key + "'");
}

void TrainSettings::set_all(const std::map<std::string, std::string>& kv) {
    for (const auto& [k, v] : kv) set(k, v);
}

void TrainSettings::finalize() {
    if (root.empty()) throw Error(ErrorCode::ConfigError, "root (the corpus directory) is required");
    if (catalog.empty()) catalog = (fs::path(root) / "catalog.json").string();
    if (manifest.empty()) manifest = (fs::path(root) / "manifest.csv").string();
    if (cache_dir.empty()) cache_dir = (fs::path(root) / ".cache").string();
    if (train.out_dir.empty()) train.out_dir = "runs/train";
    if (threads == 0) threads = dataset::default_threads();
    if (!(dropout >= 0.0 && dropout < 1.0)) throw Error(ErrorCode::ConfigError, "dropout must be in [0, 1)");
    train.validate();
}

json TrainSettings::to_json() const {
    const auto& t = train;
    return {{"root", root},
            {"catalog", catalog},
            {"manifest", manifest},
            {"cache_dir", cache_dir},
            {"pipeline", pipeline},
            {"threads", threads},
            {"out_dir", t.out_dir.string()},
            {"seed", t.seed},
            {"max_epochs", t.max_epochs},
            {"batch_size", t.batch_size},
            {"precision", t.precision},
            {"checkpoint_every", t.checkpoint_every},
            {"eval_batch", t.eval_batch},
            {"resume", t.resume},
            {"base_lr", t.schedule.base_lr},
            {"decay_a", t.schedule.decay_a},
            {"decay_b", t.schedule.decay_b},
            {"switch_epoch", t.schedule.switch_epoch},
            {"plateau_factor", t.schedule.plateau_factor},
            {"plateau_patience", t.schedule.plateau_patience},
            {"plateau_min_delta", t.schedule.plateau_min_delta},
            {"beta1", t.optimizer.beta1},
            {"beta2", t.optimizer.beta2},
            {"epsilon", t.optimizer.epsilon},
            {"weight_decay", t.optimizer.weight_decay},
            {"dropout", dropout},
            {"train_fraction", fractions.train},
            {"val_fraction", fractions.val},
            {"test_fraction", fractions.test}};
}

namespace {

void echo_config(const std::string& verb, const json& cfg) {
    std::cerr << "[config] " << verb << " " << cfg.dump() << '\n';
}

preprocess::PipelineConfig load_pipeline(const std::string& path) {
    if (path.empty()) return {};
    try {
        return preprocess::PipelineConfig::from_json(json::parse(read_text_file(path)));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, path + ": " + e.what());
    }
}

preprocess::PipelineConfig pipeline_of(const nn::CheckpointInfo& info) {
    if (info.extra.contains("pipeline")) return preprocess::PipelineConfig::from_json(info.extra.at("pipeline"));
    return {};
}

bool is_image_file(const fs::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<training::LabeledImage> load_split_or_fail(dataset::ExampleLoader& loader, const dataset::DatasetIndex& idx,
                                                       dataset::Split split, unsigned threads) {
    auto out = loader.load_split(idx, split, threads);
    log::info("loaded " + std::to_string(out.size()) + " " + std::string(dataset::to_string(split)) + " examples");
    return out;
}

json top5_json(const std::vector<float>& probs, const dataset::Catalog* catalog) {
    json arr = json::array();
    for (const auto& [id, p] : training::top_k(probs, 5)) {
        json e{{"item_id", id}, {"probability", p}};
        if (catalog && id < catalog->size()) e["name"] = catalog->at(id).name;
        arr.push_back(e);
    }
    return arr;
}

// ---------------------------------------------------------------------------

int cmd_preprocess(const std::string& in, const std::string& out, bool dump, const std::string& pipeline) {
    const auto cfg = load_pipeline(pipeline);
    echo_config("preprocess", {{"in", in}, {"out", out}, {"dump_stages", dump}, {"pipeline", cfg.to_json()}});
    std::vector<fs::path> inputs;
    if (fs::is_directory(in)) {
        for (const auto& e : fs::directory_iterator(in))
            if (e.is_regular_file() && is_image_file(e.path())) inputs.push_back(e.path());
        std::sort(inputs.begin(), inputs.end());
    } else if (fs::is_regular_file(in)) {
        inputs.push_back(in);
    } else {
        throw Error(ErrorCode::ConfigError, "input not found: " + in);
    }
    fs::create_directories(out);
    std::size_t failed = 0;
    for (const auto& p : inputs) {
        try {
            preprocess::PipelineTrace trace;
            const auto result = preprocess::preprocess(vision::read_image(p), cfg, dump ? &trace : nullptr);
            vision::write_png(result, fs::path(out) / (p.stem().string() + ".png"));
            if (dump) preprocess::dump_stages(trace, fs::path(out) / p.stem());
        } catch (const Error& e) {
            ++failed;
            log::warn(p.string() + ": " + e.what());
        }
    }
    log::info("preprocessed " + std::to_string(inputs.size() - failed) + " of " + std::to_string(inputs.size()));
    std::cout << json{{"processed", inputs.size() - failed}, {"failed", failed}}.dump() << '\n';
    return failed ? kExitFailure : kExitOk;
}

int cmd_split(const std::string& root, std::string catalog_path, std::string out, std::uint64_t seed,
              const std::vector<double>& fr) {
    if (catalog_path.empty()) catalog_path = (fs::path(root) / "catalog.json").string();
    if (out.empty()) out = (fs::path(root) / "manifest.csv").string();
    if (fr.size() != 3) throw Error(ErrorCode::ConfigError, "--fractions needs three values");
    const dataset::SplitFractions f{fr[0], fr[1], fr[2]};
    echo_config("split", {{"root", root}, {"catalog", catalog_path}, {"out", out}, {"seed", seed}, {"fractions", fr}});
    const auto catalog = dataset::Catalog::load(catalog_path);
    const auto idx = dataset::stratified_split(dataset::scan(root, catalog), f, seed);
    dataset::write_manifest(idx, out);
    json counts = json::object();
    for (const auto s : {dataset::Split::Train, dataset::Split::Val, dataset::Split::Test}) {
        counts[std::string(dataset::to_string(s))] = idx.of(s).size();
    }
    std::cout << json{{"manifest", out}, {"counts", counts}}.dump() << '\n';
    return kExitOk;
}

int cmd_train(TrainSettings st) {
    st.finalize();
    echo_config("train", st.to_json());
    const auto catalog = dataset::Catalog::load(st.catalog);
    dataset::DatasetIndex idx;
    if (fs::exists(st.manifest)) {
        idx = dataset::read_manifest(st.manifest, st.root, catalog.size());
    } else {
        idx = dataset::stratified_split(dataset::scan(st.root, catalog), st.fractions, st.train.seed);
        dataset::write_manifest(idx, st.manifest);
        log::info("wrote " + st.manifest);
    }
    const auto pipeline = load_pipeline(st.pipeline);
    dataset::ExampleLoader loader(pipeline, catalog.size(), st.cache_dir == "none" ? fs::path() : fs::path(st.cache_dir));
    const auto train_set = load_split_or_fail(loader, idx, dataset::Split::Train, st.threads);
    const auto val_set = load_split_or_fail(loader, idx, dataset::Split::Val, st.threads);
    for (const auto& q : loader.quarantined()) log::warn("quarantined " + q.path.string() + " (" + q.reason + ")");

    nn::NetworkSpec spec = nn::NetworkSpec::arc(catalog.size());
    spec.dropout = st.dropout;
    spec.input = {3, static_cast<std::size_t>(pipeline.target_side), static_cast<std::size_t>(pipeline.target_side)};
    nn::Network<float> net(spec, st.train.seed);
    st.train.extra = {{"pipeline", pipeline.to_json()}, {"catalog", catalog.to_json()}};
    const auto result = training::train(net, train_set, val_set, st.train, [](const training::EpochMetrics& m) {
        log::info("epoch " + training::format_metrics(m));
    });
    std::cout << json{{"best_epoch", result.best_epoch},
                      {"best_checkpoint", result.best_checkpoint.string()},
                      {"last_checkpoint", result.last_checkpoint.string()},
                      {"metrics", result.metrics_log.string()},
                      {"final", training::to_json(result.history.back())}}
                     .dump()
              << '\n';
    return kExitOk;
}

int cmd_eval(const std::string& checkpoint, const std::string& manifest, std::string root, std::string catalog_path,
             const std::string& split_name, const std::string& confusion_csv, const std::string& percent_csv,
             bool confused_only, std::string cache_dir) {
    if (root.empty()) root = fs::path(manifest).parent_path().string();
    if (catalog_path.empty()) catalog_path = (fs::path(root) / "catalog.json").string();
    echo_config("eval", {{"checkpoint", checkpoint}, {"manifest", manifest}, {"root", root}, {"catalog", catalog_path},
                         {"split", split_name}, {"confusion_csv", confusion_csv}, {"percent_csv", percent_csv},
                         {"confused_only", confused_only}, {"cache_dir", cache_dir}});
    const auto split = dataset::parse_split(split_name);
    const auto catalog = dataset::Catalog::load(catalog_path);
    auto ckpt = nn::load_checkpoint(checkpoint);
    if (ckpt.network.spec().classes != catalog.size()) {
        throw Error(ErrorCode::ConfigError, "checkpoint and catalog disagree on the number of classes");
    }
    const auto idx = dataset::read_manifest(manifest, root, catalog.size());
    dataset::ExampleLoader loader(pipeline_of(ckpt.info), catalog.size(),
                                  cache_dir == "none" || cache_dir.empty() ? fs::path() : fs::path(cache_dir));
    const auto data = loader.load_split(idx, split, dataset::default_threads());
    ckpt.network.set_mode(nn::Mode::Infer);
    const auto ev = training::evaluate(ckpt.network, data);
    const auto names = catalog.names();
    if (!confusion_csv.empty()) write_text_file(confusion_csv, ev.matrix.counts_csv(names));
    if (!percent_csv.empty()) write_text_file(percent_csv, ev.matrix.percentages_csv(names, confused_only));
    std::cout << json{{"split", split_name},
                      {"examples", data.size()},
                      {"quarantined", loader.quarantined().size()},
                      {"accuracy", ev.accuracy},
                      {"loss", ev.loss}}
                     .dump()
              << '\n';
    return kExitOk;
}

int cmd_infer(const std::string& checkpoint, const std::string& image, const std::string& catalog_path) {
    echo_config("infer", {{"checkpoint", checkpoint}, {"image", image}, {"catalog", catalog_path}});
    auto ckpt = nn::load_checkpoint(checkpoint);
    std::optional<dataset::Catalog> catalog;
    if (!catalog_path.empty()) {
        catalog = dataset::Catalog::load(catalog_path);
    } else if (ckpt.info.extra.contains("catalog")) {
        catalog = dataset::Catalog::from_json(ckpt.info.extra["catalog"]);
    }
    checkout::NetworkIdentifier id(std::move(ckpt.network), pipeline_of(ckpt.info));
    const auto probs = id.probabilities(vision::read_image(image));
    std::cout << json{{"image", image}, {"top5", top5_json(probs, catalog ? &*catalog : nullptr)}}.dump() << '\n';
    return kExitOk;
}

checkout::ApiServer* g_server = nullptr;

extern "C" void handle_stop(int) {
    if (g_server) g_server->stop();
}

int cmd_serve(checkout::ServeConfig cfg) {
    cfg.validate();
    echo_config("serve", cfg.to_json());
    checkout::ServiceOptions opts;
    opts.threshold = cfg.threshold;
    opts.log_path = cfg.log_path;
    checkout::CheckoutService service(dataset::Catalog::load(cfg.catalog), checkout::load_identifier(cfg.checkpoint),
                                      opts);
    checkout::ApiServer server(service);
    const int port = server.bind(cfg.host, cfg.port);
    log::info("listening on " + cfg.host + ":" + std::to_string(port));
    std::cout << json{{"listen", cfg.host + ":" + std::to_string(port)}}.dump() << std::endl;
    g_server = &server;
    std::signal(SIGINT, handle_stop);
    std::signal(SIGTERM, handle_stop);
    server.run();
    g_server = nullptr;
    return kExitOk;
}

int cmd_synth(const std::string& out, std::size_t per_class, std::uint64_t seed, std::size_t classes) {
    echo_config("synth", {{"out", out}, {"per_class", per_class}, {"seed", seed}, {"classes", classes}});
    dataset::write_shape_corpus(out, per_class, seed, classes);
    std::cout << json{{"root", out}, {"images", per_class * classes}}.dump() << '\n';
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    tune_allocator();
    CLI::App app{"Automated retail checkout: preprocessing, training, evaluation and serving", "arc"};
    app.require_subcommand(1);
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "Only warnings and errors on stderr");

    auto* pre = app.add_subcommand("preprocess", "Run the preprocessing pipeline over images");
    std::string pre_in, pre_out, pre_pipeline;
    bool dump = false;
    pre->add_option("--in", pre_in, "Input image or directory")->required();
    pre->add_option("--out", pre_out, "Output directory")->required();
    pre->add_flag("--dump-stages", dump, "Also write the six intermediate stages per input");
    pre->add_option("--pipeline", pre_pipeline, "Pipeline configuration JSON");

    auto* split = app.add_subcommand("split", "Scan a corpus and write a stratified split manifest");
    std::string sp_root, sp_catalog, sp_out;
    std::uint64_t sp_seed = 0;
    std::vector<double> sp_fr{0.65, 0.25, 0.10};
    split->add_option("--root", sp_root, "Corpus root")->required();
    split->add_option("--catalog", sp_catalog, "Catalog JSON (default <root>/catalog.json)");
    split->add_option("--out", sp_out, "Manifest path (default <root>/manifest.csv)");
    split->add_option("--seed", sp_seed, "Shuffle seed");
    split->add_option("--fractions", sp_fr, "train,val,test fractions")->delimiter(',')->expected(3);

    auto* train = app.add_subcommand("train", "Train a network");
    std::string tr_config, tr_root, tr_out;
    std::optional<std::uint64_t> tr_seed;
    std::optional<int> tr_epochs;
    bool tr_resume = false;
    std::vector<std::string> tr_set;
    train->add_option("--config", tr_config, "Key-value settings file");
    train->add_option("--root", tr_root, "Corpus root");
    train->add_option("--out", tr_out, "Output directory");
    train->add_option("--seed", tr_seed, "Seed");
    train->add_option("--epochs", tr_epochs, "Maximum epochs");
    train->add_flag("--resume", tr_resume, "Continue from <out>/last.ckpt");
    train->add_option("--set", tr_set, "Extra key=value overrides")->take_all();

    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on one split");
    std::string ev_ckpt, ev_manifest, ev_root, ev_catalog, ev_split = "test", ev_csv, ev_pct, ev_cache;
    bool ev_confused = false;
    eval->add_option("--checkpoint", ev_ckpt, "Checkpoint file")->required();
    eval->add_option("--manifest", ev_manifest, "Split manifest")->required();
    eval->add_option("--root", ev_root, "Corpus root (default: manifest directory)");
    eval->add_option("--catalog", ev_catalog, "Catalog JSON (default <root>/catalog.json)");
    eval->add_option("--split", ev_split, "train, val or test");
    eval->add_option("--confusion-csv", ev_csv, "Write the K x K count matrix");
    eval->add_option("--percent-csv", ev_pct, "Write row percentages");
    eval->add_flag("--confused-only", ev_confused, "Percentages only for rows with errors");
    eval->add_option("--cache-dir", ev_cache, "Preprocessed image cache");

    auto* infer = app.add_subcommand("infer", "Top-5 prediction for one image");
    std::string in_ckpt, in_image, in_catalog;
    infer->add_option("--checkpoint", in_ckpt, "Checkpoint file")->required();
    infer->add_option("image", in_image, "Image file")->required();
    infer->add_option("--catalog", in_catalog, "Catalog JSON for item names");

    auto* serve = app.add_subcommand("serve", "Run the checkout HTTP service");
    checkout::ServeConfig sv;
    std::string sv_ckpt, sv_catalog, sv_listen, sv_log;
    std::optional<double> sv_threshold;
    serve->add_option("--checkpoint", sv_ckpt, "Model checkpoint (env ARC_CHECKPOINT)");
    serve->add_option("--catalog", sv_catalog, "Catalog JSON (env ARC_CATALOG)");
    serve->add_option("--threshold", sv_threshold, "Acceptance threshold (env ARC_THRESHOLD)");
    serve->add_option("--listen", sv_listen, "host:port (env ARC_LISTEN)");
    serve->add_option("--log", sv_log, "Event log path (env ARC_LOG)");

    auto* synth = app.add_subcommand("synth", "Generate a colored-shape corpus");
    std::string sy_out;
    std::size_t sy_per = 100, sy_classes = 10;
    std::uint64_t sy_seed = 0;
    synth->add_option("--out", sy_out, "Corpus root")->required();
    synth->add_option("--per-class", sy_per, "Images per class");
    synth->add_option("--seed", sy_seed, "Seed");
    synth->add_option("--classes", sy_classes, "Number of classes (1-10)");

    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }
    log::set_quiet(quiet);

    try {
        if (*pre) return cmd_preprocess(pre_in, pre_out, dump, pre_pipeline);
        if (*split) return cmd_split(sp_root, sp_catalog, sp_out, sp_seed, sp_fr);
        if (*train) {
            TrainSettings st;
            if (!tr_config.empty()) {
                if (!fs::exists(tr_config)) throw Error(ErrorCode::ConfigError, "config not found: " + tr_config);
                st.set_all(parse_key_values(read_text_file(tr_config)));
            }
            for (const auto& kv : tr_set) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, "--set expects key=value");
                st.set(kv.substr(0, eq), kv.substr(eq + 1));
            }
            if (!tr_root.empty()) st.root = tr_root;
            if (!tr_out.empty()) st.train.out_dir = tr_out;
            if (tr_seed) st.train.seed = *tr_seed;
            if (tr_epochs) st.train.max_epochs = *tr_epochs;
            if (tr_resume) st.train.resume = true;
            return cmd_train(std::move(st));
        }
        if (*eval) return cmd_eval(ev_ckpt, ev_manifest, ev_root, ev_catalog, ev_split, ev_csv, ev_pct, ev_confused, ev_cache);
        if (*infer) return cmd_infer(in_ckpt, in_image, in_catalog);
        if (*serve) {
            sv.apply_env([](const char* k) { return std::getenv(k); });
            if (!sv_ckpt.empty()) sv.checkpoint = sv_ckpt;
            if (!sv_catalog.empty()) sv.catalog = sv_catalog;
            if (sv_threshold) sv.threshold = *sv_threshold;
            if (!sv_listen.empty()) std::tie(sv.host, sv.port) = checkout::parse_listen(sv_listen);
            if (!sv_log.empty()) sv.log_path = sv_log;
            return cmd_serve(sv);
        }
        if (*synth) return cmd_synth(sy_out, sy_per, sy_seed, sy_classes);
    } catch (const Error& e) {
        std::cerr << "[error] " << to_string(e.code()) << ": " << e.what() << '\n';
        return e.code() == ErrorCode::ConfigError ? kExitUsage : kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "[error] " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace arc::cli
