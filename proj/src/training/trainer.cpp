#include "arc/training/trainer.hpp"

#include "arc/common/error.hpp"
#include "arc/common/file.hpp"
#include "arc/common/log.hpp"
#include "arc/nn/checkpoint.hpp"
#include "arc/training/evaluate.hpp"

#include <charconv>
#include <cstdio>

namespace arc::training {

namespace {

constexpr std::uint64_t kBatchStream = 1;
constexpr std::uint64_t kDropoutStream = 2;

std::uint64_t epoch_seed(std::uint64_t seed, int epoch, std::uint64_t stream) {
    return derive_seed(derive_seed(seed, static_cast<std::uint64_t>(epoch)), stream);
}

double parse_double(std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::ConfigError, "bad number in metrics log: '" + std::string(s) + "'");
    }
    return v;
}

bool better(const EpochMetrics& a, const EpochMetrics& b) {
    return a.val_acc > b.val_acc || (a.val_acc == b.val_acc && a.val_loss < b.val_loss);
}

std::string metrics_text(const std::vector<EpochMetrics>& history) {
    std::string out(kMetricsHeader);
    out += "\n";
    for (const auto& m : history) out += format_metrics(m) + "\n";
    return out;
}

}  // namespace

void TrainConfig::validate() const {
    if (max_epochs < 1 || max_epochs > 100) throw Error(ErrorCode::ConfigError, "max_epochs must be in [1, 100]");
    if (batch_size < 2 || batch_size % 2 != 0) throw Error(ErrorCode::ConfigError, "batch_size must be even");
    if (precision != "float32") throw Error(ErrorCode::ConfigError, "only float32 training is supported");
    if (checkpoint_every < 1) throw Error(ErrorCode::ConfigError, "checkpoint_every must be >= 1");
    if (eval_batch < 1) throw Error(ErrorCode::ConfigError, "eval_batch must be >= 1");
    if (out_dir.empty()) throw Error(ErrorCode::ConfigError, "an output directory is required");
    if (!(schedule.base_lr > 0.0) || !(schedule.decay_a > 0.0 && schedule.decay_a <= 1.0) ||
        !(schedule.decay_b > 0.0 && schedule.decay_b <= 1.0) ||
        !(schedule.plateau_factor > 0.0 && schedule.plateau_factor <= 1.0) || schedule.plateau_patience < 1) {
        throw Error(ErrorCode::ConfigError, "schedule must keep the learning rate positive and non-increasing");
    }
}

std::string format_metrics(const EpochMetrics& m) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.8f,%.8f,%.8f,%.8f", m.epoch, m.lr, m.train_loss, m.train_acc,
                  m.val_loss, m.val_acc);
    return buf;
}

EpochMetrics parse_metrics(std::string_view line) {
    std::vector<std::string_view> f;
    while (true) {
        const auto comma = line.find(',');
        f.push_back(line.substr(0, comma));
        if (comma == std::string_view::npos) break;
        line.remove_prefix(comma + 1);
    }
    if (f.size() != 6) throw Error(ErrorCode::ConfigError, "metrics line needs 6 fields");
    EpochMetrics m;
    m.epoch = static_cast<int>(parse_double(f[0]));
    m.lr = parse_double(f[1]);
    m.train_loss = parse_double(f[2]);
    m.train_acc = parse_double(f[3]);
    m.val_loss = parse_double(f[4]);
    m.val_acc = parse_double(f[5]);
    return m;
}

nlohmann::json to_json(const EpochMetrics& m) {
    return {{"epoch", m.epoch},           {"lr", m.lr},           {"train_loss", m.train_loss},
            {"train_acc", m.train_acc},   {"val_loss", m.val_loss}, {"val_acc", m.val_acc}};
}

EpochMetrics metrics_from_json(const nlohmann::json& j) {
    EpochMetrics m;
    m.epoch = j.at("epoch").get<int>();
    m.lr = j.at("lr").get<double>();
    m.train_loss = j.at("train_loss").get<double>();
    m.train_acc = j.at("train_acc").get<double>();
    m.val_loss = j.at("val_loss").get<double>();
    m.val_acc = j.at("val_acc").get<double>();
    return m;
}

TrainResult train(nn::Network<float>& net, std::span<const LabeledImage> train_split,
                  std::span<const LabeledImage> val_split, const TrainConfig& config,
                  const std::function<void(const EpochMetrics&)>& on_epoch) {
    config.validate();
    if (train_split.empty()) throw Error(ErrorCode::ConfigError, "training split is empty");
    if (val_split.empty()) throw Error(ErrorCode::ConfigError, "validation split is empty");
    const std::size_t half = config.batch_size / 2;
    const std::size_t classes = net.spec().classes;

    std::filesystem::create_directories(config.out_dir);
    TrainResult result;
    result.best_checkpoint = config.out_dir / "best.ckpt";
    result.last_checkpoint = config.out_dir / "last.ckpt";
    result.metrics_log = config.out_dir / "metrics.csv";
    const auto optim_path = config.out_dir / "last.optim";

    AmsGrad<float> opt(config.optimizer);
    int first_epoch = 0;
    if (config.resume && std::filesystem::exists(result.last_checkpoint)) {
        auto loaded = nn::load_checkpoint(result.last_checkpoint);
        if (!(loaded.network.spec() == net.spec())) {
            throw Error(ErrorCode::ConfigError, "checkpoint architecture does not match the configured network");
        }
        net = std::move(loaded.network);
        opt.load(optim_path);
        for (const auto& m : loaded.info.extra.at("training").at("history")) {
            result.history.push_back(metrics_from_json(m));
        }
        result.best_epoch = loaded.info.extra.at("training").at("best_epoch").get<int>();
        first_epoch = loaded.info.epoch + 1;
        log::info("resuming at epoch " + std::to_string(first_epoch));
    }

    std::vector<double> val_history;
    for (const auto& m : result.history) val_history.push_back(m.val_loss);
    auto params = net.params();

    for (int epoch = first_epoch; epoch < config.max_epochs; ++epoch) {
        EpochMetrics m;
        m.epoch = epoch;
        m.lr = lr_at(epoch, config.schedule, val_history);

        Rng rng(epoch_seed(config.seed, epoch, kBatchStream));
        net.reseed_dropout(epoch_seed(config.seed, epoch, kDropoutStream));
        net.set_mode(nn::Mode::Train);
        double loss_sum = 0.0;
        std::size_t hits = 0, seen = 0;
        try {
            std::vector<std::vector<std::size_t>> groups;
            if (train_split.size() >= half) {
                groups = epoch_groups(train_split.size(), half, rng);
            }
            const std::size_t steps = groups.empty() ? 1 : groups.size();
            for (std::size_t s = 0; s < steps; ++s) {
                const Minibatch b = groups.empty() ? assemble_minibatch(train_split, classes, rng, half)
                                                   : make_minibatch(train_split, groups[s], classes, rng);
                const auto probs = net.forward(b.images);
                loss_sum += nn::cross_entropy(probs, b.onehot) * static_cast<double>(b.labels.size());
                for (std::size_t i = 0; i < b.labels.size(); ++i) {
                    hits += argmax(std::span<const float>(probs.data() + i * classes, classes)) == b.labels[i];
                }
                seen += b.labels.size();
                net.backward_from_logits(nn::cross_entropy_logit_grad(probs, b.onehot));
                opt.step(params, m.lr);
            }
            net.set_mode(nn::Mode::Infer);
            const auto ev = evaluate(net, val_split, config.eval_batch);
            m.val_loss = ev.loss;
            m.val_acc = ev.accuracy;
        } catch (const Error& e) {
            if (e.code() == ErrorCode::NumericalError) {
                log::warn("epoch " + std::to_string(epoch) + " aborted: " + e.what() +
                          "; keeping checkpoints from the previous epoch");
            }
            throw;
        }
        m.train_loss = loss_sum / static_cast<double>(seen);
        m.train_acc = static_cast<double>(hits) / static_cast<double>(seen);
        result.history.push_back(m);
        val_history.push_back(m.val_loss);

        const bool is_best = result.best_epoch < 0 || better(m, result.history[static_cast<std::size_t>(result.best_epoch)]);
        if (is_best) result.best_epoch = epoch;

        nn::CheckpointInfo info;
        info.epoch = epoch;
        info.seed = config.seed;
        info.metrics = to_json(m);
        info.extra = config.extra;
        nlohmann::json hist = nlohmann::json::array();
        for (const auto& h : result.history) hist.push_back(to_json(h));
        info.extra["training"] = {{"history", hist}, {"best_epoch", result.best_epoch}};

        if (is_best) nn::save_checkpoint(result.best_checkpoint, net, info);
        if ((epoch + 1) % config.checkpoint_every == 0 || epoch + 1 == config.max_epochs) {
            nn::save_checkpoint(result.last_checkpoint, net, info);
            opt.save(optim_path);
        }
        const std::string text = metrics_text(result.history);
        write_file_atomic(result.metrics_log,
                          std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
        if (on_epoch) on_epoch(m);
    }
    return result;
}

}  // namespace arc::training
