#include "arc/common/file.hpp"
#include "arc/nn/checkpoint.hpp"
#include "arc/training/evaluate.hpp"
#include "arc/training/trainer.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <set>

using namespace arc;
using namespace arc::training;

namespace {

nn::NetworkSpec tiny_spec(std::size_t classes = 3) {
    nn::NetworkSpec s;
    s.input = {3, 16, 16};
    s.conv_channels = {4, 4};
    s.pools = {2, 2};
    s.hidden = {16, 8};
    s.classes = classes;
    return s;
}

// Class c is a noisy square tinted towards channel c.
std::vector<LabeledImage> tinted_images(std::size_t per_class, std::size_t classes, std::uint64_t seed,
                                        int side = 16) {
    Rng rng(seed);
    std::vector<LabeledImage> out;
    for (std::size_t i = 0; i < per_class; ++i) {
        for (std::size_t c = 0; c < classes; ++c) {
            vision::Raster img(side, side, 3);
            for (int y = 0; y < side; ++y)
                for (int x = 0; x < side; ++x)
                    for (int ch = 0; ch < 3; ++ch) {
                        const bool hot = static_cast<std::size_t>(ch) == c % 3 && y > 2 && y < side - 3 && x > 2;
                        img.at(y, x, ch) = static_cast<std::uint8_t>((hot ? 150 : 20) + rng.uniform_int(60));
                    }
            out.push_back({std::move(img), c});
        }
    }
    return out;
}

std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("arc_training_" + name);
    std::filesystem::remove_all(p);
    return p;
}

TrainConfig small_config(const std::filesystem::path& dir, int epochs) {
    TrainConfig c;
    c.max_epochs = epochs;
    c.batch_size = 8;
    c.seed = 11;
    c.out_dir = dir;
    c.schedule.base_lr = 0.01;
    return c;
}

}  // namespace

// --- optimizer ---------------------------------------------------------------

TEST(AmsGrad, HandEvaluatedFirstStep) {
    double p = 1.0;
    const double g = 1.0;
    MomentState<double> st(1);
    AmsGradConfig cfg;
    amsgrad_update<double>({&p, 1}, {&g, 1}, st, 0.001, 0.0, cfg);
    EXPECT_NEAR(st.m[0], 0.1, 1e-15);
    EXPECT_NEAR(st.v[0], 0.001, 1e-15);
    EXPECT_NEAR(st.vhat[0], 0.001, 1e-15);
    const double expected_delta = -0.001 * 0.1 / (std::sqrt(0.001) + 1e-8);
    EXPECT_NEAR(p - 1.0, expected_delta, 1e-12);
    EXPECT_NEAR(p - 1.0, -0.0031623, 1e-7);
}

TEST(AmsGrad, ZeroGradientWithoutDecayIsFixedPoint) {
    std::vector<double> p{1.5, -2.0, 0.0}, g(3, 0.0);
    const auto before = p;
    MomentState<double> st(3);
    for (int i = 0; i < 50; ++i) amsgrad_update<double>(p, g, st, 0.01, 0.0, {});
    EXPECT_EQ(p, before);
}

TEST(AmsGrad, DecayPullsTowardZero) {
    double p = 1.0;
    const double g = 0.0;
    MomentState<double> st(1);
    double prev = p;
    for (int i = 0; i < 10; ++i) {
        amsgrad_update<double>({&p, 1}, {&g, 1}, st, 0.001, 0.01, {});
        EXPECT_LT(p, prev);
        prev = p;
    }
    EXPECT_GT(st.m[0], 0.0);
    EXPECT_LT(st.m[0], 0.01 * (1 - std::pow(0.9, 10)));
}

TEST(AmsGrad, VhatNonDecreasingAndDominatesV) {
    Rng rng(3);
    std::vector<double> p(64), g(64);
    for (auto& v : p) v = rng.normal();
    MomentState<double> st(64);
    for (int step = 0; step < 300; ++step) {
        // Bursty gradient magnitudes so v goes up and down.
        const double scale = (step % 37 < 5) ? 10.0 : 0.1;
        for (auto& v : g) v = rng.normal() * scale;
        const auto prev = st.vhat;
        amsgrad_update<double>(p, g, st, 0.001, 0.01, {});
        for (std::size_t i = 0; i < p.size(); ++i) {
            ASSERT_GE(st.vhat[i], prev[i]);
            ASSERT_GE(st.vhat[i], st.v[i]);
        }
    }
}

TEST(AmsGrad, NanGradientAbortsWholeStep) {
    nn::Network<double> net(tiny_spec(), 1);
    auto params = net.params();
    for (auto& pr : params) pr.grad->fill(0.5);
    AmsGrad<double> opt;
    opt.step(params, 0.001);
    std::vector<nn::Tensor<double>> before;
    for (auto& pr : params) before.push_back(*pr.value);
    const auto moments = opt.moments();
    (*params.back().grad)[0] = std::numeric_limits<double>::quiet_NaN();
    try {
        opt.step(params, 0.001);
        FAIL() << "expected NumericalError";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NumericalError);
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        EXPECT_EQ(params[i].value->values()[0], before[i].values()[0]);
        EXPECT_EQ(opt.moments()[i].m, moments[i].m);
    }
    EXPECT_EQ(opt.steps(), 1u);
}

TEST(AmsGrad, StepCountStrictlyIncreases) {
    nn::Network<double> net(tiny_spec(), 1);
    AmsGrad<double> opt;
    auto params = net.params();
    for (std::uint64_t i = 1; i <= 5; ++i) {
        opt.step(params, 0.001);
        EXPECT_EQ(opt.steps(), i);
    }
}

TEST(AmsGrad, DecayOnlyOnConvAndDenseParameters) {
    nn::Network<double> net(tiny_spec(), 1);
    auto params = net.params();
    std::map<std::string, nn::Tensor<double>> before;
    for (auto& pr : params) {
        pr.grad->fill(0.0);
        before.emplace(pr.name, *pr.value);
    }
    AmsGrad<double> opt;
    opt.step(params, 0.001);
    for (auto& pr : params) {
        const bool decayed = pr.name.rfind("conv", 0) == 0 || pr.name.rfind("fc", 0) == 0;
        EXPECT_EQ(pr.decay, decayed) << pr.name;
        const bool changed = !(pr.value->values()[0] == before.at(pr.name).values()[0]);
        EXPECT_EQ(changed, decayed) << pr.name;
    }
}

TEST(AmsGrad, NonPositiveLearningRateRejected) {
    nn::Network<double> net(tiny_spec(), 1);
    AmsGrad<double> opt;
    EXPECT_THROW(opt.step(net.params(), 0.0), Error);
}

TEST(AmsGrad, StateFileRoundTrip) {
    nn::Network<float> net(tiny_spec(), 1);
    auto params = net.params();
    Rng rng(4);
    AmsGrad<float> opt;
    for (int s = 0; s < 3; ++s) {
        for (auto& pr : params)
            for (auto& v : pr.grad->values()) v = static_cast<float>(rng.normal());
        opt.step(params, 0.001);
    }
    const auto path = scratch_dir("optim") / "state.optim";
    std::filesystem::create_directories(path.parent_path());
    opt.save(path);
    AmsGrad<float> back;
    back.load(path);
    EXPECT_EQ(back.steps(), 3u);
    ASSERT_EQ(back.moments().size(), opt.moments().size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        EXPECT_EQ(back.moments()[i].vhat, opt.moments()[i].vhat);
    }
    auto bytes = read_file_bytes(path);
    bytes.resize(bytes.size() - 1);
    write_file_bytes(path, bytes);
    EXPECT_THROW(back.load(path), Error);
}

// --- schedule ----------------------------------------------------------------

TEST(Schedule, AnchorValues) {
    const Schedule s;
    EXPECT_DOUBLE_EQ(lr_at(0, s, 0), 0.001);
    EXPECT_NEAR(lr_at(1, s, 0), 0.00096, 1e-15);
    EXPECT_NEAR(lr_at(21, s, 0), 0.001 * std::pow(0.96, 20) * 0.75, 1e-15);
    EXPECT_NEAR(lr_at(25, s, 0), 0.001 * std::pow(0.96, 20) * std::pow(0.75, 5), 1e-15);
}

TEST(Schedule, PlateauEventIsExactTenth) {
    const Schedule s;
    for (int e : {0, 3, 20, 40})
        for (int k = 0; k < 3; ++k) EXPECT_EQ(lr_at(e, s, k + 1), lr_at(e, s, k) * 0.1);
}

TEST(Schedule, PlateauCounting) {
    const Schedule s;
    EXPECT_EQ(plateau_events(std::vector<double>{}, s), 0);
    // Steady improvement: no events.
    EXPECT_EQ(plateau_events(std::vector<double>{1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4}, s), 0);
    // Best at epoch 0, then five stale epochs: one event, counter restarts.
    EXPECT_EQ(plateau_events(std::vector<double>{1.0, 1.0, 1.0, 1.0, 1.0, 1.0}, s), 1);
    EXPECT_EQ(plateau_events(std::vector<double>{1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0}, s), 1);
    EXPECT_EQ(plateau_events(std::vector<double>{1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0}, s), 2);
    // Improvements smaller than min_delta do not count.
    EXPECT_EQ(plateau_events(std::vector<double>{1.0, 0.99995, 0.99994, 0.99993, 0.99992, 0.99991}, s), 1);
    // An improvement resets the window.
    EXPECT_EQ(plateau_events(std::vector<double>{1.0, 1.0, 1.0, 1.0, 0.5, 0.5, 0.5, 0.5}, s), 0);
}

TEST(Schedule, NonIncreasingAndPositive) {
    const Schedule s;
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> hist;
        double prev = lr_at(0, s, hist);
        for (int e = 1; e <= 100; ++e) {
            hist.push_back(1.0 + rng.uniform() * 0.01);
            const double lr = lr_at(e, s, hist);
            ASSERT_GT(lr, 0.0);
            ASSERT_LE(lr, prev);
            prev = lr;
        }
    }
    for (int k = 0; k < 5; ++k) {
        double prev = lr_at(0, s, k);
        for (int e = 1; e < 100; ++e) {
            ASSERT_LE(lr_at(e, s, k), prev);
            prev = lr_at(e, s, k);
        }
    }
}

TEST(Schedule, NegativeEpochRejected) {
    EXPECT_THROW(lr_at(-1, Schedule{}, 0), Error);
}

// --- minibatches -------------------------------------------------------------

TEST(Minibatch, RotatedHalfMirrorsDrawnHalf) {
    const auto pool = tinted_images(10, 3, 5);
    Rng rng(9);
    const auto b = assemble_minibatch(pool, 3, rng);
    ASSERT_EQ(b.images.shape(), (nn::Shape{32, 3, 16, 16}));
    ASSERT_EQ(b.labels.size(), 32u);
    std::set<std::size_t> distinct(b.source.begin(), b.source.end());
    EXPECT_EQ(distinct.size(), 16u);
    const std::size_t stride = 3 * 16 * 16;
    for (std::size_t i = 0; i < 16; ++i) {
        const int angle = b.rotations[i];
        EXPECT_TRUE(angle == 90 || angle == 180 || angle == 270);
        EXPECT_EQ(b.labels[16 + i], b.labels[i]);
        EXPECT_EQ(b.labels[i], pool[b.source[i]].label);
        const auto rot = vision::rotate(pool[b.source[i]].image, angle);
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x)
                for (int c = 0; c < 3; ++c) {
                    const float orig = b.images[i * stride + c * 256 + y * 16 + x];
                    const float turned = b.images[(16 + i) * stride + c * 256 + y * 16 + x];
                    ASSERT_EQ(orig, pool[b.source[i]].image.at(y, x, c) / 255.0f);
                    ASSERT_EQ(turned, rot.at(y, x, c) / 255.0f);
                }
        EXPECT_EQ(b.onehot[(16 + i) * 3 + b.labels[i]], 1.0f);
    }
}

TEST(Minibatch, LabelMultisetIsDoubled) {
    const auto pool = tinted_images(10, 3, 5);
    Rng rng(10);
    for (int t = 0; t < 20; ++t) {
        const auto b = assemble_minibatch(pool, 3, rng);
        std::multiset<std::size_t> first(b.labels.begin(), b.labels.begin() + 16);
        std::multiset<std::size_t> second(b.labels.begin() + 16, b.labels.end());
        EXPECT_EQ(first, second);
    }
}

TEST(Minibatch, SeedFixesSequence) {
    const auto pool = tinted_images(10, 3, 5);
    Rng a(21), b(21);
    for (int t = 0; t < 5; ++t) {
        const auto x = assemble_minibatch(pool, 3, a);
        const auto y = assemble_minibatch(pool, 3, b);
        EXPECT_EQ(x.source, y.source);
        EXPECT_EQ(x.rotations, y.rotations);
        EXPECT_TRUE(std::equal(x.images.values().begin(), x.images.values().end(), y.images.values().begin()));
    }
}

TEST(Minibatch, AnglesRoughlyUniform) {
    const auto pool = tinted_images(6, 3, 5);
    Rng rng(2);
    std::map<int, int> seen;
    for (int t = 0; t < 300; ++t)
        for (const int a : assemble_minibatch(pool, 3, rng).rotations) ++seen[a];
    ASSERT_EQ(seen.size(), 3u);
    for (const auto& [angle, n] : seen) EXPECT_NEAR(n / 4800.0, 1.0 / 3.0, 0.03) << angle;
}

TEST(Minibatch, SmallPoolResamplesWithReplacement) {
    const auto pool = tinted_images(2, 3, 5);
    Rng rng(1);
    const auto b = assemble_minibatch(pool, 3, rng);
    EXPECT_EQ(b.labels.size(), 32u);
    for (const auto s : b.source) EXPECT_LT(s, pool.size());
}

TEST(Minibatch, EpochGroupsCoverEveryItem) {
    Rng rng(3);
    const auto groups = epoch_groups(50, 16, rng);
    ASSERT_EQ(groups.size(), 4u);
    std::set<std::size_t> all;
    for (const auto& g : groups) {
        EXPECT_EQ(g.size(), 16u);
        EXPECT_EQ(std::set<std::size_t>(g.begin(), g.end()).size(), 16u);
        all.insert(g.begin(), g.end());
    }
    EXPECT_EQ(all.size(), 50u);
    EXPECT_THROW(epoch_groups(5, 16, rng), Error);
}

TEST(Minibatch, PlanarScaling) {
    vision::Raster img(1, 2, 3);
    img.at(0, 0, 0) = 255;
    img.at(0, 1, 2) = 51;
    float out[6];
    write_planar(img, out);
    EXPECT_EQ(out[0], 1.0f);
    EXPECT_EQ(out[1], 0.0f);
    EXPECT_FLOAT_EQ(out[5], 0.2f);
    EXPECT_THROW(write_planar(vision::Raster(2, 2, 1), out), Error);
}

// --- evaluation --------------------------------------------------------------

TEST(Confusion, AllCorrectIsDiagonal) {
    ConfusionMatrix m(4);
    for (std::size_t c = 0; c < 4; ++c)
        for (int i = 0; i < 3; ++i) m.add(c, c);
    EXPECT_DOUBLE_EQ(m.accuracy(), 1.0);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(m.count(i, j), i == j ? 3u : 0u);
    EXPECT_TRUE(m.confused_rows().empty());
}

TEST(Confusion, TwoClassToyWithOneError) {
    ConfusionMatrix m(2);
    m.add(0, 0);
    m.add(0, 1);
    m.add(1, 1);
    m.add(1, 1);
    EXPECT_DOUBLE_EQ(m.accuracy(), 0.75);
    EXPECT_DOUBLE_EQ(m.row_percentages(0)[1], 50.0);
    EXPECT_EQ(m.confused_rows(), std::vector<std::size_t>{0});
    EXPECT_EQ(m.counts_csv(), "true\\predicted,0,1\n0,1,1\n1,0,2\n");
    EXPECT_EQ(m.percentages_csv({"a", "b"}, true), "true\\predicted,a,b\na,50.0000,50.0000\n");
}

TEST(Confusion, PercentRowsSumToHundred) {
    Rng rng(6);
    ConfusionMatrix m(7);
    for (int i = 0; i < 1000; ++i) m.add(rng.uniform_int(6), rng.uniform_int(7));
    for (std::size_t r = 0; r < 7; ++r) {
        const auto p = m.row_percentages(r);
        const double s = std::accumulate(p.begin(), p.end(), 0.0);
        if (m.row_total(r) > 0) {
            EXPECT_NEAR(s, 100.0, 0.01);
        } else {
            EXPECT_EQ(s, 0.0);
        }
    }
    EXPECT_THROW(m.add(7, 0), Error);
}

TEST(Evaluate, InvariantToOrderAndRejectsEmpty) {
    const nn::Network<float> net(tiny_spec(), 3);
    auto split = tinted_images(7, 3, 12);
    const auto a = evaluate(net, split, 5);
    Rng rng(4);
    rng.shuffle(split.begin(), split.end());
    const auto b = evaluate(net, split, 8);
    EXPECT_EQ(a.matrix, b.matrix);
    EXPECT_EQ(a.accuracy, b.accuracy);
    EXPECT_NEAR(a.loss, b.loss, 1e-6);
    std::uint64_t rows = 0;
    for (std::size_t c = 0; c < 3; ++c) rows += a.matrix.row_total(c);
    EXPECT_EQ(rows, split.size());
    EXPECT_THROW(evaluate(net, std::span<const LabeledImage>{}), Error);
}

TEST(Evaluate, TopKOrdering) {
    const std::vector<float> p{0.1f, 0.4f, 0.05f, 0.4f, 0.05f};
    const auto t = top_k(p, 3);
    ASSERT_EQ(t.size(), 3u);
    EXPECT_EQ(t[0].first, 1u);
    EXPECT_EQ(t[1].first, 3u);
    EXPECT_EQ(t[2].first, 0u);
    EXPECT_EQ(top_k(p, 10).size(), 5u);
    EXPECT_EQ(argmax(p), 1u);
}

// --- trainer -----------------------------------------------------------------

TEST(Trainer, MetricsLineRoundTrip) {
    const EpochMetrics m{3, 0.001 * std::pow(0.96, 3), 0.123456789, 0.5, 1.25, 0.75};
    const auto back = parse_metrics(format_metrics(m));
    EXPECT_EQ(back.epoch, 3);
    EXPECT_EQ(back.lr, m.lr);
    EXPECT_NEAR(back.train_loss, m.train_loss, 1e-8);
    EXPECT_THROW(parse_metrics("1,2,3"), Error);
}

TEST(Trainer, ConfigValidation) {
    TrainConfig c = small_config("/tmp/x", 3);
    EXPECT_NO_THROW(c.validate());
    c.batch_size = 7;
    EXPECT_THROW(c.validate(), Error);
    c = small_config("/tmp/x", 101);
    EXPECT_THROW(c.validate(), Error);
    c = small_config("/tmp/x", 3);
    c.precision = "float16";
    EXPECT_THROW(c.validate(), Error);
}

TEST(Trainer, MissingSplitIsConfigError) {
    nn::Network<float> net(tiny_spec(), 1);
    const auto data = tinted_images(4, 3, 1);
    try {
        train(net, {}, data, small_config(scratch_dir("missing"), 1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    }
}

TEST(Trainer, LearnsAndLogsSchedule) {
    const auto train_set = tinted_images(12, 3, 1);
    const auto val_set = tinted_images(4, 3, 2);
    nn::Network<float> net(tiny_spec(), 7);
    const auto dir = scratch_dir("learn");
    auto cfg = small_config(dir, 12);
    const auto res = train(net, train_set, val_set, cfg);
    ASSERT_EQ(res.history.size(), 12u);
    EXPECT_GE(res.history.back().train_acc, 0.9);
    EXPECT_GE(res.history.back().val_acc, 0.9);

    const auto text = read_text_file(res.metrics_log);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, kMetricsHeader);
    std::vector<double> val_history;
    int n = 0;
    while (std::getline(in, line)) {
        const auto m = parse_metrics(line);
        EXPECT_EQ(m.epoch, n);
        EXPECT_EQ(m.lr, lr_at(n, cfg.schedule, val_history));
        val_history.push_back(res.history[n].val_loss);
        ++n;
    }
    EXPECT_EQ(n, 12);
    EXPECT_TRUE(std::filesystem::exists(res.best_checkpoint));
    const auto best = nn::load_checkpoint(res.best_checkpoint);
    EXPECT_EQ(best.info.epoch, res.best_epoch);
    for (const auto& m : res.history) {
        EXPECT_LE(m.val_acc, res.history[res.best_epoch].val_acc);
    }
}

TEST(Trainer, SameSeedGivesIdenticalFiles) {
    const auto train_set = tinted_images(6, 3, 1);
    const auto val_set = tinted_images(2, 3, 2);
    std::vector<std::vector<std::uint8_t>> ckpt, log;
    for (const char* name : {"det_a", "det_b"}) {
        nn::Network<float> net(tiny_spec(), 7);
        const auto res = train(net, train_set, val_set, small_config(scratch_dir(name), 3));
        ckpt.push_back(read_file_bytes(res.last_checkpoint));
        log.push_back(read_file_bytes(res.metrics_log));
    }
    EXPECT_EQ(ckpt[0], ckpt[1]);
    EXPECT_EQ(log[0], log[1]);
}

TEST(Trainer, ResumeMatchesUninterruptedRun) {
    const auto train_set = tinted_images(6, 3, 1);
    const auto val_set = tinted_images(2, 3, 2);
    nn::Network<float> straight(tiny_spec(), 7);
    const auto full = train(straight, train_set, val_set, small_config(scratch_dir("full"), 4));

    const auto dir = scratch_dir("resumed");
    nn::Network<float> first(tiny_spec(), 7);
    train(first, train_set, val_set, small_config(dir, 2));
    nn::Network<float> second(tiny_spec(), 99);
    auto cfg = small_config(dir, 4);
    cfg.resume = true;
    const auto res = train(second, train_set, val_set, cfg);
    EXPECT_EQ(res.history, full.history);
    EXPECT_EQ(read_file_bytes(res.last_checkpoint), read_file_bytes(full.last_checkpoint));
    EXPECT_EQ(read_file_bytes(res.metrics_log), read_file_bytes(full.metrics_log));
}

TEST(Trainer, DivergenceKeepsLastGoodCheckpoint) {
    const auto train_set = tinted_images(6, 3, 1);
    const auto val_set = tinted_images(2, 3, 2);
    const auto dir = scratch_dir("diverge");
    nn::Network<float> net(tiny_spec(), 7);
    train(net, train_set, val_set, small_config(dir, 1));
    const auto good = read_file_bytes(dir / "last.ckpt");
    const auto good_best = read_file_bytes(dir / "best.ckpt");

    auto cfg = small_config(dir, 3);
    cfg.resume = true;
    cfg.schedule.base_lr = 1e30;
    try {
        train(net, train_set, val_set, cfg);
        FAIL() << "expected divergence";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NumericalError);
    }
    EXPECT_EQ(read_file_bytes(dir / "last.ckpt"), good);
    EXPECT_EQ(read_file_bytes(dir / "best.ckpt"), good_best);
}
