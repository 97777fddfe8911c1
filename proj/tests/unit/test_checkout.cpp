#include "arc/checkout/http_api.hpp"
#include "arc/common/file.hpp"
#include "arc/vision/image_io.hpp"

#include "support/checkout_fakes.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <filesystem>
#include <set>
#include <thread>

using namespace arc;
using namespace arc::checkout;
using arc::testing::PixelIdentifier;
namespace fs = std::filesystem;

namespace {

dataset::Catalog shop() {
    std::vector<dataset::CatalogEntry> items;
    for (std::size_t i = 0; i < 100; ++i) items.push_back({i, "d" + std::to_string(i), "Item " + std::to_string(i), 100});
    items[1].unit_price = 1250;
    items[2].unit_price = 330;
    items[21].unit_price = 499;
    items[74].unit_price = 1999;
    return dataset::Catalog("USD", std::move(items));
}

ServiceOptions fixed_clock(fs::path log = {}) {
    ServiceOptions o;
    o.clock = [] { return std::string("2024-01-02T03:04:05Z"); };
    o.id_seed = 42;
    o.log_path = std::move(log);
    return o;
}

CheckoutService make_service(fs::path log = {}) {
    return CheckoutService(shop(), std::make_shared<PixelIdentifier>(100), fixed_clock(std::move(log)));
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("arc_checkout_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

template <typename F>
ErrorCode error_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::IoError;
}

}  // namespace

TEST(Identify, DecideOrdersAndThresholds) {
    std::vector<float> p(10, 0.05f);
    p[3] = 0.3f;
    p[7] = 0.25f;
    const auto r = decide(p, 0.5);
    EXPECT_EQ(r.top1, 3u);
    EXPECT_FALSE(r.accepted);
    ASSERT_EQ(r.top5.size(), 5u);
    double s = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        s += r.top5[i].probability;
        if (i) EXPECT_GE(r.top5[i - 1].probability, r.top5[i].probability);
    }
    EXPECT_LE(s, 1.0);
    EXPECT_TRUE(decide(std::vector<float>{0.5f, 0.5f}, 0.5).accepted);
}

TEST(Session, BeginGivesEmptyOpenSessions) {
    auto svc = make_service();
    const auto a = svc.begin_session();
    const auto b = svc.begin_session();
    EXPECT_EQ(a.state, SessionState::Open);
    EXPECT_TRUE(a.lines.empty());
    EXPECT_EQ(a.total, 0);
    EXPECT_NE(a.id, b.id);
    EXPECT_EQ(svc.session(a.id).id, a.id);
    EXPECT_EQ(error_of([&] { svc.session("nope"); }), ErrorCode::UnknownSession);
}

TEST(Session, ConfidentSubmissionAddsLine) {
    auto svc = make_service();
    const auto id = svc.begin_session().id;
    const auto out = svc.submit_frame(id, PixelIdentifier::frame(1, 230));
    EXPECT_TRUE(out.result.accepted);
    EXPECT_EQ(out.result.top1, 1u);
    ASSERT_EQ(out.cart.lines.size(), 1u);
    EXPECT_EQ(out.cart.lines[0].unit_price, 1250);
    EXPECT_EQ(out.cart.lines[0].source, LineSource::Model);
    EXPECT_NEAR(*out.cart.lines[0].confidence, 230 / 255.0, 1e-6);
    EXPECT_EQ(out.cart.total, 1250);
}

TEST(Session, UniformModelIsRejected) {
    CheckoutService svc(shop(), std::make_shared<arc::testing::UniformIdentifier>(100), fixed_clock());
    const auto id = svc.begin_session().id;
    const auto out = svc.submit_frame(id, PixelIdentifier::frame(0, 0));
    EXPECT_FALSE(out.result.accepted);
    EXPECT_NEAR(out.result.confidence, 0.01, 1e-7);
    EXPECT_TRUE(out.cart.lines.empty());
    EXPECT_EQ(out.result.top5.size(), 5u);
}

TEST(Session, FailedSubmissionsLeaveCartAlone) {
    auto svc = make_service();
    const auto id = svc.begin_session().id;
    svc.submit_frame(id, PixelIdentifier::frame(2, 255));
    EXPECT_EQ(error_of([&] { svc.submit_frame(id, PixelIdentifier::frame(1, 255, false)); }), ErrorCode::NoObject);
    const std::vector<std::uint8_t> junk{1, 2, 3};
    EXPECT_EQ(error_of([&] { svc.submit_item(id, junk); }), ErrorCode::BadImage);
    EXPECT_EQ(svc.session(id).lines.size(), 1u);
    EXPECT_EQ(svc.session(id).total, 330);
}

TEST(Session, OverrideReplacesOrAppends) {
    auto svc = make_service();
    const auto id = svc.begin_session().id;
    svc.submit_frame(id, PixelIdentifier::frame(21, 255));
    auto v = svc.override_line(id, 1, 74);
    EXPECT_EQ(v.total, 1999);
    EXPECT_EQ(v.lines[0].source, LineSource::Override);
    EXPECT_FALSE(v.lines[0].confidence);
    v = svc.override_line(id, std::nullopt, 2);
    ASSERT_EQ(v.lines.size(), 2u);
    EXPECT_EQ(v.lines[1].line_no, 2);
    EXPECT_EQ(v.total, 1999 + 330);
    EXPECT_EQ(error_of([&] { svc.override_line(id, std::nullopt, 100); }), ErrorCode::UnknownItem);
    EXPECT_EQ(error_of([&] { svc.override_line(id, 3, 1); }), ErrorCode::UnknownLine);
    EXPECT_EQ(error_of([&] { svc.override_line(id, 0, 1); }), ErrorCode::UnknownLine);
    EXPECT_EQ(svc.session(id).total, 1999 + 330);
}

TEST(Session, CheckoutClosesAndSums) {
    auto svc = make_service();
    const auto id = svc.begin_session().id;
    EXPECT_EQ(error_of([&] { svc.checkout(id); }), ErrorCode::EmptyCart);
    EXPECT_EQ(svc.session(id).state, SessionState::Open);
    svc.override_line(id, std::nullopt, 1);
    svc.override_line(id, std::nullopt, 2);
    const auto r = svc.checkout(id);
    EXPECT_EQ(r.total, 1580);
    EXPECT_EQ(r.number, 1u);
    EXPECT_EQ(r.currency, "USD");
    EXPECT_EQ(svc.session(id).state, SessionState::Closed);
    EXPECT_EQ(error_of([&] { svc.checkout(id); }), ErrorCode::SessionClosed);
    EXPECT_EQ(error_of([&] { svc.override_line(id, std::nullopt, 1); }), ErrorCode::SessionClosed);
    const std::vector<std::uint8_t> junk{0};
    EXPECT_EQ(error_of([&] { svc.submit_item(id, junk); }), ErrorCode::SessionClosed);

    const auto id2 = svc.begin_session().id;
    svc.override_line(id2, std::nullopt, 3);
    EXPECT_EQ(svc.checkout(id2).number, 2u);
}

TEST(Receipt, LayoutAndParseBack) {
    Receipt r;
    r.number = 7;
    r.session_id = "s";
    r.currency = "USD";
    r.timestamp = "2024-01-02T03:04:05Z";
    r.lines = {{"Milk", 1250}, {"A very long product name that will not fit in forty columns", 330},
               {"Crème brûlée", 5}};
    r.total = 1585;
    const auto text = render_receipt(r);
    std::istringstream in(text);
    std::vector<std::string> rows;
    for (std::string row; std::getline(in, row);) rows.push_back(row);
    EXPECT_NE(rows[0].find("ARC CHECKOUT"), std::string::npos);
    EXPECT_EQ(rows[1], std::string(40, '-'));
    EXPECT_EQ(rows[2].size(), 40u);
    EXPECT_EQ(rows[2].substr(rows[2].size() - 5), "12.50");
    EXPECT_EQ(rows[3].size(), 40u);
    EXPECT_EQ(rows[4].substr(rows[4].size() - 4), "0.05");
    EXPECT_EQ(rows[6].substr(0, 5), "TOTAL");
    EXPECT_EQ(rows[6].substr(rows[6].size() - 5), "15.85");
    EXPECT_EQ(rows[7], "Receipt #000007");
    EXPECT_EQ(rows[8], r.timestamp);

    const auto p = parse_receipt(text);
    ASSERT_EQ(p.lines.size(), 3u);
    EXPECT_EQ(p.lines[0], (ReceiptLine{"Milk", 1250}));
    EXPECT_EQ(p.lines[2].name, "Crème brûlée");
    EXPECT_EQ(p.total, 1585);
    EXPECT_EQ(p.number, 7u);
    EXPECT_THROW(parse_receipt("hello"), Error);
}

TEST(Receipt, RandomReceiptsParseBackExactly) {
    Rng rng(5);
    for (int t = 0; t < 500; ++t) {
        Receipt r;
        r.number = rng.uniform_int(1000000);
        r.currency = "EUR";
        r.timestamp = "t";
        const std::size_t n = 1 + rng.uniform_int(20);
        for (std::size_t i = 0; i < n; ++i) {
            std::string name(1 + rng.uniform_int(50), 'a' + static_cast<char>(rng.uniform_int(26)));
            const auto price = static_cast<std::int64_t>(rng.uniform_int(10000000));
            r.lines.push_back({name, price});
            r.total += price;
        }
        const auto p = parse_receipt(render_receipt(r));
        std::int64_t sum = 0;
        for (const auto& l : p.lines) sum += l.unit_price;
        ASSERT_EQ(p.total, r.total);
        ASSERT_EQ(sum, r.total);
    }
}

TEST(Persistence, ReplayRestoresSessionsAndReceiptCounter) {
    const auto log = scratch("replay") / "events.jsonl";
    std::string open_id, closed_id;
    {
        auto svc = make_service(log);
        open_id = svc.begin_session().id;
        svc.submit_frame(open_id, PixelIdentifier::frame(1, 255));
        svc.override_line(open_id, 1, 2);
        closed_id = svc.begin_session().id;
        svc.override_line(closed_id, std::nullopt, 74);
        EXPECT_EQ(svc.checkout(closed_id).number, 1u);
    }
    ServiceOptions o = fixed_clock(log);
    o.id_seed = 43;
    CheckoutService svc(shop(), std::make_shared<PixelIdentifier>(100), o);
    EXPECT_EQ(svc.session_count(), 2u);
    const auto a = svc.session(open_id);
    ASSERT_EQ(a.lines.size(), 1u);
    EXPECT_EQ(a.lines[0].unit_price, 330);
    EXPECT_EQ(a.lines[0].source, LineSource::Override);
    const auto b = svc.session(closed_id);
    EXPECT_EQ(b.state, SessionState::Closed);
    EXPECT_EQ(b.receipt->total, 1999);
    svc.override_line(open_id, std::nullopt, 1);
    EXPECT_EQ(svc.checkout(open_id).number, 2u);
}

TEST(Persistence, TornTailDroppedCorruptMiddleRejected) {
    const auto dir = scratch("torn");
    const auto log = dir / "events.jsonl";
    std::string id;
    {
        auto svc = make_service(log);
        id = svc.begin_session().id;
        svc.override_line(id, std::nullopt, 1);
    }
    const auto good = read_text_file(log);
    write_text_file(log, good + R"({"event":"line","sess)");
    {
        auto svc = make_service(log);
        EXPECT_EQ(svc.session(id).total, 1250);
        svc.override_line(id, std::nullopt, 2);
    }
    EXPECT_EQ(make_service(log).session(id).total, 1580);

    write_text_file(log, "garbage\n" + good);
    EXPECT_EQ(error_of([&] { make_service(log); }), ErrorCode::IoError);
}

TEST(Service, RejectsMismatchedModel) {
    EXPECT_EQ(error_of([] { CheckoutService(shop(), std::make_shared<PixelIdentifier>(5)); }), ErrorCode::ConfigError);
    ServiceOptions o;
    o.threshold = 1.5;
    EXPECT_EQ(error_of([&] { CheckoutService(shop(), std::make_shared<PixelIdentifier>(100), o); }),
              ErrorCode::ConfigError);
}

TEST(Service, RandomizedStateMachine) {
    CheckoutService svc(arc::testing::priced_catalog(20), std::make_shared<PixelIdentifier>(20), fixed_clock());
    const auto rep = arc::testing::run_state_machine(svc, 300, 50, 17);
    EXPECT_EQ(rep.violations, 0u) << rep.first_violation;
    EXPECT_EQ(rep.sessions, 300u);
}

TEST(Service, ConcurrentSessionsStayConsistent) {
    CheckoutService svc(arc::testing::priced_catalog(20), std::make_shared<PixelIdentifier>(20), fixed_clock());
    const auto shared = svc.begin_session().id;
    std::vector<std::thread> threads;
    std::atomic<std::size_t> bad{0};
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&, t] {
            const auto rep = arc::testing::run_state_machine(svc, 40, 30, 100 + t);
            bad += rep.violations;
            for (int i = 0; i < 50; ++i) svc.override_line(shared, std::nullopt, (t * 7 + i) % 20);
        });
    }
    for (auto& th : threads) th.join();
    EXPECT_EQ(bad.load(), 0u);
    const auto v = svc.session(shared);
    EXPECT_EQ(v.lines.size(), 200u);
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < v.lines.size(); ++i) {
        sum += v.lines[i].unit_price;
        EXPECT_EQ(v.lines[i].line_no, static_cast<int>(i + 1));
    }
    EXPECT_EQ(v.total, sum);
}

// --- HTTP --------------------------------------------------------------------

class HttpApi : public ::testing::Test {
protected:
    void SetUp() override {
        svc_ = std::make_unique<CheckoutService>(shop(), std::make_shared<PixelIdentifier>(100), fixed_clock());
        server_ = std::make_unique<ApiServer>(*svc_);
        port_ = server_->bind("127.0.0.1", 0);
        thread_ = std::thread([this] { server_->run(); });
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
        for (int i = 0; i < 200 && !client_->Get("/healthz"); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    void TearDown() override {
        server_->stop();
        thread_.join();
    }

    nlohmann::json post_png(const std::string& id, const vision::Raster& frame, int expect) {
        const auto png = vision::encode_png(frame);
        auto res = client_->Post("/sessions/" + id + "/items", std::string(png.begin(), png.end()), "image/png");
        EXPECT_TRUE(res);
        EXPECT_EQ(res->status, expect) << res->body;
        return nlohmann::json::parse(res->body);
    }

    nlohmann::json call(const std::string& method, const std::string& path, int expect, const std::string& body = "") {
        auto res = method == "GET" ? client_->Get(path) : client_->Post(path, body, "application/json");
        EXPECT_TRUE(res);
        EXPECT_EQ(res->status, expect) << method << " " << path << " " << res->body;
        return res->body.empty() ? nlohmann::json() : nlohmann::json::parse(res->body);
    }

    std::unique_ptr<CheckoutService> svc_;
    std::unique_ptr<ApiServer> server_;
    std::unique_ptr<httplib::Client> client_;
    std::thread thread_;
    int port_ = 0;
};

TEST_F(HttpApi, FullFlow) {
    EXPECT_EQ(call("GET", "/healthz", 200)["status"], "ok");
    const auto cat = call("GET", "/catalog", 200);
    EXPECT_EQ(cat["items"].size(), 100u);
    EXPECT_EQ(cat["items"][1]["unit_price"], 1250);
    EXPECT_EQ(cat["items"][1]["unit_price_text"], "12.50");

    const auto s = call("POST", "/sessions", 201);
    const std::string id = s["session_id"];
    EXPECT_EQ(s["state"], "open");
    EXPECT_EQ(s["total"], "0.00");

    auto r = post_png(id, PixelIdentifier::frame(1, 240), 200);
    EXPECT_TRUE(r["result"]["accepted"].get<bool>());
    EXPECT_EQ(r["cart"]["total"], "12.50");
    EXPECT_EQ(r["cart"]["total_minor"], 1250);

    r = post_png(id, PixelIdentifier::frame(2, 40), 200);
    EXPECT_FALSE(r["result"]["accepted"].get<bool>());
    EXPECT_EQ(r["result"]["top5"].size(), 5u);
    EXPECT_EQ(r["cart"]["lines"].size(), 1u);

    auto err = post_png(id, PixelIdentifier::frame(2, 255, false), 422);
    EXPECT_EQ(err["code"], "NoObject");
    EXPECT_FALSE(err["message"].get<std::string>().empty());

    auto res = client_->Post("/sessions/" + id + "/items", "nope", "image/png");
    EXPECT_EQ(res->status, 422);
    EXPECT_EQ(nlohmann::json::parse(res->body)["code"], "BadImage");
    res = client_->Post("/sessions/" + id + "/items", "nope", "text/plain");
    EXPECT_EQ(res->status, 422);

    auto c = call("POST", "/sessions/" + id + "/lines", 200, R"({"item_id": 2})");
    EXPECT_EQ(c["cart"]["total"], "15.80");
    EXPECT_EQ(c["cart"]["lines"][1]["source"], "override");
    EXPECT_TRUE(c["cart"]["lines"][1]["confidence"].is_null());
    c = call("POST", "/sessions/" + id + "/lines", 200, R"({"line_no": 1, "item_id": 74})");
    EXPECT_EQ(c["cart"]["total_minor"], 1999 + 330);
    EXPECT_EQ(call("POST", "/sessions/" + id + "/lines", 404, R"({"item_id": 500})")["code"], "UnknownItem");
    EXPECT_EQ(call("POST", "/sessions/" + id + "/lines", 404, R"({"line_no": 9, "item_id": 1})")["code"],
              "UnknownLine");
    EXPECT_EQ(call("POST", "/sessions/" + id + "/lines", 400, R"({"item": 1})")["code"], "BadRequest");

    const auto co = call("POST", "/sessions/" + id + "/checkout", 200);
    EXPECT_EQ(co["receipt"]["total"], "23.29");
    EXPECT_EQ(parse_receipt(co["receipt_text"].get<std::string>()).total, 2329);
    EXPECT_EQ(call("GET", "/sessions/" + id, 200)["state"], "closed");
    EXPECT_EQ(call("POST", "/sessions/" + id + "/checkout", 409)["code"], "SessionClosed");
    EXPECT_EQ(post_png(id, PixelIdentifier::frame(1, 255), 409)["code"], "SessionClosed");
    EXPECT_EQ(call("POST", "/sessions/" + id + "/lines", 409, R"({"item_id": 1})")["code"], "SessionClosed");
}

TEST_F(HttpApi, ErrorsAreJson) {
    EXPECT_EQ(call("GET", "/sessions/missing", 404)["code"], "UnknownSession");
    const std::string id = call("POST", "/sessions", 201)["session_id"];
    EXPECT_EQ(call("POST", "/sessions/" + id + "/checkout", 422)["code"], "EmptyCart");
    EXPECT_EQ(call("GET", "/nowhere", 404)["code"], "NotFound");
}

TEST(ServeConfig, EnvironmentOverlay) {
    std::map<std::string, std::string> env{{"ARC_CHECKPOINT", "m.ckpt"}, {"ARC_CATALOG", "c.json"},
                                           {"ARC_THRESHOLD", "0.7"},    {"ARC_LISTEN", "0.0.0.0:9000"},
                                           {"ARC_LOG", "/tmp/e.jsonl"}};
    ServeConfig c;
    c.apply_env([&](const char* k) { return env.count(k) ? env[k].c_str() : nullptr; });
    EXPECT_EQ(c.checkpoint, "m.ckpt");
    EXPECT_EQ(c.threshold, 0.7);
    EXPECT_EQ(c.host, "0.0.0.0");
    EXPECT_EQ(c.port, 9000);
    EXPECT_EQ(c.log_path, "/tmp/e.jsonl");
    EXPECT_NO_THROW(c.validate());
    env["ARC_THRESHOLD"] = "high";
    EXPECT_THROW(c.apply_env([&](const char* k) { return env.count(k) ? env[k].c_str() : nullptr; }), Error);
    EXPECT_THROW(parse_listen("nohost"), Error);
    EXPECT_THROW(parse_listen("h:99999"), Error);
    EXPECT_EQ(parse_listen("[::1]:80").first, "[::1]");
}
