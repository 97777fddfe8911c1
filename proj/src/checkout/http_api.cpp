#include "arc/checkout/http_api.hpp"

#include "arc/common/log.hpp"
#include "arc/nn/checkpoint.hpp"

#include <httplib.h>

#include <atomic>
#include <charconv>

namespace arc::checkout {

using nlohmann::json;

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnknownSession:
        case ErrorCode::UnknownItem:
        case ErrorCode::UnknownLine: return 404;
        case ErrorCode::SessionClosed: return 409;
        case ErrorCode::NoObject:
        case ErrorCode::NoForeground:
        case ErrorCode::DegenerateImage:
        case ErrorCode::BadImage:
        case ErrorCode::InvalidChannels:
        case ErrorCode::EmptyCart: return 422;
        case ErrorCode::ConfigError: return 400;
        default: return 500;
    }
}

json error_body(std::string_view code, std::string_view message) {
    return {{"code", code}, {"message", message}};
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message) {
    send_json(res, status, error_body(code, message));
}

// Runs a handler, mapping failures to JSON error responses.
template <typename F>
void guarded(httplib::Response& res, F&& body) {
    try {
        body();
    } catch (const Error& e) {
        // Pipeline failures on a frame surface as "no object" to the operator.
        ErrorCode code = e.code();
        if (code == ErrorCode::NoForeground || code == ErrorCode::DegenerateImage) code = ErrorCode::NoObject;
        if (code == ErrorCode::InvalidChannels) code = ErrorCode::BadImage;
        send_error(res, http_status(code), to_string(code), e.what());
    } catch (const std::exception& e) {
        log::warn(std::string("internal error: ") + e.what());
        send_error(res, 500, "Internal", e.what());
    }
}

json catalog_json(const dataset::Catalog& c) {
    json j = c.to_json();
    for (auto& item : j["items"]) item["unit_price_text"] = dataset::format_minor(item["unit_price"].get<std::int64_t>());
    return j;
}

}  // namespace

struct ApiServer::Impl {
    CheckoutService& service;
    httplib::Server server;
    std::atomic<bool> bound{false};

    explicit Impl(CheckoutService& s) : service(s) { routes(); }

    void routes() {
        const std::string currency = service.catalog().currency();
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                    {"Access-Control-Allow-Headers", "Content-Type"},
                                    {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
        server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

        server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, {{"status", "ok"}});
        });
        server.Get("/catalog", [this](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, catalog_json(service.catalog()));
        });
        server.Post("/sessions", [this, currency](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] { send_json(res, 201, to_json(service.begin_session(), currency)); });
        });
        server.Get(R"(/sessions/([0-9a-zA-Z_-]+))", [this, currency](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send_json(res, 200, to_json(service.session(req.matches[1]), currency)); });
        });
        server.Post(R"(/sessions/([0-9a-zA-Z_-]+)/items)",
                    [this, currency](const httplib::Request& req, httplib::Response& res) {
                        guarded(res, [&] {
                            const std::string type = req.get_header_value("Content-Type");
                            const auto base = type.substr(0, type.find(';'));
                            if (base != "image/png" && base != "image/jpeg") {
                                // Session checks come first so a closed session reports 409.
                                service.session(req.matches[1]);
                                send_error(res, 422, "BadImage", "content type must be image/png or image/jpeg");
                                return;
                            }
                            const auto* p = reinterpret_cast<const std::uint8_t*>(req.body.data());
                            const auto out = service.submit_item(req.matches[1], {p, req.body.size()});
                            send_json(res, 200,
                                      {{"result", to_json(out.result, service.catalog())},
                                       {"cart", to_json(out.cart, currency)}});
                        });
                    });
        server.Post(R"(/sessions/([0-9a-zA-Z_-]+)/lines)",
                    [this, currency](const httplib::Request& req, httplib::Response& res) {
                        guarded(res, [&] {
                            json body;
                            std::optional<int> line_no;
                            std::size_t item_id = 0;
                            try {
                                body = json::parse(req.body);
                                item_id = body.at("item_id").get<std::size_t>();
                                if (body.contains("line_no") && !body["line_no"].is_null()) {
                                    line_no = body["line_no"].get<int>();
                                }
                            } catch (const json::exception& e) {
                                service.session(req.matches[1]);
                                send_error(res, 400, "BadRequest", std::string("expected {line_no?, item_id}: ") + e.what());
                                return;
                            }
                            send_json(res, 200, {{"cart", to_json(service.override_line(req.matches[1], line_no, item_id), currency)}});
                        });
                    });
        server.Post(R"(/sessions/([0-9a-zA-Z_-]+)/checkout)",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        guarded(res, [&] {
                            const auto r = service.checkout(req.matches[1]);
                            send_json(res, 200, {{"receipt", to_json(r)}, {"receipt_text", render_receipt(r)}});
                        });
                    });
        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.body.empty()) {
                res.set_content(error_body(res.status == 404 ? "NotFound" : "HttpError", httplib::status_message(res.status)).dump(),
                                "application/json");
            }
        });
        server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
            log::info(req.method + " " + req.path + " -> " + std::to_string(res.status));
        });
    }
};

ApiServer::ApiServer(CheckoutService& service) : impl_(std::make_unique<Impl>(service)) {}
ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
    } else if (!impl_->server.bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound < 0) throw Error(ErrorCode::IoError, "cannot listen on " + host + ":" + std::to_string(port));
    impl_->bound = true;
    return bound;
}

void ApiServer::run() {
    if (!impl_->bound) throw Error(ErrorCode::ConfigError, "bind() before run()");
    impl_->server.listen_after_bind();
}

void ApiServer::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool ApiServer::running() const { return impl_->server.is_running(); }

std::pair<std::string, int> parse_listen(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0) {
        throw Error(ErrorCode::ConfigError, "listen address must be host:port, got '" + text + "'");
    }
    int port = -1;
    const char* b = text.data() + colon + 1;
    const char* e = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(b, e, port);
    if (ec != std::errc() || ptr != e || port < 0 || port > 65535) {
        throw Error(ErrorCode::ConfigError, "bad port in '" + text + "'");
    }
    return {text.substr(0, colon), port};
}

void ServeConfig::apply_env(const std::function<const char*(const char*)>& getenv) {
    if (const char* v = getenv("ARC_CHECKPOINT")) checkpoint = v;
    if (const char* v = getenv("ARC_CATALOG")) catalog = v;
    if (const char* v = getenv("ARC_THRESHOLD")) {
        try {
            std::size_t used = 0;
            threshold = std::stod(v, &used);
            if (used != std::string(v).size()) throw std::invalid_argument(v);
        } catch (const std::exception&) {
            throw Error(ErrorCode::ConfigError, std::string("bad ARC_THRESHOLD '") + v + "'");
        }
    }
    if (const char* v = getenv("ARC_LISTEN")) std::tie(host, port) = parse_listen(v);
    if (const char* v = getenv("ARC_LOG")) log_path = v;
}

void ServeConfig::validate() const {
    if (checkpoint.empty()) throw Error(ErrorCode::ConfigError, "a model checkpoint is required");
    if (catalog.empty()) throw Error(ErrorCode::ConfigError, "a catalog is required");
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw Error(ErrorCode::ConfigError, "threshold must be in [0, 1]");
    if (port < 0 || port > 65535) throw Error(ErrorCode::ConfigError, "port out of range");
}

json ServeConfig::to_json() const {
    return {{"checkpoint", checkpoint}, {"catalog", catalog}, {"threshold", threshold},
            {"listen", host + ":" + std::to_string(port)}, {"log", log_path}};
}

std::shared_ptr<const Identifier> load_identifier(const std::string& checkpoint_path) {
    auto loaded = nn::load_checkpoint(checkpoint_path);
    preprocess::PipelineConfig cfg;
    if (loaded.info.extra.contains("pipeline")) cfg = preprocess::PipelineConfig::from_json(loaded.info.extra["pipeline"]);
    return std::make_shared<NetworkIdentifier>(std::move(loaded.network), cfg);
}

}  // namespace arc::checkout
