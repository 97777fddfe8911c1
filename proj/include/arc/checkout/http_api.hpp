#pragma once

#include "arc/checkout/service.hpp"
#include "arc/common/error.hpp"

#include <json.hpp>

#include <functional>
#include <memory>
#include <string>

namespace arc::checkout {

/// HTTP status for a library error code.
int http_status(ErrorCode code);
/// {"code": ..., "message": ...}
nlohmann::json error_body(std::string_view code, std::string_view message);

/// JSON-over-HTTP front end of a CheckoutService:
///   POST /sessions                  201 session
///   GET  /sessions/{id}             200 session
///   POST /sessions/{id}/items       200 {result, cart}   body: PNG or JPEG
///   POST /sessions/{id}/lines       200 {cart}           body: {line_no?, item_id}
///   POST /sessions/{id}/checkout    200 {receipt, receipt_text}
///   GET  /catalog, GET /healthz
/// Money appears both as a decimal string (`total`) and as integer minor
/// units (`total_minor`).
class ApiServer {
public:
    explicit ApiServer(CheckoutService& service);
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    /// Binds; port 0 picks a free port. Returns the bound port. Throws IoError.
    int bind(const std::string& host, int port);
    /// Serves until stop(); call after bind().
    void run();
    void stop();
    bool running() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct ServeConfig {
    std::string checkpoint;
    std::string catalog;
    double threshold = kDefaultThreshold;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string log_path = "checkout-events.jsonl";

    /// Overlays ARC_CHECKPOINT, ARC_CATALOG, ARC_THRESHOLD, ARC_LISTEN
    /// (host:port) and ARC_LOG from `getenv`.
    void apply_env(const std::function<const char*(const char*)>& getenv);
    /// Throws ConfigError.
    void validate() const;
    nlohmann::json to_json() const;
};

/// "host:port" -> (host, port). Throws ConfigError.
std::pair<std::string, int> parse_listen(const std::string& text);

/// Network identifier for a checkpoint, with the preprocessing configuration
/// saved alongside it (defaults when absent).
std::shared_ptr<const Identifier> load_identifier(const std::string& checkpoint_path);

}  // namespace arc::checkout
