#pragma once

#include "arc/checkout/identifier.hpp"
#include "arc/checkout/receipt.hpp"
#include "arc/common/random.hpp"
#include "arc/dataset/catalog.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

namespace arc::checkout {

enum class SessionState { Open, Closed };
enum class LineSource { Model, Override };

std::string_view to_string(SessionState s);
std::string_view to_string(LineSource s);

struct CartLine {
    int line_no = 0;  ///< 1-based
    std::size_t item_id = 0;
    std::string name;
    std::int64_t unit_price = 0;
    std::optional<double> confidence;  ///< set iff source is Model
    LineSource source = LineSource::Model;

    bool operator==(const CartLine&) const = default;
};

/// Copy of a session's state at one instant.
struct SessionView {
    std::string id;
    SessionState state = SessionState::Open;
    std::vector<CartLine> lines;
    std::int64_t total = 0;
    std::string opened_at;
    std::string closed_at;
    std::optional<Receipt> receipt;
};

struct SubmitOutcome {
    IdentifyResult result;
    SessionView cart;
};

struct ServiceOptions {
    double threshold = kDefaultThreshold;
    std::filesystem::path log_path;  ///< empty: no persistence
    /// Source of timestamps; defaults to the UTC wall clock.
    std::function<std::string()> clock;
    /// Seed for session ids; unset draws from the OS.
    std::optional<std::uint64_t> id_seed;
};

/// Checkout sessions over image submissions.
///
/// Sessions go Open -> Closed (checkout) and nothing else. Calls on one
/// session are serialized; calls on different sessions run concurrently.
/// Every state change is appended to a JSON-lines log, which is replayed on
/// construction.
class CheckoutService {
public:
    CheckoutService(dataset::Catalog catalog, std::shared_ptr<const Identifier> identifier,
                    ServiceOptions options = {});

    SessionView begin_session();
    /// Throws UnknownSession.
    SessionView session(const std::string& id) const;

    /// Decode, identify, and append a line when confident enough. Throws
    /// SessionClosed, BadImage or NoObject; the cart is unchanged then.
    SubmitOutcome submit_item(const std::string& id, std::span<const std::uint8_t> image_bytes);
    /// Same, for an already decoded frame.
    SubmitOutcome submit_frame(const std::string& id, const vision::Raster& frame);

    /// Replaces line `line_no` with `item_id`, or appends an override line
    /// when no line is given. Throws UnknownItem, UnknownLine, SessionClosed.
    SessionView override_line(const std::string& id, std::optional<int> line_no, std::size_t item_id);

    /// Closes the session and issues the next receipt. Throws EmptyCart
    /// (session stays open) or SessionClosed.
    Receipt checkout(const std::string& id);

    const dataset::Catalog& catalog() const { return catalog_; }
    double threshold() const { return options_.threshold; }
    std::size_t session_count() const;

private:
    struct Session {
        mutable std::mutex mu;
        SessionView view;
    };

    std::shared_ptr<Session> find(const std::string& id) const;
    static void require_open(const Session& s);
    std::string now() const;
    std::string new_id();
    void append(const nlohmann::json& event);
    std::uint64_t append_checkout(Receipt& r);
    void replay();
    void apply(const nlohmann::json& event);

    dataset::Catalog catalog_;
    std::shared_ptr<const Identifier> identifier_;
    ServiceOptions options_;

    mutable std::shared_mutex sessions_mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;

    std::mutex id_mu_;
    Rng id_rng_;

    std::mutex log_mu_;
    std::ofstream log_;
    std::uint64_t next_receipt_ = 1;
};

/// ISO-8601 UTC with second resolution.
std::string utc_timestamp();

nlohmann::json to_json(const CartLine& l);
nlohmann::json to_json(const SessionView& s, const std::string& currency);
nlohmann::json to_json(const Receipt& r);
nlohmann::json to_json(const IdentifyResult& r, const dataset::Catalog& catalog);

}  // namespace arc::checkout
