#include "arc/checkout/service.hpp"

#include "arc/common/error.hpp"
#include "arc/common/file.hpp"
#include "arc/common/log.hpp"
#include "arc/vision/image_io.hpp"

#include <ctime>
#include <numeric>
#include <random>

namespace arc::checkout {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(SessionState s) { return s == SessionState::Open ? "open" : "closed"; }
std::string_view to_string(LineSource s) { return s == LineSource::Model ? "model" : "override"; }

std::string utc_timestamp() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json to_json(const CartLine& l) {
    return {{"line_no", l.line_no},
            {"item_id", l.item_id},
            {"name", l.name},
            {"unit_price", dataset::format_minor(l.unit_price)},
            {"unit_price_minor", l.unit_price},
            {"confidence", l.confidence ? json(*l.confidence) : json(nullptr)},
            {"source", to_string(l.source)}};
}

json to_json(const Receipt& r) {
    json lines = json::array();
    for (const auto& l : r.lines) {
        lines.push_back(
            {{"name", l.name}, {"unit_price", dataset::format_minor(l.unit_price)}, {"unit_price_minor", l.unit_price}});
    }
    return {{"number", r.number},
            {"session_id", r.session_id},
            {"lines", lines},
            {"total", dataset::format_minor(r.total)},
            {"total_minor", r.total},
            {"currency", r.currency},
            {"timestamp", r.timestamp}};
}

json to_json(const SessionView& s, const std::string& currency) {
    json lines = json::array();
    for (const auto& l : s.lines) lines.push_back(to_json(l));
    return {{"session_id", s.id},
            {"state", to_string(s.state)},
            {"lines", lines},
            {"total", dataset::format_minor(s.total)},
            {"total_minor", s.total},
            {"currency", currency},
            {"opened_at", s.opened_at},
            {"closed_at", s.closed_at.empty() ? json(nullptr) : json(s.closed_at)},
            {"receipt_number", s.receipt ? json(s.receipt->number) : json(nullptr)}};
}

json to_json(const IdentifyResult& r, const dataset::Catalog& catalog) {
    json top5 = json::array();
    for (const auto& c : r.top5) {
        top5.push_back({{"item_id", c.item_id}, {"name", catalog.at(c.item_id).name}, {"probability", c.probability}});
    }
    return {{"top1", r.top1},
            {"name", catalog.at(r.top1).name},
            {"confidence", r.confidence},
            {"accepted", r.accepted},
            {"top5", top5}};
}

namespace {

CartLine line_from_json(const json& j) {
    CartLine l;
    l.line_no = j.at("line_no").get<int>();
    l.item_id = j.at("item_id").get<std::size_t>();
    l.name = j.at("name").get<std::string>();
    l.unit_price = j.at("unit_price_minor").get<std::int64_t>();
    if (!j.at("confidence").is_null()) l.confidence = j.at("confidence").get<double>();
    l.source = j.at("source").get<std::string>() == "model" ? LineSource::Model : LineSource::Override;
    return l;
}

Receipt receipt_from_json(const json& j) {
    Receipt r;
    r.number = j.at("number").get<std::uint64_t>();
    r.session_id = j.at("session_id").get<std::string>();
    for (const auto& l : j.at("lines")) {
        r.lines.push_back({l.at("name").get<std::string>(), l.at("unit_price_minor").get<std::int64_t>()});
    }
    r.total = j.at("total_minor").get<std::int64_t>();
    r.currency = j.at("currency").get<std::string>();
    r.timestamp = j.at("timestamp").get<std::string>();
    return r;
}

std::int64_t sum_prices(const std::vector<CartLine>& lines) {
    return std::accumulate(lines.begin(), lines.end(), std::int64_t{0},
                           [](std::int64_t acc, const CartLine& l) { return acc + l.unit_price; });
}

std::uint64_t os_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace

CheckoutService::CheckoutService(dataset::Catalog catalog, std::shared_ptr<const Identifier> identifier,
                                 ServiceOptions options)
    : catalog_(std::move(catalog)),
      identifier_(std::move(identifier)),
      options_(std::move(options)),
      id_rng_(options_.id_seed ? *options_.id_seed : os_seed()) {
    if (!identifier_) throw Error(ErrorCode::ConfigError, "an identifier is required");
    if (identifier_->classes() != catalog_.size()) {
        throw Error(ErrorCode::ConfigError, "model has " + std::to_string(identifier_->classes()) +
                                                " classes but the catalog lists " + std::to_string(catalog_.size()));
    }
    if (!(options_.threshold >= 0.0 && options_.threshold <= 1.0)) {
        throw Error(ErrorCode::ConfigError, "threshold must be in [0, 1]");
    }
    if (!options_.log_path.empty()) {
        replay();
        if (options_.log_path.has_parent_path()) fs::create_directories(options_.log_path.parent_path());
        log_.open(options_.log_path, std::ios::app | std::ios::binary);
        if (!log_) throw Error(ErrorCode::IoError, "cannot open event log " + options_.log_path.string());
    }
}

std::string CheckoutService::now() const { return options_.clock ? options_.clock() : utc_timestamp(); }

std::string CheckoutService::new_id() {
    std::lock_guard lock(id_mu_);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string id;
    for (int part = 0; part < 2; ++part) {
        std::uint64_t v = id_rng_.next_u64();
        for (int k = 0; k < 16; ++k, v >>= 4) id += kHex[v & 15];
    }
    return id;
}

void CheckoutService::append(const json& event) {
    if (options_.log_path.empty()) return;
    std::lock_guard lock(log_mu_);
    log_ << event.dump() << '\n';
    log_.flush();
    if (!log_) throw Error(ErrorCode::IoError, "event log write failed");
}

std::uint64_t CheckoutService::append_checkout(Receipt& r) {
    std::lock_guard lock(log_mu_);
    r.number = next_receipt_;
    if (!options_.log_path.empty()) {
        log_ << json{{"event", "checkout"}, {"session_id", r.session_id}, {"receipt", to_json(r)}}.dump() << '\n';
        log_.flush();
        if (!log_) throw Error(ErrorCode::IoError, "event log write failed");
    }
    return next_receipt_++;
}

void CheckoutService::apply(const json& e) {
    const std::string type = e.at("event").get<std::string>();
    const std::string id = e.at("session_id").get<std::string>();
    if (type == "open") {
        auto s = std::make_shared<Session>();
        s->view.id = id;
        s->view.opened_at = e.at("at").get<std::string>();
        sessions_[id] = std::move(s);
        return;
    }
    auto& view = sessions_.at(id)->view;
    if (type == "line") {
        view.lines.push_back(line_from_json(e.at("line")));
    } else if (type == "replace") {
        const auto l = line_from_json(e.at("line"));
        view.lines.at(static_cast<std::size_t>(l.line_no - 1)) = l;
    } else if (type == "checkout") {
        view.receipt = receipt_from_json(e.at("receipt"));
        view.state = SessionState::Closed;
        view.closed_at = view.receipt->timestamp;
        next_receipt_ = std::max(next_receipt_, view.receipt->number + 1);
    } else {
        throw Error(ErrorCode::IoError, "unknown event type " + type);
    }
    view.total = sum_prices(view.lines);
}

void CheckoutService::replay() {
    if (!fs::exists(options_.log_path)) return;
    const std::string text = read_text_file(options_.log_path);
    std::size_t pos = 0, good = 0, n = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        const bool complete = nl != std::string::npos;
        const std::string_view line(text.data() + pos, (complete ? nl : text.size()) - pos);
        try {
            if (!complete) throw Error(ErrorCode::IoError, "unterminated record");
            apply(json::parse(line));
            ++n;
        } catch (const std::exception& e) {
            if (complete && text.find('\n', nl + 1) != std::string::npos) {
                throw Error(ErrorCode::IoError, "corrupt event log " + options_.log_path.string() + ": " + e.what());
            }
            // A torn final record from an interrupted write is dropped.
            log::warn("dropping incomplete final record of " + options_.log_path.string());
            fs::resize_file(options_.log_path, good);
            break;
        }
        pos = nl + 1;
        good = pos;
    }
    log::info("replayed " + std::to_string(n) + " events, " + std::to_string(sessions_.size()) + " sessions");
}

std::shared_ptr<CheckoutService::Session> CheckoutService::find(const std::string& id) const {
    std::shared_lock lock(sessions_mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "no session " + id);
    return it->second;
}

void CheckoutService::require_open(const Session& s) {
    if (s.view.state != SessionState::Open) throw Error(ErrorCode::SessionClosed, "session " + s.view.id + " is closed");
}

std::size_t CheckoutService::session_count() const {
    std::shared_lock lock(sessions_mu_);
    return sessions_.size();
}

SessionView CheckoutService::begin_session() {
    auto s = std::make_shared<Session>();
    s->view.opened_at = now();
    {
        std::unique_lock lock(sessions_mu_);
        do {
            s->view.id = new_id();
        } while (sessions_.count(s->view.id));
        sessions_[s->view.id] = s;
    }
    std::lock_guard lock(s->mu);
    append({{"event", "open"}, {"session_id", s->view.id}, {"at", s->view.opened_at}});
    return s->view;
}

SessionView CheckoutService::session(const std::string& id) const {
    const auto s = find(id);
    std::lock_guard lock(s->mu);
    return s->view;
}

SubmitOutcome CheckoutService::submit_item(const std::string& id, std::span<const std::uint8_t> image_bytes) {
    const auto s = find(id);
    {
        std::lock_guard lock(s->mu);
        require_open(*s);
    }
    return submit_frame(id, vision::decode_image(image_bytes));
}

SubmitOutcome CheckoutService::submit_frame(const std::string& id, const vision::Raster& frame) {
    const auto s = find(id);
    std::lock_guard lock(s->mu);
    require_open(*s);
    const auto probs = identifier_->probabilities(frame);
    if (probs.size() != catalog_.size()) throw Error(ErrorCode::ShapeError, "identifier output does not match catalog");
    SubmitOutcome out;
    out.result = decide(probs, options_.threshold);
    if (out.result.accepted) {
        const auto& item = catalog_.at(out.result.top1);
        CartLine line{static_cast<int>(s->view.lines.size() + 1), item.id, item.name, item.unit_price,
                      out.result.confidence, LineSource::Model};
        append({{"event", "line"}, {"session_id", id}, {"line", to_json(line)}});
        s->view.lines.push_back(std::move(line));
        s->view.total = sum_prices(s->view.lines);
    }
    out.cart = s->view;
    return out;
}

SessionView CheckoutService::override_line(const std::string& id, std::optional<int> line_no, std::size_t item_id) {
    const auto s = find(id);
    std::lock_guard lock(s->mu);
    require_open(*s);
    const auto& item = catalog_.at(item_id);
    if (line_no && (*line_no < 1 || static_cast<std::size_t>(*line_no) > s->view.lines.size())) {
        throw Error(ErrorCode::UnknownLine, "no line " + std::to_string(*line_no) + " in session " + id);
    }
    CartLine line{line_no ? *line_no : static_cast<int>(s->view.lines.size() + 1),
                  item.id,
                  item.name,
                  item.unit_price,
                  std::nullopt,
                  LineSource::Override};
    append({{"event", line_no ? "replace" : "line"}, {"session_id", id}, {"line", to_json(line)}});
    if (line_no) {
        s->view.lines[static_cast<std::size_t>(*line_no - 1)] = std::move(line);
    } else {
        s->view.lines.push_back(std::move(line));
    }
    s->view.total = sum_prices(s->view.lines);
    return s->view;
}

Receipt CheckoutService::checkout(const std::string& id) {
    const auto s = find(id);
    std::lock_guard lock(s->mu);
    require_open(*s);
    if (s->view.lines.empty()) throw Error(ErrorCode::EmptyCart, "session " + id + " has no items");
    Receipt r;
    r.session_id = id;
    for (const auto& l : s->view.lines) r.lines.push_back({l.name, l.unit_price});
    r.total = sum_prices(s->view.lines);
    r.currency = catalog_.currency();
    r.timestamp = now();
    append_checkout(r);
    s->view.state = SessionState::Closed;
    s->view.closed_at = r.timestamp;
    s->view.receipt = r;
    return r;
}

}  // namespace arc::checkout
