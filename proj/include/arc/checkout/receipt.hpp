#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace arc::checkout {

struct ReceiptLine {
    std::string name;
    std::int64_t unit_price = 0;

    bool operator==(const ReceiptLine&) const = default;
};

struct Receipt {
    std::uint64_t number = 0;
    std::string session_id;
    std::vector<ReceiptLine> lines;
    std::int64_t total = 0;
    std::string currency;
    std::string timestamp;  ///< ISO-8601 UTC

    bool operator==(const Receipt&) const = default;
};

inline constexpr std::size_t kReceiptWidth = 40;

/// Fixed-width text: centered ARC CHECKOUT header, one line per item with the
/// price right-aligned, a rule, the TOTAL line, then number and timestamp.
/// Long names are cut to fit.
std::string render_receipt(const Receipt& r);

struct ParsedReceipt {
    std::vector<ReceiptLine> lines;  ///< names as printed
    std::int64_t total = 0;
    std::uint64_t number = 0;
};

/// Reads back a rendered receipt. Throws ConfigError on malformed text.
ParsedReceipt parse_receipt(std::string_view text);

}  // namespace arc::checkout
