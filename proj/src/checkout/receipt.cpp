#include "arc/checkout/receipt.hpp"

#include "arc/common/error.hpp"
#include "arc/dataset/catalog.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

namespace arc::checkout {

namespace {

const std::string kRule(kReceiptWidth, '-');

std::size_t display_width(std::string_view s) {
    std::size_t n = 0;
    for (const unsigned char c : s) n += (c & 0xC0) != 0x80;
    return n;
}

// First `cols` code points of s.
std::string clip(std::string_view s, std::size_t cols) {
    std::size_t n = 0, i = 0;
    for (; i < s.size(); ++i) {
        if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80 && n++ == cols) break;
    }
    return std::string(s.substr(0, i));
}

std::string two_columns(std::string_view left, const std::string& right) {
    const std::size_t room = kReceiptWidth - right.size() - 1;
    std::string l = clip(left, room);
    // Control characters would break the fixed layout.
    for (char& c : l)
        if (static_cast<unsigned char>(c) < 0x20) c = ' ';
    return l + std::string(kReceiptWidth - display_width(l) - right.size(), ' ') + right;
}

std::string rstrip(std::string s) {
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s;
}

}  // namespace

std::string render_receipt(const Receipt& r) {
    std::string out;
    const std::string title = "ARC CHECKOUT";
    const std::size_t pad = (kReceiptWidth - title.size()) / 2;
    out += std::string(pad, ' ') + title + "\n";
    out += kRule + "\n";
    for (const auto& line : r.lines) out += two_columns(line.name, dataset::format_minor(line.unit_price)) + "\n";
    out += kRule + "\n";
    out += two_columns("TOTAL " + r.currency, dataset::format_minor(r.total)) + "\n";
    char num[32];
    std::snprintf(num, sizeof num, "Receipt #%06llu", static_cast<unsigned long long>(r.number));
    out += std::string(num) + "\n";
    out += r.timestamp + "\n";
    return out;
}

ParsedReceipt parse_receipt(std::string_view text) {
    auto fail = [](const std::string& why) { return Error(ErrorCode::ConfigError, "malformed receipt: " + why); };
    std::vector<std::string> rows;
    std::istringstream in{std::string(text)};
    for (std::string row; std::getline(in, row);) rows.push_back(row);
    if (rows.size() < 6 || rows[0].find("ARC CHECKOUT") == std::string::npos || rows[1] != kRule) {
        throw fail("header");
    }
    auto split_amount = [&](const std::string& row) {
        const auto sp = row.find_last_of(' ');
        if (sp == std::string::npos) throw fail("no amount in '" + row + "'");
        return std::make_pair(rstrip(row.substr(0, sp)), dataset::parse_minor(row.substr(sp + 1)));
    };
    ParsedReceipt p;
    std::size_t i = 2;
    for (; i < rows.size() && rows[i] != kRule; ++i) {
        auto [name, amount] = split_amount(rows[i]);
        p.lines.push_back({name, amount});
    }
    if (i + 2 >= rows.size()) throw fail("missing total");
    const auto [label, total] = split_amount(rows[i + 1]);
    if (label.rfind("TOTAL", 0) != 0) throw fail("missing TOTAL line");
    p.total = total;
    const std::string& num = rows[i + 2];
    if (num.rfind("Receipt #", 0) != 0) throw fail("missing receipt number");
    const auto [ptr, ec] = std::from_chars(num.data() + 9, num.data() + num.size(), p.number);
    if (ec != std::errc() || ptr != num.data() + num.size()) throw fail("bad receipt number");
    return p;
}

}  // namespace arc::checkout
