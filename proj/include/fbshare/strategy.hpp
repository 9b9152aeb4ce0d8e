#pragma once

#include <algorithm>
#include <compare>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbshare {

/// Per-user feedback bit allocation b = [b_1, ..., b_K].
struct Strategy {
    std::vector<int> bits;

    Strategy() = default;
    Strategy(std::initializer_list<int> values) : bits(values) {}
    explicit Strategy(std::vector<int> values) : bits(std::move(values)) {}

    std::size_t size() const { return bits.size(); }
    int operator[](std::size_t i) const { return bits[i]; }
    int total() const { return std::accumulate(bits.begin(), bits.end(), 0); }

    bool valid() const {
        return std::all_of(bits.begin(), bits.end(), [](int b) { return b >= 0; });
    }

    /// Components sorted non-increasing.
    Strategy sorted_desc() const {
        Strategy out = *this;
        std::sort(out.bits.begin(), out.bits.end(), std::greater<>());
        return out;
    }

    /// "[6,6,6,6]"
    std::string to_string() const {
        std::string s = "[";
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (i) s += ',';
            s += std::to_string(bits[i]);
        }
        return s + "]";
    }

    /// "6-6-6-6", safe inside CSV fields and file names.
    std::string label() const {
        std::string s;
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (i) s += '-';
            s += std::to_string(bits[i]);
        }
        return s;
    }

    friend bool operator==(const Strategy&, const Strategy&) = default;
    friend auto operator<=>(const Strategy&, const Strategy&) = default;
};

/// Parses "6,6,6,6", "[6,6,6,6]" or "6-6-6-6".
inline Strategy parse_strategy(const std::string& text) {
    Strategy out;
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        std::size_t used = 0;
        const int v = std::stoi(token, &used);
        if (used != token.size() || v < 0) throw std::invalid_argument("bad strategy component '" + token + "'");
        out.bits.push_back(v);
        token.clear();
    };
    for (char c : text) {
        if (c == '[' || c == ']' || c == ' ') continue;
        if (c == ',' || c == '-') {
            flush();
            continue;
        }
        token += c;
    }
    flush();
    if (out.bits.empty()) throw std::invalid_argument("empty strategy");
    return out;
}

}  // namespace fbshare
