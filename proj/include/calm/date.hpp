#pragma once

#include <chrono>
#include <compare>
#include <cstdio>
#include <string>
#include <string_view>

#include "calm/error.hpp"

namespace calm {

/// ISO-8601 calendar date (no time zone, no time of day).
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::year_month_day ymd) : days_(std::chrono::sys_days(ymd)) {}
    constexpr Date(int y, unsigned m, unsigned d)
        : Date(std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}}) {}

    /// Strict `YYYY-MM-DD`.
    static Date parse(std::string_view text) {
        auto fail = [&] { return DomainError("malformed date '" + std::string(text) + "', expected YYYY-MM-DD"); };
        if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw fail();
        for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
            if (text[i] < '0' || text[i] > '9') throw fail();
        auto num = [&](std::size_t pos, std::size_t len) {
            int v = 0;
            for (std::size_t i = pos; i < pos + len; ++i) v = v * 10 + (text[i] - '0');
            return v;
        };
        const std::chrono::year_month_day ymd{std::chrono::year{num(0, 4)},
                                              std::chrono::month{static_cast<unsigned>(num(5, 2))},
                                              std::chrono::day{static_cast<unsigned>(num(8, 2))}};
        if (!ymd.ok()) throw fail();
        return Date(ymd);
    }

    std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }

    std::string to_string() const {
        const auto d = ymd();
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                      static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
        return buf;
    }

    constexpr Date plus_days(long n) const {
        Date r;
        r.days_ = days_ + std::chrono::days{n};
        return r;
    }

    /// Signed number of days from `a` to `b`.
    friend constexpr long days_between(const Date& a, const Date& b) { return (b.days_ - a.days_).count(); }

    friend constexpr auto operator<=>(const Date&, const Date&) = default;
    friend constexpr bool operator==(const Date&, const Date&) = default;

private:
    std::chrono::sys_days days_{};
};

}  // namespace calm
