#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "calm/error.hpp"

namespace calm {

/// Liquidity / maturity time buckets, ordered from shortest to longest.
enum class Bucket { Day = 0, Week = 1, Month = 2, Year = 3 };

inline constexpr std::array<Bucket, 4> kBuckets{Bucket::Day, Bucket::Week, Bucket::Month, Bucket::Year};

inline constexpr std::size_t index(Bucket b) { return static_cast<std::size_t>(b); }

/// Span of each bucket in calendar days.
inline constexpr int span_days(Bucket b) {
    constexpr std::array<int, 4> spans{1, 7, 30, 365};
    return spans[index(b)];
}

/// One value per bucket, indexed by Bucket.
template <class T>
struct PerBucket {
    std::array<T, 4> values{};

    T& operator[](Bucket b) { return values[index(b)]; }
    const T& operator[](Bucket b) const { return values[index(b)]; }
    friend bool operator==(const PerBucket&, const PerBucket&) = default;
};

inline std::string_view to_string(Bucket b) {
    constexpr std::array<std::string_view, 4> names{"day", "week", "month", "year"};
    return names[index(b)];
}

inline Bucket parse_bucket(std::string_view s) {
    for (Bucket b : kBuckets)
        if (to_string(b) == s) return b;
    throw DomainError("unknown bucket '" + std::string(s) + "'");
}

}  // namespace calm
