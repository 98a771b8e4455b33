#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace autoct {

/// Proleptic Gregorian calendar date, stored as days since 1970-01-01.
class Date {
public:
    constexpr Date() = default;

    static Date from_ymd(int year, unsigned month, unsigned day);
    /// Strict ISO 8601 calendar date: YYYY-MM-DD.
    static std::optional<Date> parse(std::string_view text);
    static Date parse_or_throw(std::string_view text);

    [[nodiscard]] std::int64_t days_since_epoch() const { return days_; }
    [[nodiscard]] Date plus_days(std::int64_t delta) const { return Date(days_ + delta); }
    [[nodiscard]] std::string to_string() const;

    friend constexpr auto operator<=>(const Date&, const Date&) = default;

private:
    explicit constexpr Date(std::int64_t days) : days_(days) {}
    std::int64_t days_ = 0;
};

}  // namespace autoct
