#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cyano {

// Proleptic Gregorian day arithmetic (Howard Hinnant's civil algorithms).
// Serial day 0 is 1970-01-01; all dates the pipeline touches fit in int32.
constexpr std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct CivilDate {
    int year;
    unsigned month;
    unsigned day;
};

constexpr CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return {static_cast<int>(y + (m <= 2)), m, d};
}

constexpr bool is_leap_year(int y) {
    return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0);
}

// Calendar date stored as a serial day count so day-level arithmetic and
// ordering are trivial.
class Date {
public:
    Date() : serial_(0) {}

    static Date from_ymd(int y, int m, int d) {
        if (m < 1 || m > 12 || d < 1 || d > 31)
            throw std::invalid_argument("invalid calendar date");
        Date out;
        out.serial_ = days_from_civil(y, static_cast<unsigned>(m),
                                      static_cast<unsigned>(d));
        const CivilDate back = civil_from_days(out.serial_);
        if (back.year != y || back.month != static_cast<unsigned>(m) ||
            back.day != static_cast<unsigned>(d))
            throw std::invalid_argument("invalid calendar date");
        return out;
    }

    static Date from_serial(std::int64_t s) {
        Date out;
        out.serial_ = s;
        return out;
    }

    // Accepts exactly "YYYY-MM-DD".
    static Date parse(std::string_view text) {
        if (text.size() != 10 || text[4] != '-' || text[7] != '-')
            throw std::invalid_argument("date must be YYYY-MM-DD: " +
                                        std::string(text));
        auto field = [&](std::size_t pos, std::size_t len) {
            int value = 0;
            const char* first = text.data() + pos;
            const auto res = std::from_chars(first, first + len, value);
            if (res.ec != std::errc() || res.ptr != first + len)
                throw std::invalid_argument("date must be YYYY-MM-DD: " +
                                            std::string(text));
            return value;
        };
        return from_ymd(field(0, 4), field(5, 2), field(8, 2));
    }

    std::int64_t serial() const { return serial_; }
    int year() const { return civil_from_days(serial_).year; }
    int month() const { return static_cast<int>(civil_from_days(serial_).month); }
    int day() const { return static_cast<int>(civil_from_days(serial_).day); }

    // 1-based ordinal within the year.
    int day_of_year() const {
        return static_cast<int>(serial_ - days_from_civil(year(), 1, 1)) + 1;
    }

    int days_in_year() const { return is_leap_year(year()) ? 366 : 365; }

    // DJF=0, MAM=1, JJA=2, SON=3.
    int season() const {
        const int m = month();
        if (m == 12 || m <= 2) return 0;
        if (m <= 5) return 1;
        if (m <= 8) return 2;
        return 3;
    }

    std::string to_string() const {
        const CivilDate c = civil_from_days(serial_);
        char buf[11];
        auto two = [](char* p, unsigned v) {
            p[0] = static_cast<char>('0' + v / 10);
            p[1] = static_cast<char>('0' + v % 10);
        };
        int y = c.year;
        buf[0] = static_cast<char>('0' + y / 1000 % 10);
        buf[1] = static_cast<char>('0' + y / 100 % 10);
        buf[2] = static_cast<char>('0' + y / 10 % 10);
        buf[3] = static_cast<char>('0' + y % 10);
        buf[4] = '-';
        two(buf + 5, c.month);
        buf[7] = '-';
        two(buf + 8, c.day);
        buf[10] = '\0';
        return std::string(buf, 10);
    }

    Date operator+(int days) const { return from_serial(serial_ + days); }
    Date operator-(int days) const { return from_serial(serial_ - days); }
    std::int64_t operator-(const Date& other) const {
        return serial_ - other.serial_;
    }
    auto operator<=>(const Date&) const = default;

private:
    std::int64_t serial_;
};

}  // namespace cyano
