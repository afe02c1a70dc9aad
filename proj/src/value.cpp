#include "cim/value.hpp"

#include <array>
#include <charconv>
#include <functional>
#include <stdexcept>

namespace cim {

namespace {

constexpr std::array<std::string_view, 5> kTypeNames = {"string", "integer", "decimal", "date",
                                                         "boolean"};

__int128 pow10(int n) {
    __int128 r = 1;
    for (int i = 0; i < n; ++i) r *= 10;
    return r;
}

// Howard Hinnant's civil-calendar conversions.
std::int32_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int>(doe) - 719468;
}

struct Civil {
    int y;
    unsigned m;
    unsigned d;
};

Civil civil_from_days(std::int32_t z) {
    z += 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int y = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return {y + (m <= 2), m, d};
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

unsigned days_in_month(int y, unsigned m) {
    static constexpr std::array<unsigned, 12> kDays = {31, 28, 31, 30, 31, 30,
                                                       31, 31, 30, 31, 30, 31};
    return m == 2 && is_leap(y) ? 29 : kDays[m - 1];
}

std::string int128_to_string(__int128 v) {
    if (v == 0) return "0";
    const bool neg = v < 0;
    unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1
                              : static_cast<unsigned __int128>(v);
    std::string out;
    while (u > 0) {
        out.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
        u /= 10;
    }
    if (neg) out.push_back('-');
    return {out.rbegin(), out.rend()};
}

}  // namespace

std::string_view to_string(DataType type) { return kTypeNames[static_cast<std::size_t>(type)]; }

std::optional<DataType> parse_data_type(std::string_view text) {
    for (std::size_t i = 0; i < kTypeNames.size(); ++i)
        if (kTypeNames[i] == text) return static_cast<DataType>(i);
    return std::nullopt;
}

// ---------------------------------------------------------------- Decimal

Decimal::Decimal(std::int64_t integer) : units_(integer), scale_(0) {}

Decimal Decimal::from_units(__int128 units, int scale) {
    Decimal d;
    d.units_ = units;
    d.scale_ = scale;
    d.normalize();
    return d;
}

void Decimal::normalize() {
    if (units_ == 0) {
        scale_ = 0;
        return;
    }
    while (scale_ > 0 && units_ % 10 == 0) {
        units_ /= 10;
        --scale_;
    }
}

std::optional<Decimal> Decimal::parse(std::string_view text) {
    if (text.empty()) return std::nullopt;
    bool neg = false;
    std::size_t i = 0;
    if (text[0] == '-' || text[0] == '+') {
        neg = text[0] == '-';
        ++i;
    }
    __int128 units = 0;
    int scale = 0;
    bool seen_point = false;
    bool seen_digit = false;
    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '.') {
            if (seen_point) return std::nullopt;
            seen_point = true;
            continue;
        }
        if (c < '0' || c > '9') return std::nullopt;
        seen_digit = true;
        if (seen_point) {
            if (scale == kMaxScale) {
                if (c != '0') return std::nullopt;
                continue;
            }
            ++scale;
        }
        units = units * 10 + (c - '0');
        if (units > pow10(36)) return std::nullopt;
    }
    if (!seen_digit) return std::nullopt;
    return from_units(neg ? -units : units, scale);
}

std::string Decimal::to_string() const {
    std::string digits = int128_to_string(units_ < 0 ? -units_ : units_);
    if (scale_ > 0) {
        if (static_cast<int>(digits.size()) <= scale_)
            digits.insert(0, static_cast<std::size_t>(scale_ - static_cast<int>(digits.size()) + 1), '0');
        digits.insert(digits.size() - static_cast<std::size_t>(scale_), ".");
    }
    return units_ < 0 ? "-" + digits : digits;
}

Decimal Decimal::operator+(const Decimal& other) const {
    const int scale = std::max(scale_, other.scale_);
    return from_units(units_ * pow10(scale - scale_) + other.units_ * pow10(scale - other.scale_),
                      scale);
}

Decimal Decimal::operator-() const { return from_units(-units_, scale_); }

Decimal Decimal::divide(std::int64_t divisor) const {
    if (divisor == 0) throw std::domain_error("decimal division by zero");
    // One guard digit beyond kDivisionScale, then round.
    __int128 q = units_ * pow10(kDivisionScale + 1) / (divisor * pow10(scale_));
    const bool neg = q < 0;
    if (neg) q = -q;
    q = (q + 5) / 10;
    return from_units(neg ? -q : q, kDivisionScale);
}

std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
    const int scale = std::max(a.scale_, b.scale_);
    const __int128 x = a.units_ * pow10(scale - a.scale_);
    const __int128 y = b.units_ * pow10(scale - b.scale_);
    return x < y ? std::strong_ordering::less
                 : (x > y ? std::strong_ordering::greater : std::strong_ordering::equal);
}

// ---------------------------------------------------------------- Date

Date Date::from_ymd(int year, unsigned month, unsigned day) {
    return Date{days_from_civil(year, month, day)};
}

std::optional<Date> Date::parse(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    auto num = [&](std::size_t pos, std::size_t len, auto& out) {
        auto [p, ec] = std::from_chars(iso.data() + pos, iso.data() + pos + len, out);
        return ec == std::errc{} && p == iso.data() + pos + len;
    };
    if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return std::nullopt;
    if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m)) return std::nullopt;
    return from_ymd(y, m, d);
}

std::string Date::to_string() const {
    const Civil c = civil_from_days(days);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", c.y, c.m, c.d);
    return buf;
}

int Date::weekday() const {
    // 1970-01-01 was a Thursday (index 3).
    return static_cast<int>(((days % 7) + 7 + 3) % 7);
}

int Date::year() const { return civil_from_days(days).y; }
int Date::month() const { return static_cast<int>(civil_from_days(days).m); }
int Date::day_of_year() const { return days - days_from_civil(year(), 1, 1) + 1; }

// ---------------------------------------------------------------- Value

std::optional<DataType> Value::type() const {
    switch (v_.index()) {
        case 1: return DataType::Boolean;
        case 2: return DataType::Integer;
        case 3: return DataType::Decimal;
        case 4: return DataType::Date;
        case 5: return DataType::String;
        default: return std::nullopt;
    }
}

std::string Value::to_string() const {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Null>) return "";
            else if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
            else if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(x);
            else if constexpr (std::is_same_v<T, std::string>) return x;
            else return x.to_string();
        },
        v_);
}

std::string Value::to_literal() const {
    if (is_null()) return "NULL";
    if (is<std::string>() || is<Date>()) return "\"" + to_string() + "\"";
    return to_string();
}

std::strong_ordering operator<=>(const Value& a, const Value& b) {
    if (a.v_.index() != b.v_.index()) return a.v_.index() <=> b.v_.index();
    return std::visit(
        [&](const auto& x) -> std::strong_ordering {
            using T = std::decay_t<decltype(x)>;
            const T& y = std::get<T>(b.v_);
            if constexpr (std::is_same_v<T, std::string>) return x.compare(y) <=> 0;
            else return x <=> y;
        },
        a.v_);
}

std::optional<Value> parse_value(std::string_view text, DataType type) {
    switch (type) {
        case DataType::String: return Value(std::string(text));
        case DataType::Integer: {
            std::int64_t v = 0;
            auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
            if (ec != std::errc{} || p != text.data() + text.size() || text.empty())
                return std::nullopt;
            return Value(v);
        }
        case DataType::Decimal:
            if (auto d = Decimal::parse(text)) return Value(*d);
            return std::nullopt;
        case DataType::Date:
            if (auto d = Date::parse(text)) return Value(*d);
            return std::nullopt;
        case DataType::Boolean:
            if (text == "true" || text == "1") return Value(true);
            if (text == "false" || text == "0") return Value(false);
            return std::nullopt;
    }
    return std::nullopt;
}

std::optional<Value> coerce(const Value& value, DataType type) {
    if (value.is_null() || value.type() == type) return value;
    if (type == DataType::Decimal && value.is<std::int64_t>())
        return Value(Decimal(value.as<std::int64_t>()));
    if (type == DataType::Integer && value.is<Decimal>()) {
        const Decimal& d = value.as<Decimal>();
        if (d.scale() == 0) return Value(static_cast<std::int64_t>(d.units()));
        return std::nullopt;
    }
    if (value.is<std::string>()) return parse_value(value.as<std::string>(), type);
    if (type == DataType::String) return Value(value.to_string());
    return std::nullopt;
}

std::size_t ValueHash::operator()(const Value& v) const {
    return std::visit(
        [](const auto& x) -> std::size_t {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Null>) return 0x9e3779b9;
            else if constexpr (std::is_same_v<T, Decimal>)
                return std::hash<std::int64_t>{}(static_cast<std::int64_t>(x.units())) ^
                       (static_cast<std::size_t>(x.scale()) << 7);
            else if constexpr (std::is_same_v<T, Date>) return std::hash<std::int32_t>{}(x.days) * 31;
            else return std::hash<T>{}(x);
        },
        v.storage());
}

}  // namespace cim
