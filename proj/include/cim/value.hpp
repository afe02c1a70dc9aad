#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace cim {

/// Scalar column/property types shared by the conceptual and store models.
enum class DataType { String, Integer, Decimal, Date, Boolean };

std::string_view to_string(DataType type);
std::optional<DataType> parse_data_type(std::string_view text);

/// Exact base-10 number: `units * 10^-scale`, kept in canonical form
/// (no trailing fractional zeros) so that equal values compare and hash equal.
class Decimal {
public:
    static constexpr int kMaxScale = 18;
    /// Fractional digits kept by `divide`.
    static constexpr int kDivisionScale = 8;

    constexpr Decimal() = default;
    Decimal(std::int64_t integer);  // NOLINT(google-explicit-constructor)

    static std::optional<Decimal> parse(std::string_view text);
    static Decimal from_units(__int128 units, int scale);

    std::string to_string() const;
    __int128 units() const { return units_; }
    int scale() const { return scale_; }

    Decimal operator+(const Decimal& other) const;
    Decimal operator-() const;
    /// Quotient rounded half away from zero to kDivisionScale digits.
    Decimal divide(std::int64_t divisor) const;

    friend bool operator==(const Decimal& a, const Decimal& b) {
        return a.units_ == b.units_ && a.scale_ == b.scale_;
    }
    friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b);

private:
    void normalize();

    __int128 units_ = 0;
    int scale_ = 0;
};

/// Calendar date stored as days since 1970-01-01.
struct Date {
    std::int32_t days = 0;

    static std::optional<Date> parse(std::string_view iso);
    static Date from_ymd(int year, unsigned month, unsigned day);
    std::string to_string() const;
    /// 0 = Monday ... 6 = Sunday.
    int weekday() const;
    int year() const;
    int month() const;
    int day_of_year() const;

    friend auto operator<=>(const Date&, const Date&) = default;
};

struct Null {
    friend auto operator<=>(const Null&, const Null&) = default;
};

/// A nullable scalar. Alternative order fixes the cross-type sort order.
class Value {
public:
    using Storage = std::variant<Null, bool, std::int64_t, Decimal, Date, std::string>;

    Value() = default;
    Value(Null) {}
    Value(bool b) : v_(b) {}
    Value(std::int64_t i) : v_(i) {}
    Value(int i) : v_(std::int64_t{i}) {}
    Value(Decimal d) : v_(d) {}
    Value(Date d) : v_(d) {}
    Value(std::string s) : v_(std::move(s)) {}
    Value(const char* s) : v_(std::string(s)) {}

    bool is_null() const { return std::holds_alternative<Null>(v_); }
    template <typename T> bool is() const { return std::holds_alternative<T>(v_); }
    template <typename T> const T& as() const { return std::get<T>(v_); }
    const Storage& storage() const { return v_; }

    /// Type of a non-null value.
    std::optional<DataType> type() const;
    bool conforms_to(DataType type) const { return is_null() || this->type() == type; }

    /// Text form used by CSV output and diagnostics; null renders as "".
    std::string to_string() const;
    /// Human-facing form: strings quoted, null as NULL.
    std::string to_literal() const;

    friend bool operator==(const Value&, const Value&) = default;
    friend std::strong_ordering operator<=>(const Value& a, const Value& b);

private:
    Storage v_;
};

/// Parses `text` as `type`. Empty text is not special-cased here.
std::optional<Value> parse_value(std::string_view text, DataType type);
/// Converts an already-typed literal to `type` (e.g. integer 3 to decimal 3,
/// string "2010-02-13" to a date). Returns nullopt when not representable.
std::optional<Value> coerce(const Value& value, DataType type);

struct ValueHash {
    std::size_t operator()(const Value& v) const;
};

}  // namespace cim
