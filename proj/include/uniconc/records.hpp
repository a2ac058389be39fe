#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace uniconc {

using FieldValue = std::variant<std::string, std::int64_t, std::uint64_t, double, bool>;

// One output row: fields in insertion order.
class Record {
 public:
  Record& add(std::string key, FieldValue value);

  template <class T>
  Record& add(std::string key, const T& value) {
    if constexpr (std::is_same_v<T, bool>) {
      return add(std::move(key), FieldValue(value));
    } else if constexpr (std::is_integral_v<T> && std::is_signed_v<T>) {
      return add(std::move(key), FieldValue(static_cast<std::int64_t>(value)));
    } else if constexpr (std::is_integral_v<T>) {
      return add(std::move(key), FieldValue(static_cast<std::uint64_t>(value)));
    } else if constexpr (std::is_floating_point_v<T>) {
      return add(std::move(key), FieldValue(static_cast<double>(value)));
    } else {
      return add(std::move(key), FieldValue(std::string(value)));
    }
  }

  const std::vector<std::pair<std::string, FieldValue>>& fields() const { return fields_; }
  const FieldValue* find(std::string_view key) const;

 private:
  std::vector<std::pair<std::string, FieldValue>> fields_;
};

enum class Format { kCsv, kJsonl };

Format parse_format(std::string_view text);

// Shortest decimal that round-trips; infinities as "inf" / "-inf", NaN as "nan".
std::string format_double(double v);

std::string format_field(const FieldValue& v);

// CSV with a header taken from the first record; every record must carry the
// same keys in the same order. Fields containing separators are quoted.
void write_csv(std::ostream& os, const std::vector<Record>& rows);

// One JSON object per line. Non-finite doubles are written as strings.
void write_jsonl(std::ostream& os, const std::vector<Record>& rows);

void write_records(std::ostream& os, const std::vector<Record>& rows, Format format);

std::string to_csv(const std::vector<Record>& rows);

}  // namespace uniconc
