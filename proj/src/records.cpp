#include "uniconc/records.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "uniconc/error.hpp"

namespace uniconc {

Record& Record::add(std::string key, FieldValue value) {
  fields_.emplace_back(std::move(key), std::move(value));
  return *this;
}

const FieldValue* Record::find(std::string_view key) const {
  for (const auto& [k, v] : fields_) {
    if (k == key) return &v;
  }
  return nullptr;
}

Format parse_format(std::string_view text) {
  if (text == "csv") return Format::kCsv;
  if (text == "jsonl") return Format::kJsonl;
  throw Error(Errc::kDomain, "--format: expected csv or jsonl, got '" + std::string(text) + "'");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_field(const FieldValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return x;
        } else if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, double>) {
          return format_double(x);
        } else {
          return std::to_string(x);
        }
      },
      v);
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void write_csv(std::ostream& os, const std::vector<Record>& rows) {
  if (rows.empty()) return;
  const auto& head = rows.front().fields();
  for (std::size_t i = 0; i < head.size(); ++i) {
    if (i) os << ',';
    os << csv_escape(head[i].first);
  }
  os << '\n';
  for (const Record& r : rows) {
    const auto& f = r.fields();
    if (f.size() != head.size()) {
      throw Error(Errc::kInternal, "CSV rows disagree on their columns");
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f[i].first != head[i].first) {
        throw Error(Errc::kInternal, "CSV rows disagree on column '" + head[i].first + "'");
      }
      if (i) os << ',';
      os << csv_escape(format_field(f[i].second));
    }
    os << '\n';
  }
}

void write_jsonl(std::ostream& os, const std::vector<Record>& rows) {
  for (const Record& r : rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.fields()) {
      std::visit(
          [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, double>) {
              if (std::isfinite(x)) {
                obj[k] = x;
              } else {
                obj[k] = format_double(x);
              }
            } else {
              obj[k] = x;
            }
          },
          v);
    }
    os << obj.dump() << '\n';
  }
}

void write_records(std::ostream& os, const std::vector<Record>& rows, Format format) {
  if (format == Format::kCsv) {
    write_csv(os, rows);
  } else {
    write_jsonl(os, rows);
  }
}

std::string to_csv(const std::vector<Record>& rows) {
  std::ostringstream os;
  write_csv(os, rows);
  return os.str();
}

}  // namespace uniconc
