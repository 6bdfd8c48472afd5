#pragma once

#include <cstdio>

#include "params.hpp"

namespace cvqkd {

// Fixed 12-significant-digit formatting so identical runs emit identical bytes.
inline std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct OutputRecord {
  ParamMap params;
  // result columns in fixed order after the sorted parameter columns
  std::vector<std::pair<std::string, ParamValue>> results;
};

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

inline std::string value_csv(const ParamValue& v) {
  return v.kind == ParamValue::Kind::Text ? csv_escape(v.text) : format_value(v.num);
}

inline std::string value_json(const ParamValue& v) {
  if (v.kind == ParamValue::Kind::Text) return "\"" + json_escape(v.text) + "\"";
  if (!std::isfinite(v.num)) return "null";
  return format_value(v.num);
}

}  // namespace detail

inline std::string to_csv(const std::vector<OutputRecord>& records) {
  if (records.empty()) return "";
  std::string out;
  bool first = true;
  for (const auto& [key, _] : records.front().params) {
    if (!first) out += ',';
    out += key;
    first = false;
  }
  for (const auto& [key, _] : records.front().results) {
    out += ',';
    out += key;
  }
  out += '\n';
  for (const auto& rec : records) {
    first = true;
    for (const auto& [_, val] : rec.params) {
      if (!first) out += ',';
      out += detail::value_csv(val);
      first = false;
    }
    for (const auto& [_, val] : rec.results) {
      out += ',';
      out += detail::value_csv(val);
    }
    out += '\n';
  }
  return out;
}

inline std::string to_json(const std::vector<OutputRecord>& records) {
  std::string out = "[";
  bool first_rec = true;
  for (const auto& rec : records) {
    if (!first_rec) out += ',';
    out += "\n  {";
    bool first = true;
    for (const auto& [key, val] : rec.params) {
      if (!first) out += ", ";
      out += "\"" + detail::json_escape(key) + "\": " + detail::value_json(val);
      first = false;
    }
    for (const auto& [key, val] : rec.results) {
      if (!first) out += ", ";
      out += "\"" + detail::json_escape(key) + "\": " + detail::value_json(val);
      first = false;
    }
    out += "}";
    first_rec = false;
  }
  out += "\n]\n";
  return out;
}

}  // namespace cvqkd
