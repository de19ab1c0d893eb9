#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "laf/dbscan.hpp"
#include "laf/detail/binary_io.hpp"

namespace laf {

enum class VectorFormat { csv, fvecs };

inline VectorFormat parse_vector_format(const std::string& s) {
  if (s == "csv") return VectorFormat::csv;
  if (s == "fvecs") return VectorFormat::fvecs;
  throw InvalidArgument("unknown vector format '" + s + "' (expected csv or fvecs)");
}

/// Guesses the format from the file extension; defaults to csv.
inline VectorFormat format_from_path(const std::string& path) {
  return std::filesystem::path(path).extension() == ".fvecs" ? VectorFormat::fvecs : VectorFormat::csv;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline double parse_real(std::string_view field, std::size_t line) {
  field = trim(field);
  double v = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw FormatError("line " + std::to_string(line) + ": cannot parse '" + std::string(field) + "' as a number");
  }
  if (!std::isfinite(v)) throw FormatError("line " + std::to_string(line) + ": non-finite value");
  return v;
}

} // namespace detail

/// One vector per non-empty line, comma separated.
inline Dataset read_csv(std::istream& is, bool normalize_rows) {
  std::vector<float> flat;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    std::size_t fields = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = text.find(',', start);
      const auto field = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      const double v = detail::parse_real(field, line_no);
      if (std::abs(v) > 3.4e38) throw FormatError("line " + std::to_string(line_no) + ": value overflows float");
      flat.push_back(static_cast<float>(v));
      ++fields;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (dim == 0) {
      dim = fields;
    } else if (fields != dim) {
      throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim) + " values, found " +
                        std::to_string(fields));
    }
  }
  if (dim == 0) throw FormatError("no vectors found");
  try {
    return Dataset(dim, std::move(flat), normalize_rows);
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
}

/// Records of a little-endian int32 dimension followed by that many float32
/// values; every record must share the first record's dimension.
inline Dataset read_fvecs(std::istream& is, bool normalize_rows) {
  std::vector<float> flat;
  std::size_t dim = 0;
  std::size_t record = 0;
  while (is.peek() != std::char_traits<char>::eof()) {
    const auto d = static_cast<std::int32_t>(detail::get_u32(is, "record header"));
    if (d <= 0) throw FormatError("record " + std::to_string(record) + ": invalid dimension " + std::to_string(d));
    if (dim == 0) {
      dim = static_cast<std::size_t>(d);
    } else if (static_cast<std::size_t>(d) != dim) {
      throw FormatError("record " + std::to_string(record) + ": dimension " + std::to_string(d) +
                        " differs from first record's " + std::to_string(dim));
    }
    for (std::size_t k = 0; k < dim; ++k) {
      const float v = detail::get_f32(is, "record body");
      if (!std::isfinite(v)) throw FormatError("record " + std::to_string(record) + ": non-finite value");
      flat.push_back(v);
    }
    ++record;
  }
  if (dim == 0) throw FormatError("no vectors found");
  try {
    return Dataset(dim, std::move(flat), normalize_rows);
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
}

inline void write_fvecs(std::ostream& os, const Dataset& data) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    detail::put_u32(os, static_cast<std::uint32_t>(data.dim()));
    for (float v : data[i]) detail::put_f32(os, v);
  }
}

inline void write_csv(std::ostream& os, const Dataset& data) {
  char buf[64];
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = data[i];
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) os << ',';
      // shortest representation that round-trips the float
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, row[k]);
      os.write(buf, end - buf);
    }
    os << '\n';
  }
}

inline Dataset load_dataset(const std::string& path, VectorFormat format, bool normalize_rows) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  try {
    return format == VectorFormat::csv ? read_csv(is, normalize_rows) : read_fvecs(is, normalize_rows);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

/// Writes via a temporary file in the same directory, then renames it over
/// `path`, so readers never observe a partial file.
inline void write_file_atomic(const std::string& path, const std::function<void(std::ostream&)>& body) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp.string() + " for writing");
    body(os);
    os.flush();
    if (!os) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

/// CSV with header "index,label"; noise is -1.
inline void write_labels(std::ostream& os, const ClusterAssignment& c) {
  os << "index,label\n";
  for (std::size_t i = 0; i < c.labels.size(); ++i) os << i << ',' << c.labels[i] << '\n';
}

inline ClusterAssignment read_labels(std::istream& is) {
  ClusterAssignment c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    if (line_no == 1 && text == "index,label") continue;
    const auto comma = text.find(',');
    if (comma == std::string_view::npos) {
      throw FormatError("line " + std::to_string(line_no) + ": expected 'index,label'");
    }
    const auto idx_text = detail::trim(text.substr(0, comma));
    const auto label_text = detail::trim(text.substr(comma + 1));
    std::size_t idx = 0;
    Label label = 0;
    auto r1 = std::from_chars(idx_text.data(), idx_text.data() + idx_text.size(), idx);
    auto r2 = std::from_chars(label_text.data(), label_text.data() + label_text.size(), label);
    if (r1.ec != std::errc() || r1.ptr != idx_text.data() + idx_text.size() || r2.ec != std::errc() ||
        r2.ptr != label_text.data() + label_text.size()) {
      throw FormatError("line " + std::to_string(line_no) + ": malformed label row");
    }
    if (idx != c.labels.size()) {
      throw FormatError("line " + std::to_string(line_no) + ": expected index " + std::to_string(c.labels.size()));
    }
    if (label < kNoise || label == kUndefined) {
      throw FormatError("line " + std::to_string(line_no) + ": label must be -1 or a positive cluster id");
    }
    c.labels.push_back(label);
    c.num_clusters = std::max(c.num_clusters, label);
  }
  return c;
}

inline ClusterAssignment load_labels(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  try {
    return read_labels(is);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline void save_labels(const std::string& path, const ClusterAssignment& c) {
  write_file_atomic(path, [&](std::ostream& os) { write_labels(os, c); });
}

inline std::vector<double> load_thresholds(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::string_view rest = line;
    while (!rest.empty()) {
      const auto cut = rest.find_first_of(", \t");
      const auto field = detail::trim(rest.substr(0, cut));
      if (!field.empty()) out.push_back(detail::parse_real(field, line_no));
      if (cut == std::string_view::npos) break;
      rest.remove_prefix(cut + 1);
    }
  }
  if (out.empty()) throw FormatError(path + ": no thresholds found");
  return out;
}

} // namespace laf
