#pragma once

// Deterministic text output: fixed 17-significant-digit numbers, a manifest
// hash header, and write-to-temp-then-rename so no partial file survives an
// error.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "qnd/errors.hpp"

namespace qnd::io {

/// Fixed 17-significant-digit format (as %.17g), independent of locale.
inline std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc()) throw NumericalError("fmt: number formatting failed");
  return std::string(buf, ptr);
}

/// 64-bit FNV-1a, used only as a provenance fingerprint.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns) : ncol_(columns.size()) { line(columns); }

  void comment(std::string_view text) { prefix_ += "# " + std::string(text) + "\n"; }

  CsvWriter& row(const std::vector<double>& values) {
    if (values.size() != ncol_) throw DomainError("CsvWriter: row width differs from header");
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) s += ',';
      s += fmt(values[i]);
    }
    body_ += s + "\n";
    return *this;
  }
  /// Row with preformatted cells (for labels).
  CsvWriter& row_text(const std::vector<std::string>& cells) {
    if (cells.size() != ncol_) throw DomainError("CsvWriter: row width differs from header");
    line(cells);
    return *this;
  }

  std::string str() const { return prefix_ + body_; }

 private:
  void line(const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) s += ',';
      s += cells[i];
    }
    body_ += s + "\n";
  }
  std::size_t ncol_;
  std::string prefix_;
  std::string body_;
};

/// Writes `content` to `path` atomically (temp file in the same directory,
/// then rename). An empty path or "-" writes to stdout.
inline void write_atomic(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::fwrite(content.data(), 1, content.size(), stdout);
    std::fflush(stdout);
    return;
  }
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.close();
    if (!f) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot move output into place at " + target.string());
  }
}

}  // namespace qnd::io
