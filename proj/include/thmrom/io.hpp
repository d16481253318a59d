#pragma once

#include "thmrom/types.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <type_traits>

namespace thmrom::io {

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// Header-first CSV writer. Doubles are written in shortest round-trip form,
/// so identical inputs give byte-identical files.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header);

  template <class... Ts>
  void row(const Ts&... cells) {
    bool first = true;
    ((put(cells, first), first = false), ...);
    out_ << '\n';
  }

 private:
  void sep(bool first) {
    if (!first) out_ << ',';
  }
  void put(double v, bool first) {
    sep(first);
    out_ << format_double(v);
  }
  void put(std::string_view s, bool first) {
    sep(first);
    out_ << s;
  }
  void put(const std::string& s, bool first) { put(std::string_view(s), first); }
  void put(const char* s, bool first) { put(std::string_view(s), first); }
  template <class I>
    requires std::is_integral_v<I>
  void put(I v, bool first) {
    sep(first);
    out_ << v;
  }

  std::ofstream out_;
};

/// Little-endian binary container helpers with an 8-byte magic tag.
class BinaryWriter {
 public:
  BinaryWriter(const std::filesystem::path& path, std::string_view magic, std::uint32_t version);
  void i64(std::int64_t v);
  void f64(double v);
  void str(std::string_view s);
  void vec(const Vector& v);
  void mat(const DenseMatrix& m);

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

class BinaryReader {
 public:
  /// Throws std::runtime_error if the magic tag or version does not match.
  BinaryReader(const std::filesystem::path& path, std::string_view magic, std::uint32_t version);
  std::int64_t i64();
  double f64();
  std::string str();
  Vector vec();
  DenseMatrix mat();
  bool at_end();

 private:
  void read(void* dst, size_t n);
  std::ifstream in_;
  std::filesystem::path path_;
};

}  // namespace thmrom::io
