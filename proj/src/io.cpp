#include "thmrom/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace thmrom::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     std::initializer_list<std::string_view> header) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  bool first = true;
  for (auto h : header) {
    if (!first) out_ << ',';
    out_ << h;
    first = false;
  }
  out_ << '\n';
}

namespace {
std::array<char, 8> tag(std::string_view magic) {
  std::array<char, 8> t{};
  for (size_t i = 0; i < std::min<size_t>(8, magic.size()); ++i) t[i] = magic[i];
  return t;
}
}  // namespace

BinaryWriter::BinaryWriter(const std::filesystem::path& path, std::string_view magic,
                           std::uint32_t version)
    : path_(path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const auto t = tag(magic);
  out_.write(t.data(), t.size());
  out_.write(reinterpret_cast<const char*>(&version), sizeof version);
}

void BinaryWriter::i64(std::int64_t v) { out_.write(reinterpret_cast<const char*>(&v), sizeof v); }
void BinaryWriter::f64(double v) { out_.write(reinterpret_cast<const char*>(&v), sizeof v); }

void BinaryWriter::str(std::string_view s) {
  i64(static_cast<std::int64_t>(s.size()));
  out_.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void BinaryWriter::vec(const Vector& v) {
  i64(v.size());
  out_.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void BinaryWriter::mat(const DenseMatrix& m) {
  i64(m.rows());
  i64(m.cols());
  out_.write(reinterpret_cast<const char*>(m.data()),
             static_cast<std::streamsize>(m.size() * sizeof(double)));
}

BinaryReader::BinaryReader(const std::filesystem::path& path, std::string_view magic,
                           std::uint32_t version)
    : path_(path) {
  in_.open(path, std::ios::binary);
  if (!in_) throw std::runtime_error("cannot open " + path.string());
  std::array<char, 8> t{};
  read(t.data(), t.size());
  if (t != tag(magic)) throw std::runtime_error(path.string() + ": bad magic tag");
  std::uint32_t v = 0;
  read(&v, sizeof v);
  if (v != version)
    throw std::runtime_error(path.string() + ": unsupported version " + std::to_string(v));
}

void BinaryReader::read(void* dst, size_t n) {
  in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(in_.gcount()) != n)
    throw std::runtime_error(path_.string() + ": truncated file");
}

std::int64_t BinaryReader::i64() {
  std::int64_t v;
  read(&v, sizeof v);
  return v;
}

double BinaryReader::f64() {
  double v;
  read(&v, sizeof v);
  return v;
}

std::string BinaryReader::str() {
  const auto n = i64();
  if (n < 0 || n > (1 << 20)) throw std::runtime_error(path_.string() + ": corrupt string");
  std::string s(static_cast<size_t>(n), '\0');
  read(s.data(), s.size());
  return s;
}

Vector BinaryReader::vec() {
  const auto n = i64();
  if (n < 0) throw std::runtime_error(path_.string() + ": corrupt vector");
  Vector v(n);
  read(v.data(), static_cast<size_t>(n) * sizeof(double));
  return v;
}

DenseMatrix BinaryReader::mat() {
  const auto r = i64();
  const auto c = i64();
  if (r < 0 || c < 0) throw std::runtime_error(path_.string() + ": corrupt matrix");
  DenseMatrix m(r, c);
  read(m.data(), static_cast<size_t>(r * c) * sizeof(double));
  return m;
}

bool BinaryReader::at_end() { return in_.peek() == std::char_traits<char>::eof(); }

}  // namespace thmrom::io
