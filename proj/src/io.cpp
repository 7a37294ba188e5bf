#include "dynfield/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <stdexcept>
#include <system_error>

namespace dynfield::io {

std::string to_hex(std::uint64_t v) {
    static const char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, res.ptr);
}

std::string format_int(long long v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc{}) throw std::runtime_error("format_int: conversion failed");
    return std::string(buf, res.ptr);
}

void CsvWriter::header(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += names[i];
    }
    buf_ += '\n';
}

CsvWriter& CsvWriter::field(std::string_view s) {
    if (row_open_) buf_ += ',';
    buf_.append(s);
    row_open_ = true;
    return *this;
}

CsvWriter& CsvWriter::field(double v) { return field(std::string_view(format_double(v))); }
CsvWriter& CsvWriter::field(long long v) { return field(std::string_view(format_int(v))); }

void CsvWriter::end_row() {
    buf_ += '\n';
    row_open_ = false;
}

void CsvWriter::comment(std::string_view line) {
    buf_ += "# ";
    buf_.append(line);
    buf_ += '\n';
}

void CsvWriter::save(const std::filesystem::path& p) const {
    auto os = open_out(p, false);
    os.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!os) throw std::runtime_error("CsvWriter: failed to write " + p.string());
}

void TextHeader::set(const std::string& key, const std::string& value) {
    if (key.empty() || key.find_first_of(" \n") != std::string::npos)
        throw std::invalid_argument("TextHeader: bad key '" + key + "'");
    if (value.find('\n') != std::string::npos)
        throw std::invalid_argument("TextHeader: value for '" + key + "' contains newline");
    kv_[key] = value;
}

const std::string& TextHeader::get(const std::string& key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw std::runtime_error("TextHeader: missing key '" + key + "'");
    return it->second;
}

double TextHeader::get_double(const std::string& key) const {
    const std::string& s = get(key);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{}) throw std::runtime_error("TextHeader: bad double for '" + key + "'");
    return v;
}

long long TextHeader::get_int(const std::string& key) const {
    const std::string& s = get(key);
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{}) throw std::runtime_error("TextHeader: bad integer for '" + key + "'");
    return v;
}

void TextHeader::write(std::ostream& os) const {
    for (const auto& [k, v] : kv_) os << k << ' ' << v << '\n';
    os << "end\n";
}

TextHeader TextHeader::read(std::istream& is) {
    TextHeader h;
    std::string line;
    while (std::getline(is, line)) {
        if (line == "end") return h;
        const auto sp = line.find(' ');
        if (sp == std::string::npos) throw std::runtime_error("TextHeader: malformed line '" + line + "'");
        h.kv_[line.substr(0, sp)] = line.substr(sp + 1);
    }
    throw std::runtime_error("TextHeader: missing 'end' terminator");
}

void require_little_endian() {
    static_assert(std::endian::native == std::endian::little,
                  "on-disk formats are little-endian; big-endian hosts are unsupported");
}

namespace {
template <typename T>
void write_raw(std::ostream& os, const T* data, std::size_t n) {
    os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(T)));
    if (!os) throw std::runtime_error("binary write failed");
}
template <typename T>
void read_raw(std::istream& is, T* data, std::size_t n) {
    is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(T)));
    if (static_cast<std::size_t>(is.gcount()) != n * sizeof(T))
        throw std::runtime_error("binary read failed: truncated payload");
}
}  // namespace

void write_f64(std::ostream& os, const double* d, std::size_t n) { write_raw(os, d, n); }
void read_f64(std::istream& is, double* d, std::size_t n) { read_raw(is, d, n); }
void write_f32(std::ostream& os, const float* d, std::size_t n) { write_raw(os, d, n); }
void read_f32(std::istream& is, float* d, std::size_t n) { read_raw(is, d, n); }
void write_i64(std::ostream& os, const std::int64_t* d, std::size_t n) { write_raw(os, d, n); }
void read_i64(std::istream& is, std::int64_t* d, std::size_t n) { read_raw(is, d, n); }

std::ofstream open_out(const std::filesystem::path& p, bool binary) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream os(p, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open for writing: " + p.string());
    return os;
}

std::ifstream open_in(const std::filesystem::path& p, bool binary) {
    std::ifstream is(p, binary ? std::ios::binary : std::ios::in);
    if (!is) throw std::runtime_error("cannot open for reading: " + p.string());
    return is;
}

}  // namespace dynfield::io
