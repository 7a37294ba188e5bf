#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dynfield::io {

/// FNV-1a 64-bit over a byte string. Used for config and system hashes.
constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// 16 lowercase hex digits.
std::string to_hex(std::uint64_t v);

/// Locale-independent shortest round-trip formatting of a double.
/// All deterministic text outputs go through this.
std::string format_double(double v);
std::string format_int(long long v);

/// Minimal CSV emitter with deterministic formatting and '\n' endings.
class CsvWriter {
  public:
    void header(const std::vector<std::string>& names);
    CsvWriter& field(std::string_view s);
    CsvWriter& field(double v);
    CsvWriter& field(long long v);
    CsvWriter& field(int v) { return field(static_cast<long long>(v)); }
    void end_row();
    /// Prepend "# key=value" comment lines before the header.
    void comment(std::string_view line);
    const std::string& str() const { return buf_; }
    void save(const std::filesystem::path& p) const;

  private:
    std::string buf_;
    bool row_open_ = false;
};

/// Simple "key value" text header block, one pair per line, terminated by
/// a line containing only "end". Keys are unique; order is preserved on
/// write (sorted) so emission is deterministic.
class TextHeader {
  public:
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double v) { set(key, format_double(v)); }
    void set(const std::string& key, long long v) { set(key, format_int(v)); }
    void set(const std::string& key, int v) { set(key, format_int(static_cast<long long>(v))); }
    bool has(const std::string& key) const { return kv_.count(key) > 0; }
    const std::string& get(const std::string& key) const;
    double get_double(const std::string& key) const;
    long long get_int(const std::string& key) const;

    void write(std::ostream& os) const;
    static TextHeader read(std::istream& is);

  private:
    std::map<std::string, std::string> kv_;
};

/// Little-endian binary payload helpers. The on-disk formats are defined
/// as little-endian; these helpers assume a little-endian host and verify
/// that assumption once at startup.
void require_little_endian();

void write_f64(std::ostream& os, const double* data, std::size_t n);
void read_f64(std::istream& is, double* data, std::size_t n);
void write_f32(std::ostream& os, const float* data, std::size_t n);
void read_f32(std::istream& is, float* data, std::size_t n);
void write_i64(std::ostream& os, const std::int64_t* data, std::size_t n);
void read_i64(std::istream& is, std::int64_t* data, std::size_t n);

std::ofstream open_out(const std::filesystem::path& p, bool binary);
std::ifstream open_in(const std::filesystem::path& p, bool binary);

}  // namespace dynfield::io
