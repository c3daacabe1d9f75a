#pragma once

// Flat key/value experiment configuration. Files are INI-style:
//
//   [optics]
//   f_ref_mm = 50
//
// which yields the dotted key "optics.f_ref_mm". Command-line overrides use the
// same dotted names.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chromacs {

class Config {
public:
    Config() = default;

    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    void set(const std::string& key, const std::string& value);
    /// "key=value"; ConfigError when the '=' is missing or the key is empty.
    void apply_override(std::string_view assignment);

    bool contains(const std::string& key) const { return values_.contains(key); }
    std::optional<std::string> find(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    /// Comma-separated reals.
    std::vector<double> get_reals(const std::string& key, const std::vector<double>& fallback) const;

    /// ConfigError naming the first key not in `known`.
    void check_known(std::span<const std::string_view> known) const;

    /// Sorted "key=value" lines.
    std::string canonical() const;
    /// SHA-256 of canonical(), lowercase hex.
    std::string digest() const;

    const std::map<std::string, std::string>& values() const noexcept { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// SHA-256 of a byte string, lowercase hex.
std::string sha256_hex(std::string_view bytes);
/// SHA-256 of a file's contents; FormatError if unreadable.
std::string file_sha256(const std::string& path);

} // namespace chromacs
