#include "chromacs/config.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include "chromacs/errors.hpp"

namespace chromacs {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

Config from_tree(const pt::ptree& tree) {
    Config cfg;
    for (const auto& [key, node] : tree) {
        if (node.empty()) {
            cfg.set(key, node.data());
            continue;
        }
        for (const auto& [sub, leaf] : node) cfg.set(key + "." + sub, leaf.data());
    }
    return cfg;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* what) {
    fail(Errc::ConfigError, "key '" + key + "': cannot parse '" + value + "' as " + what);
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string v = trim(text);
    if (v == "inf" || v == "infinity" || v == "+inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) bad_value(key, text, "a real number");
        return d;
    } catch (const std::logic_error&) {
        bad_value(key, text, "a real number");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
    const std::string v = trim(text);
    if (v.empty() || v.front() == '-') bad_value(key, text, "an unsigned integer");
    try {
        std::size_t pos = 0;
        const unsigned long long u = std::stoull(v, &pos);
        if (pos != v.size()) bad_value(key, text, "an unsigned integer");
        return u;
    } catch (const std::logic_error&) {
        bad_value(key, text, "an unsigned integer");
    }
}

} // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), Errc::ConfigError, "cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

Config Config::from_string(const std::string& text) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        fail(Errc::ConfigError, e.what());
    }
    return from_tree(tree);
}

void Config::set(const std::string& key, const std::string& value) {
    const std::string k = trim(key);
    require(!k.empty(), Errc::ConfigError, "empty config key");
    values_[k] = trim(value);
}

void Config::apply_override(std::string_view assignment) {
    const auto eq = assignment.find('=');
    require(eq != std::string_view::npos, Errc::ConfigError,
            "override '" + std::string(assignment) + "' is not of the form key=value");
    set(std::string(assignment.substr(0, eq)), std::string(assignment.substr(eq + 1)));
}

std::optional<std::string> Config::find(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return find(key).value_or(fallback);
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto v = find(key);
    return v ? parse_double(key, *v) : fallback;
}

std::size_t Config::get_size(const std::string& key, std::size_t fallback) const {
    const auto v = find(key);
    return v ? static_cast<std::size_t>(parse_u64(key, *v)) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto v = find(key);
    return v ? parse_u64(key, *v) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const auto v = find(key);
    if (!v) return fallback;
    std::string s = *v;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
    if (s == "0" || s == "false" || s == "no" || s == "off") return false;
    bad_value(key, *v, "a boolean");
}

std::vector<double> Config::get_reals(const std::string& key, const std::vector<double>& fallback) const {
    const auto v = find(key);
    if (!v) return fallback;
    std::vector<double> out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (trim(item).empty()) continue;
        out.push_back(parse_double(key, item));
    }
    return out;
}

void Config::check_known(std::span<const std::string_view> known) const {
    for (const auto& [key, value] : values_) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            fail(Errc::ConfigError, "unknown config key '" + key + "'");
        }
    }
}

std::string Config::canonical() const {
    std::string out;
    for (const auto& [key, value] : values_) out += key + "=" + value + "\n";
    return out;
}

std::string Config::digest() const { return sha256_hex(canonical()); }

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    require(EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) == 1,
            Errc::InvalidArgument, "SHA-256 failed");
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    }
    return hex.str();
}

std::string file_sha256(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), Errc::FormatError, "cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return sha256_hex(buf.str());
}

} // namespace chromacs
