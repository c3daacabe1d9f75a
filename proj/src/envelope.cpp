#include "chromacs/detail/envelope.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "chromacs/errors.hpp"

namespace chromacs::detail {

namespace {

constexpr std::size_t kMaxHeaderBytes = 1 << 24;

std::uint32_t to_le(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
    }
}

std::string read_line(std::istream& in, std::size_t max_len) {
    std::string line;
    char c = 0;
    while (in.get(c)) {
        if (c == '\n') return line;
        line.push_back(c);
        if (line.size() > max_len) fail(Errc::FormatError, "header line too long");
    }
    fail(Errc::FormatError, "truncated stream while reading header line");
}

} // namespace

std::size_t write_envelope_header(std::ostream& out, std::string_view magic,
                                  const nlohmann::json& header) {
    const std::string body = header.dump();
    const std::string len = std::to_string(body.size());
    out << magic << '\n' << len << '\n' << body;
    if (!out) fail(Errc::FormatError, "write failed");
    return magic.size() + 1 + len.size() + 1 + body.size();
}

nlohmann::json read_envelope_header(std::istream& in, std::string_view magic) {
    const std::string got = read_line(in, 16);
    if (got != magic) {
        fail(Errc::FormatError, "bad magic '" + got + "', expected '" + std::string(magic) + "'");
    }
    const std::string len_line = read_line(in, 20);
    std::size_t len = 0;
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(len_line, &pos);
        if (pos != len_line.size()) throw std::invalid_argument("trailing");
        len = static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        fail(Errc::FormatError, "bad header length line '" + len_line + "'");
    }
    if (len > kMaxHeaderBytes) fail(Errc::FormatError, "header too large");
    std::string body(len, '\0');
    in.read(body.data(), static_cast<std::streamsize>(len));
    if (static_cast<std::size_t>(in.gcount()) != len) {
        fail(Errc::FormatError, "truncated header");
    }
    nlohmann::json h = nlohmann::json::parse(body, nullptr, false);
    if (h.is_discarded() || !h.is_object()) fail(Errc::FormatError, "header is not a JSON object");
    return h;
}

std::size_t write_f32(std::ostream& out, std::span<const double> values) {
    std::vector<std::uint32_t> buf(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        buf[i] = to_le(std::bit_cast<std::uint32_t>(static_cast<float>(values[i])));
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(std::uint32_t)));
    if (!out) fail(Errc::FormatError, "write failed");
    return buf.size() * sizeof(std::uint32_t);
}

std::vector<double> read_f32(std::istream& in, std::size_t count) {
    std::vector<std::uint32_t> buf(count);
    const auto bytes = static_cast<std::streamsize>(count * sizeof(std::uint32_t));
    in.read(reinterpret_cast<char*>(buf.data()), bytes);
    if (in.gcount() != bytes) fail(Errc::FormatError, "truncated payload");
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        values[i] = static_cast<double>(std::bit_cast<float>(to_le(buf[i])));
    }
    return values;
}

std::size_t write_u8(std::ostream& out, std::span<const std::uint8_t> values) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size()));
    if (!out) fail(Errc::FormatError, "write failed");
    return values.size();
}

std::vector<std::uint8_t> read_u8(std::istream& in, std::size_t count) {
    std::vector<std::uint8_t> values(count);
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count) {
        fail(Errc::FormatError, "truncated payload");
    }
    return values;
}

std::size_t header_size(const nlohmann::json& h, const char* key) {
    auto it = h.find(key);
    if (it == h.end() || !it->is_number_integer() || it->get<long long>() < 0) {
        fail(Errc::HeaderError, std::string("missing or invalid '") + key + "'");
    }
    return it->get<std::size_t>();
}

std::vector<double> header_reals(const nlohmann::json& h, const char* key) {
    auto it = h.find(key);
    if (it == h.end() || !it->is_array()) {
        fail(Errc::HeaderError, std::string("missing or invalid '") + key + "'");
    }
    std::vector<double> out;
    out.reserve(it->size());
    for (const auto& v : *it) {
        if (!v.is_number()) fail(Errc::HeaderError, std::string("non-numeric entry in '") + key + "'");
        out.push_back(v.get<double>());
    }
    return out;
}

} // namespace chromacs::detail
