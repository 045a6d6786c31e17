#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "hsidata/cube.hpp"

namespace hsie {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

fs::path stem_of(const fs::path& path) {
    const std::string ext = lower(path.extension().string());
    if (ext == ".hdr" || ext == ".raw" || ext == ".img") return fs::path(path).replace_extension();
    return path;
}

// ENVI headers may carry brace-delimited values spanning lines; those are kept verbatim.
std::map<std::string, std::string> parse_header(const fs::path& hdr) {
    std::ifstream in(hdr);
    if (!in) throw IoError("cannot open header " + hdr.string());
    std::map<std::string, std::string> fields;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        line = trim(line);
        if (first) {
            first = false;
            if (lower(line) == "envi") continue;
        }
        if (line.empty() || line[0] == ';') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw IoError("malformed header line in " + hdr.string() + ": '" + line + "'");
        std::string key = lower(trim(line.substr(0, eq)));
        std::string value = trim(line.substr(eq + 1));
        if (!value.empty() && value.front() == '{') {
            while (value.find('}') == std::string::npos && std::getline(in, line)) value += "\n" + line;
        }
        fields[key] = value;
    }
    return fields;
}

long long header_int(const std::map<std::string, std::string>& fields, const std::string& key, const fs::path& hdr) {
    auto it = fields.find(key);
    if (it == fields.end()) throw IoError("header " + hdr.string() + " is missing '" + key + "'");
    try {
        std::size_t used = 0;
        const long long v = std::stoll(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(key);
        return v;
    } catch (const std::exception&) {
        throw IoError("header " + hdr.string() + ": '" + key + "' is not an integer: '" + it->second + "'");
    }
}

std::uint32_t swap_bytes(std::uint32_t w) {
    return (w >> 24) | ((w >> 8) & 0xFF00u) | ((w << 8) & 0xFF0000u) | (w << 24);
}

}  // namespace

fs::path header_path(const fs::path& path) {
    fs::path p = stem_of(path);
    p += ".hdr";
    return p;
}

fs::path raw_path(const fs::path& path) {
    fs::path p = stem_of(path);
    p += ".raw";
    return p;
}

HsiCube read_cube(const fs::path& path) {
    const fs::path hdr = header_path(path);
    if (!fs::exists(hdr)) throw IoError("header not found: " + hdr.string());
    const auto fields = parse_header(hdr);

    const long long samples = header_int(fields, "samples", hdr);
    const long long lines = header_int(fields, "lines", hdr);
    const long long bands = header_int(fields, "bands", hdr);
    const long long dtype = header_int(fields, "data type", hdr);
    if (samples <= 0 || lines <= 0 || bands <= 0)
        throw IoError("header " + hdr.string() + ": dimensions must be positive");
    if (dtype != 4) throw IoError("unsupported format in " + hdr.string() + ": data type " + std::to_string(dtype) +
                                  " (only 4, 32-bit float, is supported)");
    if (auto it = fields.find("interleave"); it == fields.end() || lower(it->second) != "bsq")
        throw IoError("unsupported format in " + hdr.string() + ": interleave must be bsq");
    if (fields.count("byte order") && header_int(fields, "byte order", hdr) != 0)
        throw IoError("unsupported format in " + hdr.string() + ": byte order must be 0 (little-endian)");
    const long long offset = fields.count("header offset") ? header_int(fields, "header offset", hdr) : 0;

    fs::path raw = raw_path(path);
    if (!fs::exists(raw)) {
        fs::path img = stem_of(path);
        img += ".img";
        if (fs::exists(img)) raw = img;
        else throw IoError("payload not found: " + raw.string());
    }

    const std::size_t count = static_cast<std::size_t>(samples) * static_cast<std::size_t>(lines) *
                              static_cast<std::size_t>(bands);
    const std::uintmax_t expected = static_cast<std::uintmax_t>(offset) + count * sizeof(float);
    const std::uintmax_t actual = fs::file_size(raw);
    if (actual != expected)
        throw IoError("payload size mismatch for " + raw.string() + ": header implies " + std::to_string(expected) +
                      " bytes, file has " + std::to_string(actual));

    std::ifstream in(raw, std::ios::binary);
    if (!in) throw IoError("cannot open payload " + raw.string());
    in.seekg(offset);
    std::vector<std::uint32_t> words(count);
    in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(count * sizeof(float)));
    if (!in) throw IoError("short read from " + raw.string());

    std::vector<float> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t w = words[i];
        if constexpr (std::endian::native == std::endian::big) w = swap_bytes(w);
        values[i] = std::bit_cast<float>(w);
        if (!std::isfinite(values[i]))
            throw IoError("non-finite value at index " + std::to_string(i) + " in " + raw.string());
    }
    return HsiCube(static_cast<int>(lines), static_cast<int>(samples), static_cast<int>(bands), std::move(values));
}

void write_cube(const HsiCube& cube, const fs::path& path) {
    for (std::size_t i = 0; i < cube.size(); ++i)
        if (!std::isfinite(cube.values()[i])) throw IoError("refusing to write non-finite value at index " + std::to_string(i));

    const fs::path hdr = header_path(path);
    const fs::path raw = raw_path(path);
    {
        std::ofstream out(hdr, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write header " + hdr.string());
        out << "ENVI\n"
            << "samples = " << cube.width() << "\n"
            << "lines = " << cube.height() << "\n"
            << "bands = " << cube.bands() << "\n"
            << "header offset = 0\n"
            << "file type = ENVI Standard\n"
            << "data type = 4\n"
            << "interleave = bsq\n"
            << "byte order = 0\n";
        if (!out) throw IoError("failed writing header " + hdr.string());
    }
    std::vector<std::uint32_t> words(cube.size());
    for (std::size_t i = 0; i < cube.size(); ++i) {
        std::uint32_t w = std::bit_cast<std::uint32_t>(cube.values()[i]);
        if constexpr (std::endian::native == std::endian::big) w = swap_bytes(w);
        words[i] = w;
    }
    std::ofstream out(raw, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write payload " + raw.string());
    out.write(reinterpret_cast<const char*>(words.data()), static_cast<std::streamsize>(words.size() * sizeof(float)));
    if (!out) throw IoError("failed writing payload " + raw.string());
}

}  // namespace hsie
