#include "pba/pfm.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace pba {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw std::runtime_error("pfm: " + path + ": " + why);
}

// Reads one whitespace-delimited header token.
std::string next_token(std::istream& in) {
    std::string tok;
    char c;
    while (in.get(c)) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            if (!tok.empty()) return tok;
        } else {
            tok.push_back(c);
        }
    }
    return tok;
}

void swap_floats(float* p, size_t n) {
    auto* bytes = reinterpret_cast<uint8_t*>(p);
    for (size_t i = 0; i < n; ++i) {
        std::swap(bytes[4 * i + 0], bytes[4 * i + 3]);
        std::swap(bytes[4 * i + 1], bytes[4 * i + 2]);
    }
}

bool host_is_little_endian() {
    const uint16_t probe = 1;
    uint8_t b;
    std::memcpy(&b, &probe, 1);
    return b == 1;
}

}  // namespace

ImageF read_pfm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");

    const std::string magic = next_token(in);
    int channels;
    if (magic == "PF") {
        channels = 3;
    } else if (magic == "Pf") {
        channels = 1;
    } else {
        fail(path, "bad magic '" + magic + "'");
    }

    int width = 0, height = 0;
    double scale = 0.0;
    try {
        width = std::stoi(next_token(in));
        height = std::stoi(next_token(in));
        scale = std::stod(next_token(in));
    } catch (const std::exception&) {
        fail(path, "malformed header");
    }
    if (width <= 0 || height <= 0) fail(path, "non-positive dimensions");
    if (scale == 0.0) fail(path, "zero scale");
    // next_token consumed the single whitespace after the scale field.

    ImageF img(width, height, channels);
    const size_t row_floats = static_cast<size_t>(width) * channels;
    // Scanlines are stored bottom-to-top.
    for (int y = height - 1; y >= 0; --y) {
        in.read(reinterpret_cast<char*>(img.row(y)),
                static_cast<std::streamsize>(row_floats * sizeof(float)));
        if (!in) fail(path, "truncated pixel data");
    }

    const bool file_little = scale < 0.0;
    if (file_little != host_is_little_endian()) {
        swap_floats(img.data(), img.size());
    }
    return img;
}

void write_pfm(const std::string& path, const ImageF& img) {
    if (img.empty()) fail(path, "refusing to write empty image");
    if (img.channels() != 1 && img.channels() != 3) {
        fail(path, "only 1- or 3-channel images supported");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");

    out << (img.channels() == 3 ? "PF" : "Pf") << "\n"
        << img.width() << " " << img.height() << "\n"
        << (host_is_little_endian() ? "-1.0" : "1.0") << "\n";

    const size_t row_bytes = static_cast<size_t>(img.width()) * img.channels() * sizeof(float);
    for (int y = img.height() - 1; y >= 0; --y) {
        out.write(reinterpret_cast<const char*>(img.row(y)),
                  static_cast<std::streamsize>(row_bytes));
    }
    if (!out) fail(path, "write failed");
}

}  // namespace pba
