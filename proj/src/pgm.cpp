#include "rtbwt/pgm.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "atomic_write.hpp"

namespace rtbwt {

namespace {

bool is_pgm_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

// Cursor over the raw file bytes. Tokens are runs of non-whitespace;
// '#' starts a comment that runs to the end of the line.
struct Tokenizer {
    const std::string &data;
    std::size_t pos = 0;

    void skip_separators() {
        while (pos < data.size()) {
            if (is_pgm_space(data[pos])) {
                ++pos;
            } else if (data[pos] == '#') {
                while (pos < data.size() && data[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    }

    bool next_token(std::string &tok) {
        skip_separators();
        if (pos >= data.size()) return false;
        std::size_t start = pos;
        while (pos < data.size() && !is_pgm_space(data[pos]) && data[pos] != '#') ++pos;
        tok = data.substr(start, pos - start);
        return true;
    }
};

long parse_header_int(const std::string &tok, const std::string &path) {
    std::size_t used = 0;
    long value = 0;
    try {
        value = std::stol(tok, &used);
    } catch (const std::exception &) {
        throw std::runtime_error("malformed header in '" + path + "': expected integer, got '" + tok + "'");
    }
    if (used != tok.size() || value < 0) {
        throw std::runtime_error("malformed header in '" + path + "': expected integer, got '" + tok + "'");
    }
    return value;
}

} // namespace

Image read_pgm(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string raw = buf.str();

    Tokenizer tk{raw};
    std::string magic;
    if (!tk.next_token(magic)) {
        throw std::runtime_error("malformed header in '" + path + "': empty file");
    }
    if (magic != "P5" && magic != "P2") {
        throw std::runtime_error("unsupported magic number '" + magic + "' in '" + path + "' (need P5 or P2)");
    }
    const bool binary = magic == "P5";

    std::string tok;
    long dims[3];
    for (long &d : dims) {
        if (!tk.next_token(tok)) {
            throw std::runtime_error("malformed header in '" + path + "': missing dimensions or maxval");
        }
        d = parse_header_int(tok, path);
    }
    const long width = dims[0], height = dims[1], maxval = dims[2];
    if (width < 1 || height < 1) {
        throw std::runtime_error("malformed header in '" + path + "': bad dimensions");
    }
    if (maxval < 1 || maxval > 65535) {
        throw std::runtime_error("malformed header in '" + path + "': maxval out of range");
    }

    Image img(static_cast<int>(height), static_cast<int>(width));
    const std::size_t count = img.pixels.size();

    if (binary) {
        // Exactly one whitespace byte separates the maxval from the samples.
        if (tk.pos >= raw.size() || !is_pgm_space(raw[tk.pos])) {
            throw std::runtime_error("malformed header in '" + path + "': missing separator before pixel data");
        }
        std::size_t at = tk.pos + 1;
        const std::size_t bytes_per = maxval > 255 ? 2 : 1;
        if (raw.size() - at < count * bytes_per) {
            throw std::runtime_error("truncated pixel data in '" + path + "'");
        }
        for (std::size_t i = 0; i < count; ++i) {
            if (bytes_per == 1) {
                img.pixels[i] = static_cast<unsigned char>(raw[at + i]);
            } else {
                const unsigned hi = static_cast<unsigned char>(raw[at + 2 * i]);
                const unsigned lo = static_cast<unsigned char>(raw[at + 2 * i + 1]);
                img.pixels[i] = static_cast<double>((hi << 8) | lo);
            }
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            if (!tk.next_token(tok)) {
                throw std::runtime_error("truncated pixel data in '" + path + "'");
            }
            const long v = parse_header_int(tok, path);
            if (v > maxval) {
                throw std::runtime_error("sample value " + std::to_string(v) + " above maxval in '" + path + "'");
            }
            img.pixels[i] = static_cast<double>(v);
        }
    }
    return img;
}

void write_pgm(const std::string &path, const Image &img) {
    std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.reserve(out.size() + img.pixels.size());
    for (double v : img.pixels) {
        long q = std::lround(v);
        if (q < 0) q = 0;
        if (q > 255) q = 255;
        out.push_back(static_cast<char>(static_cast<unsigned char>(q)));
    }
    detail::write_file_atomic(path, out);
}

} // namespace rtbwt
