// NPY tensor reader/writer. Only the subset the pipeline exchanges is
// accepted: float32, little-endian, C order, rank 2 or 3.

#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "seedvos/error.hpp"
#include "seedvos/feature_store.hpp"

namespace seedvos {

namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;
constexpr std::size_t kAlign = 64;
constexpr std::size_t kGrowthAxisDigits = 21;

static_assert(std::endian::native == std::endian::little, "NPY payload is copied without byte swapping");

struct Header {
    std::string descr;
    bool fortran_order = false;
    std::vector<std::size_t> shape;
};

class HeaderParser {
public:
    HeaderParser(std::string_view text, const std::string& origin) : text_(text), origin_(origin) {}

    Header parse() {
        Header h;
        bool have_descr = false, have_order = false, have_shape = false;
        skip_ws();
        expect('{');
        for (;;) {
            skip_ws();
            if (peek() == '}') {
                ++pos_;
                break;
            }
            std::string key = parse_string();
            skip_ws();
            expect(':');
            skip_ws();
            if (key == "descr") {
                h.descr = parse_string();
                have_descr = true;
            } else if (key == "fortran_order") {
                h.fortran_order = parse_bool();
                have_order = true;
            } else if (key == "shape") {
                h.shape = parse_shape();
                have_shape = true;
            } else {
                bad("unexpected key '" + key + "'");
            }
            skip_ws();
            if (peek() == ',') ++pos_;
        }
        if (!have_descr || !have_order || !have_shape) bad("missing descr, fortran_order or shape");
        return h;
    }

private:
    [[noreturn]] void bad(const std::string& what) const {
        fail(ErrorCode::MalformedHeader, origin_ + ": malformed NPY header: " + what);
    }
    char peek() const {
        if (pos_ >= text_.size()) bad("unexpected end of header");
        return text_[pos_];
    }
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    void expect(char c) {
        if (peek() != c) bad(std::string("expected '") + c + "'");
        ++pos_;
    }
    std::string parse_string() {
        char quote = peek();
        if (quote != '\'' && quote != '"') bad("expected quoted string");
        ++pos_;
        std::size_t end = text_.find(quote, pos_);
        if (end == std::string_view::npos) bad("unterminated string");
        std::string s(text_.substr(pos_, end - pos_));
        pos_ = end + 1;
        return s;
    }
    bool parse_bool() {
        if (text_.substr(pos_, 4) == "True") {
            pos_ += 4;
            return true;
        }
        if (text_.substr(pos_, 5) == "False") {
            pos_ += 5;
            return false;
        }
        bad("expected True or False");
    }
    std::vector<std::size_t> parse_shape() {
        std::vector<std::size_t> shape;
        expect('(');
        for (;;) {
            skip_ws();
            if (peek() == ')') {
                ++pos_;
                break;
            }
            if (!std::isdigit(static_cast<unsigned char>(peek()))) bad("non-integer dimension");
            std::size_t value = 0;
            while (std::isdigit(static_cast<unsigned char>(peek()))) {
                value = value * 10 + static_cast<std::size_t>(text_[pos_] - '0');
                ++pos_;
            }
            shape.push_back(value);
            skip_ws();
            if (peek() == ',') ++pos_;
        }
        return shape;
    }

    std::string_view text_;
    const std::string& origin_;
    std::size_t pos_ = 0;
};

std::string shape_repr(const DenseMap& map) {
    std::ostringstream os;
    os << '(' << map.height() << ", " << map.width();
    if (!map.is_planar()) os << ", " << map.channels();
    os << ')';
    return os.str();
}

}  // namespace

DenseMap parse_tensor(const std::string& bytes, const std::string& origin) {
    if (bytes.size() < kMagicLen + 4 || std::memcmp(bytes.data(), kMagic, kMagicLen) != 0) {
        fail(ErrorCode::MalformedHeader, origin + ": not an NPY file (bad magic)");
    }
    const auto major = static_cast<unsigned char>(bytes[6]);
    std::size_t header_len = 0;
    std::size_t prefix = 0;
    if (major == 1) {
        header_len = static_cast<unsigned char>(bytes[8]) | (static_cast<unsigned char>(bytes[9]) << 8);
        prefix = 10;
    } else if (major == 2 || major == 3) {
        if (bytes.size() < 12) fail(ErrorCode::MalformedHeader, origin + ": truncated NPY preamble");
        for (int i = 3; i >= 0; --i) header_len = (header_len << 8) | static_cast<unsigned char>(bytes[8 + i]);
        prefix = 12;
    } else {
        fail(ErrorCode::MalformedHeader, origin + ": unsupported NPY version " + std::to_string(major));
    }
    if (bytes.size() < prefix + header_len) fail(ErrorCode::MalformedHeader, origin + ": truncated NPY header");

    Header header = HeaderParser(std::string_view(bytes).substr(prefix, header_len), origin).parse();
    if (header.descr != "<f4") {
        fail(ErrorCode::NonFloatPayload, origin + ": dtype '" + header.descr + "' is not little-endian float32");
    }
    if (header.fortran_order) fail(ErrorCode::MalformedHeader, origin + ": Fortran-ordered arrays are not supported");
    if (header.shape.size() != 2 && header.shape.size() != 3) {
        fail(ErrorCode::MalformedHeader, origin + ": expected a rank 2 or 3 array, got rank " +
                                             std::to_string(header.shape.size()));
    }

    std::size_t count = 1;
    for (auto d : header.shape) count *= d;
    const std::size_t payload = bytes.size() - prefix - header_len;
    if (payload != count * sizeof(float)) {
        fail(ErrorCode::ShapeMismatch, origin + ": header declares " + std::to_string(count) +
                                           " floats but payload holds " + std::to_string(payload) + " bytes");
    }

    std::vector<float> data(count);
    if (count) std::memcpy(data.data(), bytes.data() + prefix + header_len, payload);
    for (float v : data) {
        if (!std::isfinite(v)) fail(ErrorCode::InvalidValue, origin + ": tensor contains non-finite values");
    }
    if (header.shape.size() == 2) return DenseMap::planar(header.shape[0], header.shape[1], std::move(data));
    return DenseMap(header.shape[0], header.shape[1], header.shape[2], std::move(data));
}

std::string encode_tensor(const DenseMap& map) {
    std::string dict = "{'descr': '<f4', 'fortran_order': False, 'shape': " + shape_repr(map) + ", }";
    dict.append(kGrowthAxisDigits - std::to_string(map.height()).size(), ' ');
    const std::size_t unpadded = kMagicLen + 4 + dict.size() + 1;
    dict.append((kAlign - unpadded % kAlign) % kAlign, ' ');
    dict.push_back('\n');

    std::string out(kMagic, kMagicLen);
    out.push_back('\x01');
    out.push_back('\x00');
    out.push_back(static_cast<char>(dict.size() & 0xff));
    out.push_back(static_cast<char>((dict.size() >> 8) & 0xff));
    out += dict;
    const auto values = map.data();
    out.append(reinterpret_cast<const char*>(values.data()), values.size() * sizeof(float));
    return out;
}

DenseMap load_tensor(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::FileNotFound, "cannot open tensor file " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_tensor(bytes, path.string());
}

void save_tensor(const DenseMap& map, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot write tensor file " + path.string());
    const std::string bytes = encode_tensor(map);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::Io, "short write to " + path.string());
}

}  // namespace seedvos
