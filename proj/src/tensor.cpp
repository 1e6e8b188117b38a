#include "fat/tensor.hpp"

#include <cstring>
#include <fstream>

namespace fat {

namespace {

constexpr char kMagic[4] = {'F', 'A', 'T', 'B'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t off) {
    return static_cast<std::uint32_t>(in[off]) |
           (static_cast<std::uint32_t>(in[off + 1]) << 8) |
           (static_cast<std::uint32_t>(in[off + 2]) << 16) |
           (static_cast<std::uint32_t>(in[off + 3]) << 24);
}

std::vector<std::uint8_t> encode_header(BlobDtype dtype, const std::vector<int>& dims) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(kVersion);
    out.push_back(static_cast<std::uint8_t>(dtype));
    out.push_back(static_cast<std::uint8_t>(dims.size()));
    for (int d : dims) put_u32(out, static_cast<std::uint32_t>(d));
    return out;
}

struct Header {
    BlobDtype dtype;
    std::vector<int> dims;
    std::size_t payload_off;
};

Header decode_header(const std::vector<std::uint8_t>& blob) {
    require_config(blob.size() >= 7, "blob: truncated header");
    require_config(std::memcmp(blob.data(), kMagic, 4) == 0, "blob: bad magic");
    require_config(blob[4] == kVersion, "blob: unsupported version");
    Header h;
    h.dtype = static_cast<BlobDtype>(blob[5]);
    const int rank = blob[6];
    require_config(blob.size() >= 7 + 4u * rank, "blob: truncated dims");
    for (int i = 0; i < rank; ++i) {
        h.dims.push_back(static_cast<int>(get_u32(blob, 7 + 4u * i)));
    }
    h.payload_off = 7 + 4u * rank;
    return h;
}

}  // namespace

std::vector<std::uint8_t> blob_encode(const Tensor<std::uint8_t>& t) {
    auto out = encode_header(BlobDtype::U8, t.dims);
    out.insert(out.end(), t.data.begin(), t.data.end());
    return out;
}

std::vector<std::uint8_t> blob_encode(const Tensor<std::int32_t>& t) {
    auto out = encode_header(BlobDtype::I32, t.dims);
    for (std::int32_t v : t.data) put_u32(out, static_cast<std::uint32_t>(v));
    return out;
}

Tensor<std::uint8_t> blob_decode_u8(const std::vector<std::uint8_t>& blob) {
    const Header h = decode_header(blob);
    require_config(h.dtype == BlobDtype::U8, "blob: dtype is not u8");
    Tensor<std::uint8_t> t(h.dims);
    require_config(blob.size() == h.payload_off + t.size(), "blob: payload size mismatch");
    std::copy(blob.begin() + h.payload_off, blob.end(), t.data.begin());
    return t;
}

Tensor<std::int32_t> blob_decode_i32(const std::vector<std::uint8_t>& blob) {
    const Header h = decode_header(blob);
    require_config(h.dtype == BlobDtype::I32, "blob: dtype is not i32");
    Tensor<std::int32_t> t(h.dims);
    require_config(blob.size() == h.payload_off + 4 * t.size(), "blob: payload size mismatch");
    for (std::size_t i = 0; i < t.size(); ++i) {
        t.data[i] = static_cast<std::int32_t>(get_u32(blob, h.payload_off + 4 * i));
    }
    return t;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary);
    require_config(f.good(), "cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    require_config(f.good(), "write failed: " + path);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    require_config(f.good(), "cannot open: " + path);
    const auto size = f.tellg();
    f.seekg(0);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
    f.read(reinterpret_cast<char*>(bytes.data()), size);
    require_config(f.good(), "read failed: " + path);
    return bytes;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    require_config(f.good(), "cannot open for writing: " + path);
    f << text;
    require_config(f.good(), "write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path);
    require_config(f.good(), "cannot open: " + path);
    std::string s((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return s;
}

}  // namespace fat
