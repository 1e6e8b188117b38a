#ifndef FAT_TENSOR_HPP
#define FAT_TENSOR_HPP

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "fat/errors.hpp"

namespace fat {

template <typename T>
struct Tensor {
    std::vector<int> dims;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> d) : dims(std::move(d)) {
        data.assign(size(), T{});
    }

    std::size_t size() const {
        std::size_t n = 1;
        for (int d : dims) n *= static_cast<std::size_t>(d);
        return n;
    }

    // 4-D accessor (n, c, h, w); lighter ranks pad with leading 1s.
    T& at4(int a, int b, int c, int d) {
        return data[((static_cast<std::size_t>(a) * dims[1] + b) * dims[2] + c) *
                        dims[3] + d];
    }
    const T& at4(int a, int b, int c, int d) const {
        return data[((static_cast<std::size_t>(a) * dims[1] + b) * dims[2] + c) *
                        dims[3] + d];
    }
};

template <typename T>
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<T> data;  // row-major

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, T{}) {}

    T& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    const T& at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

// Tensor blob format: magic "FATB", version byte, dtype code, rank byte,
// little-endian u32 dims, then the little-endian payload.
enum class BlobDtype : std::uint8_t { U8 = 0, I8 = 1, I32 = 2, F64 = 3 };

std::vector<std::uint8_t> blob_encode(const Tensor<std::uint8_t>& t);
std::vector<std::uint8_t> blob_encode(const Tensor<std::int32_t>& t);
Tensor<std::uint8_t> blob_decode_u8(const std::vector<std::uint8_t>& blob);
Tensor<std::int32_t> blob_decode_i32(const std::vector<std::uint8_t>& blob);

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace fat

#endif
