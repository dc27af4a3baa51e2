#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "frpt/tensor.hpp"

namespace frpt::testing {

template <typename T>
Tensor<T> random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Tensor<T> t(std::move(shape));
    for (auto& v : t.data()) v = static_cast<T>(u(rng));
    return t;
}

// Direct nested-loop convolution with zero padding, in double.
inline std::vector<double> conv_oracle(const std::vector<double>& in, std::size_t C, std::size_t H, std::size_t W,
                                       const std::vector<double>& k, std::size_t O, std::size_t K,
                                       const std::vector<double>* bias, int pad, int stride, std::size_t& OH,
                                       std::size_t& OW) {
    OH = (H + 2 * pad - K) / stride + 1;
    OW = (W + 2 * pad - K) / stride + 1;
    std::vector<double> out(O * OH * OW, 0.0);
    for (std::size_t o = 0; o < O; ++o)
        for (std::size_t y = 0; y < OH; ++y)
            for (std::size_t x = 0; x < OW; ++x) {
                double s = bias ? (*bias)[o] : 0.0;
                for (std::size_t c = 0; c < C; ++c)
                    for (std::size_t i = 0; i < K; ++i)
                        for (std::size_t j = 0; j < K; ++j) {
                            const long iy = static_cast<long>(y * stride + i) - pad;
                            const long ix = static_cast<long>(x * stride + j) - pad;
                            if (iy < 0 || ix < 0 || iy >= static_cast<long>(H) || ix >= static_cast<long>(W)) continue;
                            s += in[(c * H + iy) * W + ix] * k[((o * C + c) * K + i) * K + j];
                        }
                out[(o * OH + y) * OW + x] = s;
            }
    return out;
}

template <typename T>
std::vector<double> as_double(const T& values) {
    return std::vector<double>(values.begin(), values.end());
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
   public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("frpt_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

   private:
    std::filesystem::path path_;
};

}  // namespace frpt::testing
