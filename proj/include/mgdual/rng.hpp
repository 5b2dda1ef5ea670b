#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace mgdual::sim {

// Philox4x32-10 counter-based generator. Draw j of path i is a pure function
// of (seed, i, j), so path streams are identical under any traversal order or
// blocking, which is what makes the Monte Carlo engine reproducible.
std::array<std::uint32_t, 4> philox4x32(std::uint64_t seed, std::uint64_t path,
                                        std::uint64_t counter);

// uniform in the open interval (0,1)
double uniform_open(std::uint64_t seed, std::uint64_t path, std::uint64_t index);

// standard normal quantile (Wichura's PPND16, |rel err| ~ 1e-15)
double inverse_normal_cdf(double p);

// index-addressable standard normal stream for one path
struct NormalStream {
    std::uint64_t seed = 0;
    std::uint64_t path = 0;
    double operator()(std::uint64_t index) const {
        return inverse_normal_cdf(uniform_open(seed, path, index));
    }
    void fill(std::span<double> out, std::uint64_t start_index) const {
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = (*this)(start_index + static_cast<std::uint64_t>(i));
    }
};

}  // namespace mgdual::sim
