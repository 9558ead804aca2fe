#ifndef LVSE_RNG_HPP
#define LVSE_RNG_HPP

#include <cstdint>
#include <string>

namespace lvse {

// Deterministic random stream with explicit algorithms (splitmix64 core,
// Box-Muller normals). std::shuffle / std::normal_distribution are
// implementation-defined, which would break bit-for-bit reproducibility
// of allocations and measurement files across standard libraries.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();
    // Uniform in [0, 1).
    double next_double();
    // Uniform integer in [0, bound); bound > 0.
    std::uint64_t next_below(std::uint64_t bound);
    // Standard normal draw.
    double next_gaussian();

    static std::uint64_t mix(std::uint64_t a, std::uint64_t b);
    static std::uint64_t hash_string(const std::string& s);

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Substream seed for one (master seed, timestep, measurement spec) triple.
// Draws are independent of evaluation order, so parallel timestep workers
// reproduce the serial results exactly.
std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t timestep,
                             std::uint64_t spec_key);

} // namespace lvse

#endif
