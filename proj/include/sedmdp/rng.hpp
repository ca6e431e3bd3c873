#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>

namespace sedmdp {

// Deterministic random stream. All randomness in the toolkit flows through
// named sub-streams derived from one master seed, so runs are reproducible
// bit-for-bit regardless of thread count or platform: the generator is the
// standard-specified mt19937_64 and every distribution below is implemented
// here rather than delegated to (implementation-defined) <random> adaptors.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : base_seed_(seed), gen_(seed) {}

    // Sub-stream addressed by a label, e.g. fork("agent=mcts/seed=3/ep=7").
    // Purely a function of (this stream's seed, label): fork the same label
    // twice and you get the same child, so give each logical consumer its
    // own label path.
    RngStream fork(std::string_view label) const {
        return RngStream(hash_combine(base_seed_, label));
    }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). Rejection sampling; unbiased and deterministic.
    int uniform_int(int n) {
        if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
        const std::uint64_t un = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
        std::uint64_t x;
        do { x = gen_(); } while (x >= limit);
        return static_cast<int>(x % un);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Index ~ probs (need not be exactly normalized; walks the CDF and
    // clamps to the last positive entry to absorb rounding slack).
    int categorical(std::span<const double> probs) {
        if (probs.empty()) throw std::invalid_argument("categorical: empty distribution");
        const double u = uniform01();
        double acc = 0.0;
        int last_positive = -1;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (probs[i] > 0.0) last_positive = static_cast<int>(i);
            acc += probs[i];
            if (u < acc && probs[i] > 0.0) return static_cast<int>(i);
        }
        if (last_positive < 0) throw std::invalid_argument("categorical: all-zero distribution");
        return last_positive;
    }

    std::uint64_t base_seed() const { return base_seed_; }

    static std::uint64_t hash_combine(std::uint64_t seed, std::string_view label) {
        // FNV-1a over the seed bytes then the label bytes.
        std::uint64_t h = 14695981039346656037ull;
        auto eat = [&h](unsigned char b) {
            h ^= b;
            h *= 1099511628211ull;
        };
        for (int i = 0; i < 8; ++i) eat(static_cast<unsigned char>(seed >> (8 * i)));
        for (char c : label) eat(static_cast<unsigned char>(c));
        return h;
    }

private:
    std::uint64_t base_seed_ = 0;
    std::mt19937_64 gen_;
};

} // namespace sedmdp
