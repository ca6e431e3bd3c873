#pragma once

#include <optional>
#include <vector>

#include "sedmdp/rng.hpp"

namespace sedmdp {

enum class DelayKind { Constant, Iid, RandomWalk };

// Source of per-step execution delays z_t in [0, M].
//
// Constant(M) always emits M. Iid draws from a fixed distribution over
// {0..M}. RandomWalk emits M on its very first draw and then moves +1 with
// probability p_up (clamped at M), -1 with probability p_down (clamped at 0),
// else stays; its state persists for the lifetime of the object and is never
// reinitialized by episode boundaries — carrying the walk across resets is
// the intended behavior.
class DelayProcess {
public:
    static DelayProcess constant(int max_delay);
    static DelayProcess iid(std::vector<double> probs);  // probs[z], size M+1
    static DelayProcess random_walk(int max_delay, double p_up = 0.2, double p_down = 0.2);

    DelayKind kind() const { return kind_; }
    int max_delay() const { return max_delay_; }

    // Next delay value; advances internal state for the walk.
    int sample(RngStream& rng);

    // The walk's current value, if it has emitted at least once.
    std::optional<int> walk_value() const { return walk_value_; }
    // Forces the walk to a value (test hook for carryover scenarios).
    void set_walk_value(int z);
    // Discards walk state so the next draw starts from M again; used when an
    // episode should NOT inherit the previous episode's delay level.
    void reset_fresh() { walk_value_.reset(); }

    // Per-step delay distribution for exact calculators. Constant is the
    // point mass at M. The random walk is not i.i.d. and is refused.
    std::vector<double> iid_probs() const;

    double p_up() const { return p_up_; }
    double p_down() const { return p_down_; }

private:
    DelayProcess() = default;
    DelayKind kind_ = DelayKind::Constant;
    int max_delay_ = 0;
    std::vector<double> probs_;
    double p_up_ = 0.0, p_down_ = 0.0;
    std::optional<int> walk_value_;
};

// Draws the next delay from the process.
int delay_step(DelayProcess& process, RngStream& rng);

} // namespace sedmdp
