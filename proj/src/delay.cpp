#include "sedmdp/delay.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sedmdp {

DelayProcess DelayProcess::constant(int max_delay) {
    if (max_delay < 0) throw std::invalid_argument("constant delay: max delay must be >= 0");
    DelayProcess p;
    p.kind_ = DelayKind::Constant;
    p.max_delay_ = max_delay;
    return p;
}

DelayProcess DelayProcess::iid(std::vector<double> probs) {
    if (probs.empty()) throw std::invalid_argument("iid delay: empty distribution");
    double sum = 0.0;
    for (double q : probs) {
        if (q < 0.0) throw std::invalid_argument("iid delay: negative probability");
        sum += q;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("iid delay: probabilities sum to " + std::to_string(sum) +
                                    ", expected 1 within 1e-12");
    DelayProcess p;
    p.kind_ = DelayKind::Iid;
    p.max_delay_ = static_cast<int>(probs.size()) - 1;
    p.probs_ = std::move(probs);
    return p;
}

DelayProcess DelayProcess::random_walk(int max_delay, double p_up, double p_down) {
    if (max_delay < 0) throw std::invalid_argument("random walk delay: max delay must be >= 0");
    if (p_up < 0.0 || p_down < 0.0 || p_up + p_down > 1.0)
        throw std::invalid_argument("random walk delay: need p_up, p_down >= 0 and p_up + p_down <= 1");
    DelayProcess p;
    p.kind_ = DelayKind::RandomWalk;
    p.max_delay_ = max_delay;
    p.p_up_ = p_up;
    p.p_down_ = p_down;
    return p;
}

void DelayProcess::set_walk_value(int z) {
    if (kind_ != DelayKind::RandomWalk)
        throw std::invalid_argument("set_walk_value: not a random-walk process");
    if (z < 0 || z > max_delay_)
        throw std::invalid_argument("set_walk_value: value out of [0, M]");
    walk_value_ = z;
}

int DelayProcess::sample(RngStream& rng) {
    switch (kind_) {
    case DelayKind::Constant:
        return max_delay_;
    case DelayKind::Iid:
        return rng.categorical(probs_);
    case DelayKind::RandomWalk: {
        if (!walk_value_) {
            walk_value_ = max_delay_;  // first-ever emission starts at the bound
            return *walk_value_;
        }
        const double u = rng.uniform01();
        int z = *walk_value_;
        if (u < p_up_) z = std::min(z + 1, max_delay_);
        else if (u < p_up_ + p_down_) z = std::max(z - 1, 0);
        walk_value_ = z;
        return z;
    }
    }
    throw std::logic_error("delay process: unknown kind");
}

std::vector<double> DelayProcess::iid_probs() const {
    switch (kind_) {
    case DelayKind::Constant: {
        std::vector<double> probs(static_cast<std::size_t>(max_delay_) + 1, 0.0);
        probs.back() = 1.0;
        return probs;
    }
    case DelayKind::Iid:
        return probs_;
    case DelayKind::RandomWalk:
        throw std::invalid_argument(
            "delay process: random walk is not i.i.d.; exact calculators require a per-step distribution");
    }
    throw std::logic_error("delay process: unknown kind");
}

int delay_step(DelayProcess& process, RngStream& rng) { return process.sample(rng); }

} // namespace sedmdp
