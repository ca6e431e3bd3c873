#include "sedmdp/mdp.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sedmdp {

namespace {

constexpr double kStochasticTol = 1e-12;

[[noreturn]] void fail(const std::ostringstream& oss) {
    throw std::invalid_argument(oss.str());
}

} // namespace

void MdpSpec::validate() const {
    if (n_states < 1 || n_actions < 1) {
        std::ostringstream oss;
        oss << "mdp must have at least one state and one action (got " << n_states
            << " states, " << n_actions << " actions)";
        fail(oss);
    }
    const auto ns = static_cast<std::size_t>(n_states);
    const auto na = static_cast<std::size_t>(n_actions);
    if (transitions.size() != ns * na * ns) {
        std::ostringstream oss;
        oss << "transition table has " << transitions.size() << " entries, expected "
            << ns * na * ns;
        fail(oss);
    }
    if (rewards.size() != ns * na) {
        std::ostringstream oss;
        oss << "reward table has " << rewards.size() << " entries, expected " << ns * na;
        fail(oss);
    }
    if (initial.size() != ns) {
        std::ostringstream oss;
        oss << "initial distribution has " << initial.size() << " entries, expected " << ns;
        fail(oss);
    }
    if (terminal.size() != ns) {
        std::ostringstream oss;
        oss << "terminal flags have " << terminal.size() << " entries, expected " << ns;
        fail(oss);
    }
    if (!(discount >= 0.0 && discount < 1.0)) {
        std::ostringstream oss;
        oss << "discount must be in [0, 1), got " << discount;
        fail(oss);
    }
    for (int s = 0; s < n_states; ++s) {
        for (int a = 0; a < n_actions; ++a) {
            double sum = 0.0;
            for (int next = 0; next < n_states; ++next) {
                const double v = p(s, a, next);
                if (!(v >= 0.0) || !std::isfinite(v)) {
                    std::ostringstream oss;
                    oss << "transition probability for (s=" << s << ", a=" << a
                        << ", s'=" << next << ") is " << v << ", must be a finite value >= 0";
                    fail(oss);
                }
                sum += v;
            }
            if (std::abs(sum - 1.0) > kStochasticTol) {
                std::ostringstream oss;
                oss << "transition row (s=" << s << ", a=" << a << ") sums to " << sum
                    << ", off by " << sum - 1.0;
                fail(oss);
            }
            if (!std::isfinite(reward(s, a))) {
                std::ostringstream oss;
                oss << "reward for (s=" << s << ", a=" << a << ") is not finite";
                fail(oss);
            }
        }
    }
    double mu_sum = 0.0;
    for (int s = 0; s < n_states; ++s) {
        const double v = initial[static_cast<std::size_t>(s)];
        if (!(v >= 0.0) || !std::isfinite(v)) {
            std::ostringstream oss;
            oss << "initial probability for state " << s << " is " << v
                << ", must be a finite value >= 0";
            fail(oss);
        }
        mu_sum += v;
    }
    if (std::abs(mu_sum - 1.0) > kStochasticTol) {
        std::ostringstream oss;
        oss << "initial distribution sums to " << mu_sum << ", off by " << mu_sum - 1.0;
        fail(oss);
    }
    for (int s = 0; s < n_states; ++s) {
        if (!is_terminal(s)) continue;
        for (int a = 0; a < n_actions; ++a) {
            if (std::abs(p(s, a, s) - 1.0) > kStochasticTol) {
                std::ostringstream oss;
                oss << "terminal state " << s << " must self-loop, but (s=" << s
                    << ", a=" << a << ") gives it probability " << p(s, a, s);
                fail(oss);
            }
            if (reward(s, a) != 0.0) {
                std::ostringstream oss;
                oss << "terminal state " << s << " must yield zero reward, but (s=" << s
                    << ", a=" << a << ") yields " << reward(s, a);
                fail(oss);
            }
        }
    }
}

} // namespace sedmdp
