#include "neucodex/exit_policy.hpp"

#include <algorithm>
#include <cmath>

namespace neucodex {

namespace {

template <typename T> std::vector<double> softmax_impl(std::span<const T> y) {
    if (y.empty())
        throw DomainError("softmax: empty input");
    double mx = -std::numeric_limits<double>::infinity();
    for (T v : y) {
        if (!std::isfinite(static_cast<double>(v)))
            throw DomainError("softmax: non-finite input");
        mx = std::max(mx, static_cast<double>(v));
    }
    std::vector<double> p(y.size());
    double sum = 0.0;
    for (size_t i = 0; i < y.size(); ++i) {
        p[i] = std::exp(static_cast<double>(y[i]) - mx);
        sum += p[i];
    }
    for (double &v : p)
        v /= sum;
    return p;
}

} // namespace

std::vector<double> softmax(std::span<const double> y) { return softmax_impl(y); }
std::vector<double> softmax(std::span<const float> y) { return softmax_impl(y); }

double confidence_score(std::span<const double> p) {
    if (p.empty())
        throw DomainError("confidence_score: empty distribution");
    double sum = 0.0, mx = 0.0;
    for (double v : p) {
        if (!(v >= 0.0 && v <= 1.0 + 1e-9))
            throw DomainError("confidence_score: probability outside [0,1]");
        sum += v;
        mx = std::max(mx, v);
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw DomainError("confidence_score: probabilities sum to " +
                          std::to_string(sum));
    return mx;
}

ExitDecision should_exit(double cs, uint32_t t, const ExitPolicy &policy) {
    policy.validate();
    if (t < 1 || t > policy.t_max)
        throw DomainError("should_exit: t=" + std::to_string(t) +
                          " outside [1," + std::to_string(policy.t_max) + "]");
    if (t == policy.t_max)
        return ExitDecision::ForcedExit;
    return cs >= policy.alpha ? ExitDecision::Exit : ExitDecision::Continue;
}

uint32_t exit_timestep(std::span<const double> cs_seq, const ExitPolicy &policy) {
    policy.validate();
    if (cs_seq.size() != policy.t_max)
        throw DomainError("exit_timestep: expected " + std::to_string(policy.t_max) +
                          " scores, got " + std::to_string(cs_seq.size()));
    for (uint32_t t = 1; t <= policy.t_max; ++t)
        if (cs_seq[t - 1] >= policy.alpha)
            return t;
    return policy.t_max;
}

namespace {
template <typename T> uint32_t argmax_impl(std::span<const T> p) {
    if (p.empty())
        throw DomainError("argmax: empty input");
    uint32_t best = 0;
    for (uint32_t i = 1; i < p.size(); ++i)
        if (p[i] > p[best])
            best = i;
    return best;
}
} // namespace

uint32_t argmax_index(std::span<const double> p) { return argmax_impl(p); }
uint32_t argmax_index(std::span<const float> p) { return argmax_impl(p); }

void LogitsRecord::add(std::span<const float> y) {
    if (sum_.empty())
        sum_.assign(y.size(), 0.0);
    else if (sum_.size() != y.size())
        throw DomainError("LogitsRecord: class count changed mid-sample");
    for (size_t i = 0; i < y.size(); ++i) {
        if (!std::isfinite(y[i]))
            throw DomainError("LogitsRecord: non-finite logit");
        sum_[i] += y[i];
    }
    ++steps_;
}

std::vector<float> LogitsRecord::cumulative() const {
    if (steps_ == 0)
        throw DomainError("LogitsRecord: no logits recorded");
    std::vector<float> out(sum_.size());
    for (size_t i = 0; i < sum_.size(); ++i)
        out[i] = static_cast<float>(sum_[i] / steps_);
    return out;
}

} // namespace neucodex
