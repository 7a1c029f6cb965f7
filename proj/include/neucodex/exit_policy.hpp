#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "neucodex/errors.hpp"

namespace neucodex {

// Confidence threshold and timestep budget for dynamic early exit.
struct ExitPolicy {
    double alpha = 0.9;
    uint32_t t_max = 2;

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw DomainError("ExitPolicy: alpha must be in (0,1)");
        if (t_max < 1)
            throw DomainError("ExitPolicy: t_max must be >= 1");
    }
};

enum class ExitDecision { Continue, Exit, ForcedExit };

// Numerically stable (max-shifted) softmax. Throws DomainError on
// non-finite input.
std::vector<double> softmax(std::span<const double> y);
std::vector<double> softmax(std::span<const float> y);

// max_i p_i. Validates that p is a probability vector (sums to 1 within 1e-6).
double confidence_score(std::span<const double> p);

// Exit iff cs >= alpha and t < t_max; ForcedExit at t = t_max regardless of
// cs; Continue otherwise. The comparison is >=, so cs == alpha exits.
ExitDecision should_exit(double cs, uint32_t t, const ExitPolicy &policy);

// Earliest t with cs_seq[t-1] >= alpha, else t_max. cs_seq must have
// exactly t_max entries.
uint32_t exit_timestep(std::span<const double> cs_seq, const ExitPolicy &policy);

// Ties broken towards the lowest index, so predictions are deterministic.
uint32_t argmax_index(std::span<const double> p);
uint32_t argmax_index(std::span<const float> p);

// Cloud-side accumulator: cumulative decision logits at step t are the
// running mean of the per-step logits y(1..t).
class LogitsRecord {
  public:
    void add(std::span<const float> y);
    // Mean logits as 32-bit values (the wire representation).
    std::vector<float> cumulative() const;
    uint32_t steps() const { return steps_; }
    size_t num_classes() const { return sum_.size(); }

  private:
    std::vector<double> sum_;
    uint32_t steps_ = 0;
};

} // namespace neucodex
