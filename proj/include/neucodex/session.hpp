#pragma once

#include <functional>
#include <optional>

#include "neucodex/bottleneck.hpp"
#include "neucodex/exit_policy.hpp"
#include "neucodex/network.hpp"
#include "neucodex/protocol.hpp"
#include "neucodex/transport.hpp"

namespace neucodex {

// Produces the input spike frame for timestep t (1-based). Called lazily so
// an early exit skips the encoding work for the remaining timesteps.
using FrameProvider = std::function<SpikeTensor(uint32_t t)>;

struct EdgeSessionConfig {
    const NetworkGraph *net = nullptr;
    const Bottleneck *codec = nullptr; // null = no bottleneck (-B)
    size_t split = 0;                  // edge runs layers [0, split)
    ExitPolicy policy;
    bool dynamic = true; // false = always use all t_max timesteps (F configs)
    uint32_t session_id = 0;
    uint64_t digest = 0;
};

struct EdgeRunResult {
    uint32_t prediction = 0;
    uint32_t t_exit = 0;
    std::vector<float> final_logits;
    std::vector<double> cs_seq; // confidence per executed timestep

    uint64_t uplink_feature_bits = 0;   // logical (pre-padding) spike bits
    uint64_t uplink_wire_bytes = 0;     // FEATURE messages, headers included
    uint64_t downlink_wire_bytes = 0;   // LOGITS messages, headers included
    double uplink_s = 0.0;              // transport clock inside send calls
    double downlink_wait_s = 0.0;       // send-complete to reply-received
    double edge_compute_wall_s = 0.0;   // host wall time in forward/encode

    ActivityTrace net_activity;  // edge layers, mean input activity
    CodecActivity codec_activity;
};

// Runs one inference over an established transport: HELLO handshake, then
// per timestep FEATURE up / LOGITS down until the exit rule fires, then
// EXIT. Throws HandshakeError on digest mismatch, ProtocolError on a
// malformed reply, TransportError on link failure (after attempting to
// send an ERROR message).
EdgeRunResult edge_run_sample(const EdgeSessionConfig &cfg,
                              const FrameProvider &frames, Transport &transport);

struct CloudSessionConfig {
    const NetworkGraph *net = nullptr;
    const Bottleneck *codec = nullptr;
    size_t split = 0; // cloud runs layers [split, end)
    uint64_t digest = 0;
};

struct CloudSessionSummary {
    uint32_t session_id = 0;
    uint32_t steps = 0;
    bool clean_exit = false;
    uint32_t edge_t_exit = 0; // as carried by the EXIT message
    std::string error;        // nonempty if the session ended with ERROR
    double compute_wall_s = 0.0;
};

// Transport-free cloud state machine: feed one decoded message, get the
// optional reply bytes. Per-session LIF state is isolated by construction.
class CloudSession {
  public:
    explicit CloudSession(const CloudSessionConfig &cfg);

    std::optional<std::vector<uint8_t>> on_message(const Message &msg);
    bool done() const { return done_; }
    const CloudSessionSummary &summary() const { return summary_; }

  private:
    std::vector<uint8_t> fail(const std::string &what, uint8_t timestep);

    CloudSessionConfig cfg_;
    Shape expected_shape_;
    NetStates states_;
    std::optional<CodecStates> codec_states_;
    LogitsRecord record_;
    bool hello_seen_ = false;
    bool done_ = false;
    uint32_t next_t_ = 1;
    CloudSessionSummary summary_;
};

// Serves exactly one session over the transport: recv/handle/reply until
// EXIT or ERROR. TransportError propagates to the caller (end of stream).
CloudSessionSummary cloud_run_session(const CloudSessionConfig &cfg,
                                      Transport &transport);

// Monolithic single-process run of the same decision loop; the oracle for
// split fidelity and the edge-only baseline. Returns the same result type
// with zeroed transmission fields.
EdgeRunResult run_monolithic_sample(const NetworkGraph &net, const ExitPolicy &policy,
                                    bool dynamic, const FrameProvider &frames);

} // namespace neucodex
