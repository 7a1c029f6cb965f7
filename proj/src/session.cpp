#include "neucodex/session.hpp"

#include <chrono>

namespace neucodex {

namespace {

double wall_now() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

} // namespace

EdgeRunResult edge_run_sample(const EdgeSessionConfig &cfg,
                              const FrameProvider &frames, Transport &transport) {
    if (!cfg.net)
        throw DomainError("edge_run_sample: no network");
    cfg.policy.validate();
    if (cfg.policy.t_max > 255)
        throw DomainError("edge_run_sample: t_max exceeds the wire field (255)");
    if (cfg.split == 0 || cfg.split > cfg.net->layers.size())
        throw DomainError("edge_run_sample: split out of range");

    EdgeRunResult res;
    NetStates states = make_states(*cfg.net, 0, cfg.split);
    std::optional<CodecStates> codec_states;
    if (cfg.codec)
        codec_states.emplace(*cfg.codec);
    const uint8_t flags = cfg.codec ? kFlagCompressed : 0;

    // Handshake: both sides must agree on topology + weights + codec.
    transport.send(encode_message(
        MessageHeader{MsgType::Hello, cfg.session_id, 1, flags, 0},
        encode_hello_payload(cfg.digest)));
    {
        const Message reply = decode_message(transport.recv());
        if (reply.header.type == MsgType::Error)
            throw HandshakeError("cloud rejected session: " +
                                 decode_error_payload(reply.payload));
        if (reply.header.type != MsgType::Hello)
            throw ProtocolError("expected HELLO reply, got type " +
                                std::to_string(static_cast<int>(reply.header.type)));
        if (decode_hello_payload(reply.payload) != cfg.digest)
            throw HandshakeError("cloud config digest differs");
    }

    try {
        for (uint32_t t = 1; t <= cfg.policy.t_max; ++t) {
            const double wall0 = wall_now();
            const SpikeTensor frame = frames(t);
            Activation act =
                forward_timestep(*cfg.net, states, frame, 0, cfg.split,
                                 &res.net_activity);
            const SpikeTensor *split_spikes = std::get_if<SpikeTensor>(&act);
            if (!split_spikes)
                throw DomainError("edge_run_sample: split activation is not binary");
            const SpikeTensor payload_tensor =
                cfg.codec ? bottleneck_encode(*cfg.codec, *codec_states,
                                              *split_spikes, &res.codec_activity)
                          : *split_spikes;
            res.edge_compute_wall_s += wall_now() - wall0;

            const std::vector<uint8_t> msg = encode_message(
                MessageHeader{MsgType::Feature, cfg.session_id,
                              static_cast<uint8_t>(t), flags, 0},
                encode_feature_payload(payload_tensor));
            res.uplink_feature_bits += payload_tensor.elements();
            res.uplink_wire_bytes += msg.size();

            const double t_pre = transport.now();
            const double t_sent = transport.send(msg);
            res.uplink_s += t_sent - t_pre;

            const std::vector<uint8_t> reply_bytes = transport.recv();
            res.downlink_wait_s += transport.now() - t_sent;

            const Message reply = decode_message(reply_bytes);
            if (reply.header.type == MsgType::Error)
                throw ProtocolError("cloud reported: " +
                                    decode_error_payload(reply.payload));
            if (reply.header.type != MsgType::Logits || reply.header.timestep != t)
                throw ProtocolError("expected LOGITS for timestep " +
                                    std::to_string(t));
            res.downlink_wire_bytes += reply_bytes.size();

            const std::vector<float> cumulative =
                decode_logits_payload(reply.payload);
            if (cumulative.size() != cfg.net->num_classes)
                throw ProtocolError("logits class count mismatch");

            const std::vector<double> p =
                softmax(std::span<const float>(cumulative));
            const double cs = confidence_score(p);
            res.cs_seq.push_back(cs);

            const ExitDecision decision =
                cfg.dynamic ? should_exit(cs, t, cfg.policy)
                            : (t == cfg.policy.t_max ? ExitDecision::ForcedExit
                                                     : ExitDecision::Continue);
            if (decision != ExitDecision::Continue) {
                res.t_exit = t;
                res.prediction = argmax_index(std::span<const double>(p));
                res.final_logits = cumulative;
                transport.send(encode_message(
                    MessageHeader{MsgType::Exit, cfg.session_id,
                                  static_cast<uint8_t>(t), flags, 0},
                    {}));
                return res;
            }
        }
    } catch (const TransportError &) {
        throw; // nothing left to send on
    } catch (const Error &e) {
        // Abort the session and tell the peer when the link still works.
        try {
            transport.send(encode_message(
                MessageHeader{MsgType::Error, cfg.session_id, 1, flags, 0},
                encode_error_payload(e.what())));
        } catch (...) {
        }
        throw;
    }
    throw ProtocolError("edge_run_sample: loop ended without an exit decision");
}

CloudSession::CloudSession(const CloudSessionConfig &cfg) : cfg_(cfg) {
    if (!cfg_.net)
        throw DomainError("CloudSession: no network");
    if (cfg_.split == 0 || cfg_.split > cfg_.net->layers.size())
        throw DomainError("CloudSession: split out of range");
    expected_shape_ = cfg_.codec ? cfg_.codec->cfg.code_shape()
                                 : cfg_.net->boundary_shapes[cfg_.split];
    states_ = make_states(*cfg_.net, cfg_.split, cfg_.net->layers.size());
    if (cfg_.codec)
        codec_states_.emplace(*cfg_.codec);
}

std::vector<uint8_t> CloudSession::fail(const std::string &what, uint8_t timestep) {
    done_ = true;
    summary_.error = what;
    return encode_message(MessageHeader{MsgType::Error, summary_.session_id,
                                        timestep, 0, 0},
                          encode_error_payload(what));
}

std::optional<std::vector<uint8_t>> CloudSession::on_message(const Message &msg) {
    if (done_)
        throw ProtocolError("CloudSession: message after session end");

    switch (msg.header.type) {
    case MsgType::Hello: {
        if (hello_seen_)
            return fail("duplicate HELLO", msg.header.timestep);
        summary_.session_id = msg.header.session_id;
        uint64_t peer_digest = 0;
        try {
            peer_digest = decode_hello_payload(msg.payload);
        } catch (const Error &e) {
            return fail(e.what(), msg.header.timestep);
        }
        if (peer_digest != cfg_.digest)
            return fail("config digest mismatch", msg.header.timestep);
        const bool peer_compressed = msg.header.flags & kFlagCompressed;
        if (peer_compressed != (cfg_.codec != nullptr))
            return fail("compression flag mismatch", msg.header.timestep);
        hello_seen_ = true;
        return encode_message(
            MessageHeader{MsgType::Hello, msg.header.session_id, 1,
                          static_cast<uint8_t>(cfg_.codec ? kFlagCompressed : 0), 0},
            encode_hello_payload(cfg_.digest));
    }
    case MsgType::Feature: {
        if (!hello_seen_)
            return fail("FEATURE before HELLO", msg.header.timestep);
        if (msg.header.session_id != summary_.session_id)
            return fail("session id mismatch", msg.header.timestep);
        if (msg.header.timestep != next_t_)
            return fail("out-of-order timestep " + std::to_string(msg.header.timestep) +
                            " (expected " + std::to_string(next_t_) + ")",
                        msg.header.timestep);
        const bool compressed = msg.header.flags & kFlagCompressed;
        if (compressed != (cfg_.codec != nullptr))
            return fail("compression flag mismatch", msg.header.timestep);

        SpikeTensor received;
        try {
            received = decode_feature_payload(msg.payload);
        } catch (const Error &e) {
            return fail(e.what(), msg.header.timestep);
        }
        if (!(received.shape() == expected_shape_))
            return fail("feature shape " + received.shape().to_string() +
                            " does not match negotiated " + expected_shape_.to_string(),
                        msg.header.timestep);

        const double wall0 = wall_now();
        SpikeTensor feature = received;
        if (cfg_.codec)
            feature = bottleneck_decode(*cfg_.codec, *codec_states_, received);
        const Activation out = forward_timestep(*cfg_.net, states_, feature,
                                                cfg_.split, cfg_.net->layers.size());
        summary_.compute_wall_s += wall_now() - wall0;

        const DenseTensor &logits = std::get<DenseTensor>(out);
        record_.add(logits.data);
        const std::vector<float> cumulative = record_.cumulative();
        summary_.steps = next_t_;
        ++next_t_;
        return encode_message(MessageHeader{MsgType::Logits, summary_.session_id,
                                            msg.header.timestep, 0, 0},
                              encode_logits_payload(cumulative));
    }
    case MsgType::Exit: {
        if (!hello_seen_)
            return fail("EXIT before HELLO", msg.header.timestep);
        summary_.clean_exit = true;
        summary_.edge_t_exit = msg.header.timestep;
        states_.reset();
        if (codec_states_)
            codec_states_->reset();
        done_ = true;
        return std::nullopt;
    }
    case MsgType::Error: {
        summary_.error = decode_error_payload(msg.payload);
        done_ = true;
        return std::nullopt;
    }
    case MsgType::Logits:
        return fail("unexpected LOGITS from edge", msg.header.timestep);
    }
    return fail("unknown message type", msg.header.timestep);
}

CloudSessionSummary cloud_run_session(const CloudSessionConfig &cfg,
                                      Transport &transport) {
    CloudSession session(cfg);
    while (!session.done()) {
        const std::vector<uint8_t> bytes = transport.recv();
        Message msg;
        try {
            msg = decode_message(bytes);
        } catch (const Error &e) {
            // Malformed frame: report and stop this session.
            try {
                transport.send(encode_message(
                    MessageHeader{MsgType::Error, 0, 1, 0, 0},
                    encode_error_payload(e.what())));
            } catch (...) {
            }
            CloudSessionSummary s = session.summary();
            s.error = e.what();
            return s;
        }
        const auto reply = session.on_message(msg);
        if (reply)
            transport.send(*reply);
    }
    return session.summary();
}

EdgeRunResult run_monolithic_sample(const NetworkGraph &net, const ExitPolicy &policy,
                                    bool dynamic, const FrameProvider &frames) {
    policy.validate();
    EdgeRunResult res;
    NetStates states = make_states(net);
    LogitsRecord record;
    for (uint32_t t = 1; t <= policy.t_max; ++t) {
        const double wall0 = wall_now();
        const SpikeTensor frame = frames(t);
        const Activation out = forward_timestep(net, states, frame, 0,
                                                net.layers.size(), &res.net_activity);
        res.edge_compute_wall_s += wall_now() - wall0;

        record.add(std::get<DenseTensor>(out).data);
        // Same float32 quantization as the wire path, so distributed and
        // monolithic decisions are bit-identical.
        const std::vector<float> cumulative = record.cumulative();
        const std::vector<double> p = softmax(std::span<const float>(cumulative));
        const double cs = confidence_score(p);
        res.cs_seq.push_back(cs);

        const ExitDecision decision =
            dynamic ? should_exit(cs, t, policy)
                    : (t == policy.t_max ? ExitDecision::ForcedExit
                                         : ExitDecision::Continue);
        if (decision != ExitDecision::Continue) {
            res.t_exit = t;
            res.prediction = argmax_index(std::span<const double>(p));
            res.final_logits = cumulative;
            return res;
        }
    }
    throw DomainError("run_monolithic_sample: loop ended without an exit decision");
}

} // namespace neucodex
