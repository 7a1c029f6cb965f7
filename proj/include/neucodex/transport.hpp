#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "neucodex/errors.hpp"

namespace neucodex {

// Point-to-point channel: fixed throughput plus propagation delay, with
// optional seeded jitter on the serialization time. Deterministic given the
// seed; the default is jitter-free.
struct ChannelModel {
    double throughput_bps = 18.9e6; // measured Wi-Fi testbed default
    double propagation_delay_s = 0.0;
    double jitter_frac = 0.0; // in [0,1)
    uint64_t jitter_seed = 0;

    void validate() const {
        if (!(throughput_bps > 0.0))
            throw DomainError("ChannelModel: throughput must be > 0");
        if (!(propagation_delay_s >= 0.0))
            throw DomainError("ChannelModel: delay must be >= 0");
        if (!(jitter_frac >= 0.0 && jitter_frac < 1.0))
            throw DomainError("ChannelModel: jitter fraction must be in [0,1)");
    }
};

// bits/throughput + propagation delay. Store-and-forward: a message fully
// serializes before it arrives. Jitter (when configured) scales the
// serialization term by a factor drawn from a stream keyed on (seed, bits),
// keeping the function pure.
double transmission_time(uint64_t bits, const ChannelModel &ch);

// Reliable, in-order, message-boundary-preserving byte channel.
// send() returns the clock value at delivery; now() reads the same clock
// (virtual seconds for the simulated backend, wall seconds for sockets).
class Transport {
  public:
    virtual ~Transport() = default;

    virtual double send(std::span<const uint8_t> msg) = 0;
    virtual std::vector<uint8_t> recv() = 0; // one whole protocol message
    virtual double now() const = 0;
    virtual void close() = 0;

    uint64_t bytes_sent() const { return bytes_sent_; }
    uint64_t bytes_received() const { return bytes_received_; }
    uint64_t messages_sent() const { return messages_sent_; }
    uint64_t messages_received() const { return messages_received_; }

  protected:
    uint64_t bytes_sent_ = 0, bytes_received_ = 0;
    uint64_t messages_sent_ = 0, messages_received_ = 0;
};

// In-memory duplex link with one shared virtual clock. Each send advances
// the clock by transmission_time(8 * message bytes). Both endpoints stay
// valid for the life of the link.
class SimLink {
  public:
    explicit SimLink(ChannelModel ch);
    ~SimLink();

    Transport &edge_end();
    Transport &cloud_end();
    double virtual_now() const;
    void close();

    // Message type byte per send, in order, with direction (0 = edge->cloud).
    std::vector<std::pair<int, uint8_t>> trace() const;

    struct State;

  private:
    std::shared_ptr<State> state_;
    std::unique_ptr<Transport> edge_, cloud_;
};

// Stream transport over a connected TCP socket. Message boundaries are
// recovered from the protocol's own framing (fixed 14-byte header carrying
// the payload length), so the on-wire bytes are exactly the encoded messages.
class TcpTransport : public Transport {
  public:
    explicit TcpTransport(int fd);
    ~TcpTransport() override;

    TcpTransport(const TcpTransport &) = delete;
    TcpTransport &operator=(const TcpTransport &) = delete;

    double send(std::span<const uint8_t> msg) override;
    std::vector<uint8_t> recv() override;
    double now() const override;
    void close() override;

  private:
    int fd_;
    double start_;
};

std::unique_ptr<TcpTransport> tcp_connect(const std::string &host, uint16_t port,
                                          double timeout_s = 5.0);

class TcpListener {
  public:
    TcpListener(const std::string &host, uint16_t port);
    ~TcpListener();

    std::unique_ptr<TcpTransport> accept();
    uint16_t port() const { return port_; }
    void close();

  private:
    int fd_;
    uint16_t port_;
};

} // namespace neucodex
