#include "neucodex/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <thread>

#include "neucodex/protocol.hpp"
#include "neucodex/rng.hpp"

namespace neucodex {

double transmission_time(uint64_t bits, const ChannelModel &ch) {
    ch.validate();
    double serialization = static_cast<double>(bits) / ch.throughput_bps;
    if (ch.jitter_frac > 0.0) {
        SplitMix64 rng(derive_seed(ch.jitter_seed, bits));
        serialization *= 1.0 + ch.jitter_frac * rng.next_double();
    }
    return serialization + ch.propagation_delay_s;
}

// ---------------------------------------------------------------------------
// Simulated link

struct SimLink::State {
    ChannelModel ch;
    mutable std::mutex mu;
    std::condition_variable cv;
    std::deque<std::vector<uint8_t>> queues[2]; // [0] edge->cloud, [1] cloud->edge
    double vclock = 0.0;
    bool closed = false;
    std::vector<std::pair<int, uint8_t>> trace;
};

namespace {

class SimEndpoint : public Transport {
  public:
    SimEndpoint(std::shared_ptr<SimLink::State> st, int dir)
        : state_(std::move(st)), dir_(dir) {}

    double send(std::span<const uint8_t> msg) override {
        std::lock_guard<std::mutex> lock(state_->mu);
        if (state_->closed)
            throw TransportError("simulated link is closed");
        state_->vclock += transmission_time(8 * msg.size(), state_->ch);
        state_->queues[dir_].emplace_back(msg.begin(), msg.end());
        if (msg.size() > 3)
            state_->trace.emplace_back(dir_, msg[3]);
        bytes_sent_ += msg.size();
        ++messages_sent_;
        state_->cv.notify_all();
        return state_->vclock;
    }

    std::vector<uint8_t> recv() override {
        std::unique_lock<std::mutex> lock(state_->mu);
        auto &q = state_->queues[1 - dir_];
        state_->cv.wait(lock, [&] { return !q.empty() || state_->closed; });
        if (q.empty())
            throw TransportError("simulated link closed");
        std::vector<uint8_t> msg = std::move(q.front());
        q.pop_front();
        bytes_received_ += msg.size();
        ++messages_received_;
        return msg;
    }

    double now() const override {
        std::lock_guard<std::mutex> lock(state_->mu);
        return state_->vclock;
    }

    void close() override {
        std::lock_guard<std::mutex> lock(state_->mu);
        state_->closed = true;
        state_->cv.notify_all();
    }

  private:
    std::shared_ptr<SimLink::State> state_;
    int dir_;
};

} // namespace

SimLink::SimLink(ChannelModel ch) : state_(std::make_shared<State>()) {
    ch.validate();
    state_->ch = ch;
    edge_ = std::make_unique<SimEndpoint>(state_, 0);
    cloud_ = std::make_unique<SimEndpoint>(state_, 1);
}

SimLink::~SimLink() { close(); }

Transport &SimLink::edge_end() { return *edge_; }
Transport &SimLink::cloud_end() { return *cloud_; }

double SimLink::virtual_now() const {
    std::lock_guard<std::mutex> lock(state_->mu);
    return state_->vclock;
}

void SimLink::close() {
    std::lock_guard<std::mutex> lock(state_->mu);
    state_->closed = true;
    state_->cv.notify_all();
}

std::vector<std::pair<int, uint8_t>> SimLink::trace() const {
    std::lock_guard<std::mutex> lock(state_->mu);
    return state_->trace;
}

// ---------------------------------------------------------------------------
// TCP

namespace {

double wall_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

constexpr uint32_t kMaxPayload = 64u << 20; // sanity cap on declared lengths

void write_all(int fd, const uint8_t *data, size_t n) {
    while (n > 0) {
        const ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
        if (w <= 0)
            throw TransportError("socket write failed: " +
                                 std::string(std::strerror(errno)));
        data += w;
        n -= static_cast<size_t>(w);
    }
}

// Returns false on clean EOF before the first byte.
bool read_exact(int fd, uint8_t *data, size_t n) {
    size_t got = 0;
    while (got < n) {
        const ssize_t r = ::recv(fd, data + got, n - got, 0);
        if (r == 0) {
            if (got == 0)
                return false;
            throw TransportError("connection closed mid-message");
        }
        if (r < 0)
            throw TransportError("socket read failed: " +
                                 std::string(std::strerror(errno)));
        got += static_cast<size_t>(r);
    }
    return true;
}

} // namespace

TcpTransport::TcpTransport(int fd) : fd_(fd), start_(wall_seconds()) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

TcpTransport::~TcpTransport() { close(); }

double TcpTransport::send(std::span<const uint8_t> msg) {
    if (fd_ < 0)
        throw TransportError("transport is closed");
    write_all(fd_, msg.data(), msg.size());
    bytes_sent_ += msg.size();
    ++messages_sent_;
    return now();
}

std::vector<uint8_t> TcpTransport::recv() {
    if (fd_ < 0)
        throw TransportError("transport is closed");
    std::vector<uint8_t> msg(kHeaderSize);
    if (!read_exact(fd_, msg.data(), kHeaderSize))
        throw TransportError("connection closed");
    const uint32_t payload_len = static_cast<uint32_t>(msg[10]) << 24 |
                                 static_cast<uint32_t>(msg[11]) << 16 |
                                 static_cast<uint32_t>(msg[12]) << 8 |
                                 static_cast<uint32_t>(msg[13]);
    if (payload_len > kMaxPayload)
        throw ProtocolError("declared payload length implausible: " +
                            std::to_string(payload_len));
    msg.resize(kHeaderSize + payload_len);
    if (payload_len > 0 && !read_exact(fd_, msg.data() + kHeaderSize, payload_len))
        throw TransportError("connection closed mid-message");
    bytes_received_ += msg.size();
    ++messages_received_;
    return msg;
}

double TcpTransport::now() const { return wall_seconds() - start_; }

void TcpTransport::close() {
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
        fd_ = -1;
    }
}

std::unique_ptr<TcpTransport> tcp_connect(const std::string &host, uint16_t port,
                                          double timeout_s) {
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration<double>(timeout_s);
    std::string last_error = "no attempt made";
    do {
        addrinfo hints{};
        hints.ai_family = AF_INET;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo *res = nullptr;
        const std::string port_str = std::to_string(port);
        if (getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res) == 0) {
            const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
            if (fd >= 0 && ::connect(fd, res->ai_addr, res->ai_addrlen) == 0) {
                freeaddrinfo(res);
                return std::make_unique<TcpTransport>(fd);
            }
            last_error = std::strerror(errno);
            if (fd >= 0)
                ::close(fd);
            freeaddrinfo(res);
        } else {
            last_error = "cannot resolve " + host;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    } while (std::chrono::steady_clock::now() < deadline);
    throw TransportError("cannot connect to " + host + ":" + std::to_string(port) +
                         " (" + last_error + ")");
}

TcpListener::TcpListener(const std::string &host, uint16_t port) : fd_(-1), port_(port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0)
        throw TransportError("cannot create socket");
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (host.empty() || host == "0.0.0.0")
        addr.sin_addr.s_addr = INADDR_ANY;
    else if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd_);
        throw TransportError("cannot parse listen address " + host);
    }
    if (::bind(fd_, reinterpret_cast<sockaddr *>(&addr), sizeof(addr)) != 0) {
        const std::string err = std::strerror(errno);
        ::close(fd_);
        throw TransportError("cannot bind " + host + ":" + std::to_string(port) +
                             " (" + err + ")");
    }
    if (::listen(fd_, 16) != 0) {
        const std::string err = std::strerror(errno);
        ::close(fd_);
        throw TransportError("cannot listen (" + err + ")");
    }
    socklen_t len = sizeof(addr);
    if (::getsockname(fd_, reinterpret_cast<sockaddr *>(&addr), &len) == 0)
        port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() { close(); }

std::unique_ptr<TcpTransport> TcpListener::accept() {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd < 0)
        throw TransportError("accept failed: " + std::string(std::strerror(errno)));
    return std::make_unique<TcpTransport>(fd);
}

void TcpListener::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

} // namespace neucodex
