#pragma once

#include <barrier>
#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <cerrno>
#include <fcntl.h>
#include <sys/socket.h>
#include <unistd.h>

namespace minidpsnn {

enum class MessageKind : std::uint8_t {
    SpikePayload = 0,   // one SpikePacket
    BrokerEnvelope = 1, // rank -> own broker gather
    BrokerTransfer = 2, // broker -> broker inter-node
};

struct Message {
    std::uint32_t src = 0;
    MessageKind kind = MessageKind::SpikePayload;
    std::vector<std::uint8_t> bytes;
};

// Reliable, in-order-per-pair message fabric with barrier semantics:
// every message sent before a barrier is receivable after it, and no
// rank passes a barrier before all have arrived.
class Transport {
public:
    virtual ~Transport() = default;
    virtual std::uint32_t n_ranks() const = 0;
    virtual void send(std::uint32_t src, std::uint32_t dst, Message msg) = 0;
    virtual std::vector<Message> receive_all(std::uint32_t rank) = 0;
    virtual void barrier() = 0;
    // A failing worker leaves the barrier so peers don't hang.
    virtual void drop_out() = 0;
};

// Mandatory backend: one mailbox per rank, shared-memory delivery,
// std::barrier for step alignment. Used by all tests.
class InProcessTransport final : public Transport {
public:
    explicit InProcessTransport(std::uint32_t ranks)
        : ranks_(ranks), mailboxes_(ranks), barrier_(ranks) {}

    std::uint32_t n_ranks() const override { return ranks_; }

    void send(std::uint32_t src, std::uint32_t dst, Message msg) override {
        msg.src = src;
        auto& box = mailboxes_.at(dst);
        std::lock_guard lock(box.mutex);
        box.messages.push_back(std::move(msg));
    }

    std::vector<Message> receive_all(std::uint32_t rank) override {
        auto& box = mailboxes_.at(rank);
        std::lock_guard lock(box.mutex);
        std::vector<Message> out;
        out.swap(box.messages);
        return out;
    }

    void barrier() override { barrier_.arrive_and_wait(); }
    void drop_out() override { barrier_.arrive_and_drop(); }

private:
    struct Mailbox {
        std::mutex mutex;
        std::vector<Message> messages;
    };
    std::uint32_t ranks_;
    std::vector<Mailbox> mailboxes_;
    std::barrier<> barrier_;
};

// Optional stream-socket backend: one connection per ordered rank pair,
// each SpikePacket framed by a 4-byte little-endian length prefix.
// Flat-mode exchanges only; the broker hierarchy stays on the
// in-process backend. Step alignment is still a process-local barrier;
// it orders all writes of a step before any read, so a non-blocking
// drain after the barrier sees every frame.
class SocketTransport final : public Transport {
public:
    explicit SocketTransport(std::uint32_t ranks)
        : ranks_(ranks), fds_(std::size_t(ranks) * ranks, {-1, -1}), barrier_(ranks) {
        for (std::uint32_t s = 0; s < ranks; ++s) {
            for (std::uint32_t d = 0; d < ranks; ++d) {
                if (s == d) continue;
                int pair[2];
                if (::socketpair(AF_UNIX, SOCK_STREAM, 0, pair) != 0)
                    throw std::runtime_error("socketpair failed");
                ::fcntl(pair[1], F_SETFL, O_NONBLOCK);
                fds_[idx(s, d)] = {pair[0], pair[1]};
            }
        }
    }

    ~SocketTransport() override {
        for (auto& f : fds_) {
            if (f.write_fd >= 0) ::close(f.write_fd);
            if (f.read_fd >= 0) ::close(f.read_fd);
        }
    }

    std::uint32_t n_ranks() const override { return ranks_; }

    void send(std::uint32_t src, std::uint32_t dst, Message msg) override {
        if (msg.kind != MessageKind::SpikePayload)
            throw std::invalid_argument("socket backend carries SpikePackets only");
        const auto& link = fds_.at(idx(src, dst));
        std::uint8_t prefix[4];
        const auto len = static_cast<std::uint32_t>(msg.bytes.size());
        prefix[0] = static_cast<std::uint8_t>(len);
        prefix[1] = static_cast<std::uint8_t>(len >> 8);
        prefix[2] = static_cast<std::uint8_t>(len >> 16);
        prefix[3] = static_cast<std::uint8_t>(len >> 24);
        write_all(link.write_fd, prefix, 4);
        write_all(link.write_fd, msg.bytes.data(), msg.bytes.size());
    }

    std::vector<Message> receive_all(std::uint32_t rank) override {
        std::vector<Message> out;
        for (std::uint32_t s = 0; s < ranks_; ++s) {
            if (s == rank) continue;
            const int fd = fds_.at(idx(s, rank)).read_fd;
            for (;;) {
                std::uint8_t prefix[4];
                const ssize_t got = ::recv(fd, prefix, 4, MSG_DONTWAIT | MSG_PEEK);
                if (got <= 0) break; // nothing pending from this peer
                if (got < 4) break;
                ::recv(fd, prefix, 4, 0);
                const std::uint32_t len = std::uint32_t(prefix[0]) |
                                          (std::uint32_t(prefix[1]) << 8) |
                                          (std::uint32_t(prefix[2]) << 16) |
                                          (std::uint32_t(prefix[3]) << 24);
                Message msg;
                msg.src = s;
                msg.bytes.resize(len);
                read_all(fd, msg.bytes.data(), len);
                out.push_back(std::move(msg));
            }
        }
        return out;
    }

    void barrier() override { barrier_.arrive_and_wait(); }
    void drop_out() override { barrier_.arrive_and_drop(); }

private:
    struct Link {
        int write_fd;
        int read_fd;
    };

    std::size_t idx(std::uint32_t src, std::uint32_t dst) const {
        return std::size_t(src) * ranks_ + dst;
    }

    static void write_all(int fd, const std::uint8_t* data, std::size_t n) {
        while (n > 0) {
            const ssize_t w = ::write(fd, data, n);
            if (w < 0) throw std::runtime_error("socket write failed");
            data += w;
            n -= static_cast<std::size_t>(w);
        }
    }

    static void read_all(int fd, std::uint8_t* data, std::size_t n) {
        while (n > 0) {
            const ssize_t r = ::read(fd, data, n); // frame body is already buffered
            if (r < 0) {
                if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) continue;
                throw std::runtime_error("socket read failed");
            }
            if (r == 0) throw std::runtime_error("socket closed mid-frame");
            data += r;
            n -= static_cast<std::size_t>(r);
        }
    }

    std::uint32_t ranks_;
    std::vector<Link> fds_;
    std::barrier<> barrier_;
};

} // namespace minidpsnn
