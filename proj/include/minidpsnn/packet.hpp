#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace minidpsnn {

struct AxonalSpike {
    std::uint32_t source = 0;
    std::uint32_t emission_step = 0;

    friend bool operator==(const AxonalSpike&, const AxonalSpike&) = default;
};

// Wire unit, little-endian throughout:
//   u8 version (=1) | u8 flags | u16 n_spikes | u32 step | n_spikes x (u32 source, u32 emission)
// Payload is capped at 512 bytes, i.e. 63 spikes per packet.
inline constexpr std::uint8_t kPacketVersion = 1;
inline constexpr std::uint8_t kFlagEmpty = 0x01;
inline constexpr std::size_t kPacketHeaderBytes = 8;
inline constexpr std::size_t kSpikeRecordBytes = 8;
inline constexpr std::size_t kMaxPacketBytes = 512;
inline constexpr std::size_t kMaxSpikesPerPacket =
    (kMaxPacketBytes - kPacketHeaderBytes) / kSpikeRecordBytes; // 63

enum class PacketFault { BadVersion, LengthMismatch, CountMismatch };

class PacketError : public std::runtime_error {
public:
    PacketError(PacketFault fault, const char* what)
        : std::runtime_error(what), fault_(fault) {}
    PacketFault fault() const { return fault_; }

private:
    PacketFault fault_;
};

namespace detail {
inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}
inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 24));
}
inline std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}
} // namespace detail

inline std::vector<std::uint8_t> pack_one(std::uint32_t step,
                                          std::span<const AxonalSpike> spikes) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(kPacketHeaderBytes + spikes.size() * kSpikeRecordBytes);
    bytes.push_back(kPacketVersion);
    bytes.push_back(spikes.empty() ? kFlagEmpty : 0);
    detail::put_u16(bytes, static_cast<std::uint16_t>(spikes.size()));
    detail::put_u32(bytes, step);
    for (const auto& s : spikes) {
        detail::put_u32(bytes, s.source);
        detail::put_u32(bytes, s.emission_step);
    }
    return bytes;
}

// Splits a step's spike set for one destination into <=63-spike packets.
// An empty set still produces one header-only packet (collective mode
// relies on this).
inline std::vector<std::vector<std::uint8_t>> pack_packets(
    std::uint32_t step, std::span<const AxonalSpike> spikes) {
    std::vector<std::vector<std::uint8_t>> packets;
    if (spikes.empty()) {
        packets.push_back(pack_one(step, spikes));
        return packets;
    }
    for (std::size_t i = 0; i < spikes.size(); i += kMaxSpikesPerPacket) {
        const std::size_t n = std::min(kMaxSpikesPerPacket, spikes.size() - i);
        packets.push_back(pack_one(step, spikes.subspan(i, n)));
    }
    return packets;
}

struct UnpackedPacket {
    std::uint32_t step = 0;
    std::vector<AxonalSpike> spikes;
};

inline UnpackedPacket unpack_packet(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kPacketHeaderBytes)
        throw PacketError(PacketFault::LengthMismatch, "packet shorter than header");
    if (bytes[0] != kPacketVersion)
        throw PacketError(PacketFault::BadVersion, "unknown packet version");
    const std::uint16_t n = detail::get_u16(bytes.data() + 2);
    if (n > kMaxSpikesPerPacket)
        throw PacketError(PacketFault::CountMismatch, "spike count exceeds packet cap");
    if (bytes.size() != kPacketHeaderBytes + std::size_t(n) * kSpikeRecordBytes)
        throw PacketError(PacketFault::LengthMismatch, "byte length inconsistent with count");
    if ((bytes[1] & kFlagEmpty) && n != 0)
        throw PacketError(PacketFault::CountMismatch, "empty flag set on non-empty packet");
    UnpackedPacket out;
    out.step = detail::get_u32(bytes.data() + 4);
    out.spikes.reserve(n);
    for (std::uint16_t i = 0; i < n; ++i) {
        const std::uint8_t* p = bytes.data() + kPacketHeaderBytes + i * kSpikeRecordBytes;
        out.spikes.push_back({detail::get_u32(p), detail::get_u32(p + 4)});
    }
    return out;
}

} // namespace minidpsnn
