#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xroute {

/// 32-byte opaque digest. Everything committed on-chain in this codebase is
/// addressed by one of these.
using Digest = std::array<std::uint8_t, 32>;

class Sha256 {
public:
    Sha256();
    void update(const void* data, std::size_t len);
    void update(std::span<const std::uint8_t> data) { update(data.data(), data.size()); }
    void update(std::string_view s) { update(s.data(), s.size()); }
    Digest finish();

private:
    void compress(const std::uint8_t* block);

    std::array<std::uint32_t, 8> state_;
    std::array<std::uint8_t, 64> buf_;
    std::size_t buf_len_ = 0;
    std::uint64_t total_len_ = 0;
};

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view s);

std::string to_hex(const Digest& d);

// Big-endian append helpers for byte-exact serializations.
void put_u16_be(std::vector<std::uint8_t>& out, std::uint16_t v);
void put_u64_be(std::vector<std::uint8_t>& out, std::uint64_t v);
void put_bytes(std::vector<std::uint8_t>& out, std::string_view s);

}  // namespace xroute
