#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace abmphase {

// Minimal SHA-256, used for artifact digests in run manifests.
class Sha256 {
public:
    Sha256();
    void update(const void* data, std::size_t len);
    // Hex digest; the object must not be updated afterwards.
    std::string hex_digest();

    static std::string of_bytes(std::span<const char> bytes);
    static std::string of_string(const std::string& s);
    static std::string of_file(const std::string& path);

private:
    void process_block(const std::uint8_t* block);

    std::uint32_t state_[8];
    std::uint64_t bit_len_ = 0;
    std::uint8_t buffer_[64];
    std::size_t buffer_len_ = 0;
    bool finalized_ = false;
};

}  // namespace abmphase
