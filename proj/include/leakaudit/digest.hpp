#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace leakaudit {

// Incremental SHA-256, hex digest output.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(const void* data, size_t len);
    void update(std::string_view data) { update(data.data(), data.size()); }
    void update_u64_le(uint64_t v);

    // Finalizes and returns the lowercase hex digest. The object must not be
    // updated afterwards.
    std::string hex();

private:
    void* ctx_;
};

std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::string& path);

} // namespace leakaudit
