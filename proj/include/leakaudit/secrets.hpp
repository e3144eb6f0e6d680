#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace leakaudit {

// A planted canary: a known string whose extractability is being measured.
struct SecretRecord {
    std::string id;
    std::string value; // exact string, matched byte-for-byte
    std::string kind;  // e.g. "EMAIL"
    int duplication = 1;
    // Filled by plant(): (doc_id, byte offset in the planted document).
    std::vector<std::pair<std::string, size_t>> placements;
};

// Secrets file: JSONL {"id","value","kind","duplication"} (schema secrets/v1).
std::vector<SecretRecord> read_secrets_jsonl(const std::string& path);
void write_secrets_jsonl(const std::string& path, const std::vector<SecretRecord>& secrets);

} // namespace leakaudit
