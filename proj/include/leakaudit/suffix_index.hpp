#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace leakaudit {

class Corpus;

// A located common substring between a query and the indexed corpus.
// query[query_begin, query_end) == corpus doc_id bytes at
// [doc_offset, doc_offset + length).
struct MatchSpan {
    std::string query_id;
    size_t query_begin = 0;
    size_t query_end = 0;
    std::string doc_id;
    size_t doc_offset = 0;
    size_t length = 0;
};

// Immutable suffix array over the corpus documents, concatenated with 0x00
// sentinels. Safe for unlimited concurrent readers. Queries must be
// sentinel-free and non-empty; a match never crosses a document boundary
// because the sentinel byte cannot equal any query byte.
class SuffixIndex {
public:
    static SuffixIndex build(const Corpus& corpus);

    bool contains(std::string_view needle) const;

    // A maximal-length common substring between query and corpus (any one of
    // them if several tie); nullopt when not even one byte matches.
    std::optional<MatchSpan> longest_match(std::string_view query,
                                           const std::string& query_id) const;

    // All maximal matches of length >= min_len, greedy left-to-right: each
    // query position is covered by at most one span.
    std::vector<MatchSpan> common_ngrams(std::string_view query, size_t min_len,
                                         const std::string& query_id) const;

    // Length of the longest prefix of `q` occurring anywhere in the corpus.
    // Stops at a NUL in q (NUL can never match).
    size_t longest_prefix_len(std::string_view q) const;

    const std::string& content_digest() const { return digest_; }

    // Versioned binary cache keyed by the corpus content digest.
    void save(const std::string& path) const;
    static SuffixIndex load(const std::string& path);

    // Exposed for oracle tests.
    const std::vector<uint32_t>& suffix_array() const { return sa_; }
    const std::string& buffer() const { return buffer_; }

private:
    std::pair<size_t, uint32_t> longest_prefix_at(std::string_view q) const;
    void resolve_doc(uint32_t buffer_pos, std::string& doc_id, size_t& local_offset) const;

    std::string buffer_;
    std::vector<uint32_t> sa_;
    std::vector<uint64_t> doc_starts_;
    std::vector<std::string> doc_ids_;
    std::string digest_;
};

// Sorted suffix order via prefix doubling with radix passes; exposed so the
// oracle tests can run it on raw strings.
std::vector<uint32_t> build_suffix_array(std::string_view text);

} // namespace leakaudit
