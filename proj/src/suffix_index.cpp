#include "leakaudit/suffix_index.hpp"

#include <algorithm>
#include <cstring>

#include "leakaudit/corpus.hpp"
#include "leakaudit/digest.hpp"
#include "leakaudit/errors.hpp"
#include "leakaudit/io.hpp"

namespace leakaudit {

std::vector<uint32_t> build_suffix_array(std::string_view text) {
    const size_t n = text.size();
    std::vector<uint32_t> sa(n);
    if (n == 0) return sa;

    std::vector<uint32_t> rank(n), tmp_rank(n), tmp_sa(n), cnt;

    // Initial order: counting sort by byte value.
    cnt.assign(256, 0);
    for (unsigned char c : text) ++cnt[c];
    for (size_t i = 1; i < cnt.size(); ++i) cnt[i] += cnt[i - 1];
    for (size_t i = n; i-- > 0;) sa[--cnt[static_cast<unsigned char>(text[i])]] = static_cast<uint32_t>(i);
    rank[sa[0]] = 0;
    for (size_t i = 1; i < n; ++i) {
        rank[sa[i]] = rank[sa[i - 1]] + (text[sa[i]] != text[sa[i - 1]] ? 1 : 0);
    }

    for (size_t k = 1; k < n && rank[sa[n - 1]] + 1 < n; k <<= 1) {
        // Sort by second key (rank at i+k): suffixes with i+k >= n come
        // first, the rest in the order of the previous pass shifted by k.
        size_t p = 0;
        for (size_t i = n - k; i < n; ++i) tmp_sa[p++] = static_cast<uint32_t>(i);
        for (size_t i = 0; i < n; ++i) {
            if (sa[i] >= k) tmp_sa[p++] = sa[i] - static_cast<uint32_t>(k);
        }
        // Stable counting sort by first key (current rank).
        const size_t buckets = rank[sa[n - 1]] + 1;
        cnt.assign(buckets, 0);
        for (size_t i = 0; i < n; ++i) ++cnt[rank[i]];
        for (size_t i = 1; i < buckets; ++i) cnt[i] += cnt[i - 1];
        for (size_t i = n; i-- > 0;) sa[--cnt[rank[tmp_sa[i]]]] = tmp_sa[i];

        tmp_rank[sa[0]] = 0;
        for (size_t i = 1; i < n; ++i) {
            const uint32_t a = sa[i - 1];
            const uint32_t b = sa[i];
            // UINT32_MAX stands in for "suffix ends before i+k"; it is only
            // compared for equality, and two distinct suffixes can never both
            // hit it while sharing the first-half rank.
            const bool same = rank[a] == rank[b] &&
                              ((a + k < n ? rank[a + k] : UINT32_MAX) ==
                               (b + k < n ? rank[b + k] : UINT32_MAX));
            tmp_rank[b] = tmp_rank[a] + (same ? 0 : 1);
        }
        rank.swap(tmp_rank);
    }
    return sa;
}

SuffixIndex SuffixIndex::build(const Corpus& corpus) {
    SuffixIndex idx;
    idx.digest_ = corpus.content_digest();
    size_t total = 0;
    for (const auto& doc : corpus.documents()) total += doc.text.size() + 1;
    idx.buffer_.reserve(total);
    for (const auto& doc : corpus.documents()) {
        idx.doc_ids_.push_back(doc.id);
        idx.doc_starts_.push_back(idx.buffer_.size());
        idx.buffer_ += doc.text;
        idx.buffer_.push_back('\0');
    }
    idx.sa_ = build_suffix_array(idx.buffer_);
    return idx;
}

namespace {

// Lexicographic comparison of buffer suffix vs query prefix, capped at the
// query length (a suffix that starts with the whole query compares equal).
int compare_suffix(std::string_view buffer, uint32_t pos, std::string_view q) {
    const size_t avail = buffer.size() - pos;
    const size_t len = std::min(avail, q.size());
    const int c = std::memcmp(buffer.data() + pos, q.data(), len);
    if (c != 0) return c < 0 ? -1 : 1;
    if (len == q.size()) return 0; // suffix has q as prefix (or equals it)
    return -1;                     // suffix is a strict prefix of q
}

size_t common_prefix_len(std::string_view buffer, uint32_t pos, std::string_view q) {
    const size_t limit = std::min(buffer.size() - pos, q.size());
    size_t l = 0;
    while (l < limit && buffer[pos + l] == q[l]) ++l;
    return l;
}

} // namespace

std::pair<size_t, uint32_t> SuffixIndex::longest_prefix_at(std::string_view q) const {
    if (q.empty() || sa_.empty()) return {0, 0};
    // Insertion point of q in suffix order; the best-matching suffix is one
    // of its two neighbors.
    size_t lo = 0;
    size_t hi = sa_.size();
    while (lo < hi) {
        const size_t mid = lo + (hi - lo) / 2;
        if (compare_suffix(buffer_, sa_[mid], q) < 0) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    size_t best_len = 0;
    uint32_t best_pos = 0;
    if (lo < sa_.size()) {
        const size_t l = common_prefix_len(buffer_, sa_[lo], q);
        if (l > best_len) {
            best_len = l;
            best_pos = sa_[lo];
        }
    }
    if (lo > 0) {
        const size_t l = common_prefix_len(buffer_, sa_[lo - 1], q);
        if (l > best_len) {
            best_len = l;
            best_pos = sa_[lo - 1];
        }
    }
    return {best_len, best_pos};
}

size_t SuffixIndex::longest_prefix_len(std::string_view q) const {
    const size_t nul = q.find('\0');
    if (nul != std::string_view::npos) q = q.substr(0, nul);
    return longest_prefix_at(q).first;
}

bool SuffixIndex::contains(std::string_view needle) const {
    if (needle.empty()) throw Error("contains: needle must be non-empty");
    if (needle.find('\0') != std::string_view::npos) {
        throw Error("contains: needle must be sentinel-free");
    }
    return longest_prefix_at(needle).first == needle.size();
}

void SuffixIndex::resolve_doc(uint32_t buffer_pos, std::string& doc_id,
                              size_t& local_offset) const {
    const auto it = std::upper_bound(doc_starts_.begin(), doc_starts_.end(), buffer_pos);
    const size_t doc = static_cast<size_t>(it - doc_starts_.begin()) - 1;
    doc_id = doc_ids_[doc];
    local_offset = buffer_pos - doc_starts_[doc];
}

std::optional<MatchSpan> SuffixIndex::longest_match(std::string_view query,
                                                    const std::string& query_id) const {
    if (query.empty()) throw Error("longest_match: query must be non-empty");
    if (query.find('\0') != std::string_view::npos) {
        throw Error("longest_match: query must be sentinel-free");
    }
    size_t best_len = 0;
    size_t best_query_begin = 0;
    uint32_t best_pos = 0;
    for (size_t i = 0; i < query.size(); ++i) {
        if (query.size() - i <= best_len) break;
        const auto [len, pos] = longest_prefix_at(query.substr(i));
        if (len > best_len) {
            best_len = len;
            best_query_begin = i;
            best_pos = pos;
        }
    }
    if (best_len == 0) return std::nullopt;
    MatchSpan span;
    span.query_id = query_id;
    span.query_begin = best_query_begin;
    span.query_end = best_query_begin + best_len;
    span.length = best_len;
    resolve_doc(best_pos, span.doc_id, span.doc_offset);
    return span;
}

std::vector<MatchSpan> SuffixIndex::common_ngrams(std::string_view query, size_t min_len,
                                                  const std::string& query_id) const {
    if (min_len < 1) throw Error("common_ngrams: min_len must be >= 1");
    if (query.find('\0') != std::string_view::npos) {
        throw Error("common_ngrams: query must be sentinel-free");
    }
    std::vector<MatchSpan> spans;
    size_t i = 0;
    while (i < query.size()) {
        const auto [len, pos] = longest_prefix_at(query.substr(i));
        if (len >= min_len) {
            MatchSpan span;
            span.query_id = query_id;
            span.query_begin = i;
            span.query_end = i + len;
            span.length = len;
            resolve_doc(pos, span.doc_id, span.doc_offset);
            spans.push_back(std::move(span));
            i += len;
        } else {
            ++i;
        }
    }
    return spans;
}

namespace {

constexpr char kIndexMagic[4] = {'L', 'A', 'I', 'X'};
constexpr uint32_t kIndexVersion = 1;

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

struct CacheReader {
    const std::string& buf;
    size_t pos = 0;
    void need(size_t n) const {
        if (pos + n > buf.size()) throw Error("truncated index cache");
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<uint8_t>(buf[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    std::string bytes(size_t n) {
        need(n);
        std::string v = buf.substr(pos, n);
        pos += n;
        return v;
    }
};

} // namespace

void SuffixIndex::save(const std::string& path) const {
    std::string out;
    out.append(kIndexMagic, sizeof(kIndexMagic));
    put_u32(out, kIndexVersion);
    put_u64(out, digest_.size());
    out += digest_;
    put_u64(out, buffer_.size());
    out += buffer_;
    put_u64(out, sa_.size());
    for (uint32_t v : sa_) put_u32(out, v);
    put_u64(out, doc_ids_.size());
    for (size_t i = 0; i < doc_ids_.size(); ++i) {
        put_u64(out, doc_starts_[i]);
        put_u64(out, doc_ids_[i].size());
        out += doc_ids_[i];
    }
    write_file(path, out);
}

SuffixIndex SuffixIndex::load(const std::string& path) {
    const std::string buf = read_file(path);
    CacheReader r{buf};
    const std::string magic = r.bytes(4);
    if (std::memcmp(magic.data(), kIndexMagic, 4) != 0) throw Error("not an index cache: " + path);
    const uint32_t version = r.u32();
    if (version != kIndexVersion) {
        throw Error("unsupported index cache version " + std::to_string(version));
    }
    SuffixIndex idx;
    idx.digest_ = r.bytes(r.u64());
    idx.buffer_ = r.bytes(r.u64());
    const uint64_t n = r.u64();
    idx.sa_.reserve(n);
    for (uint64_t i = 0; i < n; ++i) idx.sa_.push_back(r.u32());
    const uint64_t ndocs = r.u64();
    for (uint64_t i = 0; i < ndocs; ++i) {
        idx.doc_starts_.push_back(r.u64());
        idx.doc_ids_.push_back(r.bytes(r.u64()));
    }
    return idx;
}

} // namespace leakaudit
