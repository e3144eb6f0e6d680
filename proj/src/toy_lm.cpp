#include "leakaudit/toy_lm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include "leakaudit/digest.hpp"
#include "leakaudit/errors.hpp"
#include "leakaudit/io.hpp"

namespace leakaudit::toylm {

namespace {

constexpr char kMagic[4] = {'L', 'A', 'T', 'L'};
constexpr uint32_t kCheckpointVersion = 1;

void append_u16_le(std::string& out, uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void append_u32_le(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void append_u64_le(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

struct Reader {
    const std::string& buf;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > buf.size()) throw Error("truncated toy-lm checkpoint");
    }
    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint8_t>(buf[pos]) | (static_cast<uint16_t>(static_cast<uint8_t>(buf[pos + 1])) << 8);
        pos += 2;
        return v;
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

std::vector<Symbol> to_symbols(std::string_view bytes) {
    std::vector<Symbol> out;
    out.reserve(bytes.size());
    for (unsigned char b : bytes) out.push_back(b);
    return out;
}

std::string NGramModel::context_key(std::span<const Symbol> context) const {
    const size_t ctx_len = static_cast<size_t>(order_ - 1);
    std::string key;
    key.reserve(ctx_len * 2);
    // Left-pad with BOS when the supplied context is shorter than order-1.
    const size_t pad = context.size() >= ctx_len ? 0 : ctx_len - context.size();
    for (size_t i = 0; i < pad; ++i) append_u16_le(key, kBos);
    const size_t start = context.size() > ctx_len ? context.size() - ctx_len : 0;
    for (size_t i = start; i < context.size(); ++i) append_u16_le(key, context[i]);
    return key;
}

NGramModel NGramModel::train(const std::vector<std::string>& documents, int order, double alpha) {
    if (documents.empty()) throw Error("toy-lm train: empty corpus");
    if (order < 1) throw Error("toy-lm train: order must be >= 1");
    if (!(alpha > 0.0)) throw Error("toy-lm train: alpha must be > 0");

    NGramModel m;
    m.order_ = order;
    m.alpha_ = alpha;

    const size_t ctx_len = static_cast<size_t>(order - 1);
    std::vector<Symbol> ctx;
    for (const auto& doc : documents) {
        ctx.assign(ctx_len, kBos);
        std::string key;
        for (unsigned char b : doc) {
            key.clear();
            for (Symbol s : ctx) append_u16_le(key, s);
            auto& slot = m.counts_[key];
            slot.total += 1;
            auto it = std::find_if(slot.by_symbol.begin(), slot.by_symbol.end(),
                                   [&](const auto& p) { return p.first == b; });
            if (it == slot.by_symbol.end()) {
                slot.by_symbol.emplace_back(b, 1);
            } else {
                it->second += 1;
            }
            if (ctx_len > 0) {
                ctx.erase(ctx.begin());
                ctx.push_back(b);
            }
        }
    }
    for (auto& [key, slot] : m.counts_) {
        std::sort(slot.by_symbol.begin(), slot.by_symbol.end());
    }
    return m;
}

double NGramModel::logprob(std::span<const Symbol> context, Symbol next) const {
    const double denom_smooth = alpha_ * kVocabSize;
    const auto it = counts_.find(context_key(context));
    if (it == counts_.end()) {
        return std::log(1.0 / kVocabSize);
    }
    uint64_t count = 0;
    const auto& v = it->second.by_symbol;
    const auto pos = std::lower_bound(v.begin(), v.end(), next,
                                      [](const auto& p, Symbol s) { return p.first < s; });
    if (pos != v.end() && pos->first == next) count = pos->second;
    return std::log((static_cast<double>(count) + alpha_) /
                    (static_cast<double>(it->second.total) + denom_smooth));
}

Symbol NGramModel::sample_next(std::span<const Symbol> context, int top_k, double temperature,
                               Xoshiro256ss& rng) const {
    if (top_k < 1) throw Error("toy-lm sample: top_k must be >= 1");
    if (temperature < 0.0) throw Error("toy-lm sample: temperature must be >= 0");
    const int k = std::min(top_k, kVocabSize);

    // Candidate order: count descending, symbol ascending. Counts are
    // integers, so the ordering is exact.
    const auto it = counts_.find(context_key(context));
    std::vector<std::pair<uint64_t, Symbol>> top;
    top.reserve(static_cast<size_t>(k));
    if (it != counts_.end()) {
        std::vector<std::pair<uint64_t, Symbol>> seen;
        seen.reserve(it->second.by_symbol.size());
        for (const auto& [sym, cnt] : it->second.by_symbol) seen.emplace_back(cnt, sym);
        std::sort(seen.begin(), seen.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        for (const auto& e : seen) {
            if (static_cast<int>(top.size()) >= k) break;
            top.push_back(e);
        }
    }
    if (static_cast<int>(top.size()) < k) {
        // Fill with zero-count symbols in ascending symbol order.
        std::vector<bool> used(kVocabSize, false);
        for (const auto& e : top) used[e.second] = true;
        for (int s = 0; s < kVocabSize && static_cast<int>(top.size()) < k; ++s) {
            if (!used[s]) top.emplace_back(0, static_cast<Symbol>(s));
        }
    }

    if (temperature == 0.0 || top.size() == 1) return top.front().second;

    std::vector<double> weights(top.size());
    for (size_t i = 0; i < top.size(); ++i) {
        const double w = static_cast<double>(top[i].first) + alpha_;
        weights[i] = temperature == 1.0 ? w : std::pow(w, 1.0 / temperature);
    }
    double total = 0.0;
    for (double w : weights) total += w;
    const double target = rng.next_double() * total;
    double acc = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (target < acc) return top[i].second;
    }
    return top.back().second;
}

bool NGramModel::operator==(const NGramModel& other) const {
    if (order_ != other.order_ || alpha_ != other.alpha_) return false;
    if (counts_.size() != other.counts_.size()) return false;
    for (const auto& [key, slot] : counts_) {
        const auto it = other.counts_.find(key);
        if (it == other.counts_.end()) return false;
        if (slot.total != it->second.total || slot.by_symbol != it->second.by_symbol) return false;
    }
    return true;
}

std::string NGramModel::serialize_counts() const {
    // Contexts in lexicographic key order so equal models serialize to equal
    // bytes.
    std::vector<const std::string*> keys;
    keys.reserve(counts_.size());
    for (const auto& [key, slot] : counts_) keys.push_back(&key);
    std::sort(keys.begin(), keys.end(), [](const auto* a, const auto* b) { return *a < *b; });

    std::string out;
    out.append(kMagic, sizeof(kMagic));
    append_u32_le(out, kCheckpointVersion);
    append_u32_le(out, static_cast<uint32_t>(order_));
    uint64_t alpha_bits;
    static_assert(sizeof(alpha_bits) == sizeof(alpha_));
    std::memcpy(&alpha_bits, &alpha_, sizeof(alpha_bits));
    append_u64_le(out, alpha_bits);
    append_u64_le(out, keys.size());
    for (const auto* key : keys) {
        out.append(*key);
        const auto& slot = counts_.at(*key);
        append_u32_le(out, static_cast<uint32_t>(slot.by_symbol.size()));
        for (const auto& [sym, cnt] : slot.by_symbol) {
            append_u16_le(out, sym);
            append_u32_le(out, cnt);
        }
    }
    return out;
}

std::string NGramModel::canonical_digest() const {
    return sha256_hex(serialize_counts());
}

std::string NGramModel::model_id() const {
    return "toylm-" + canonical_digest().substr(0, 12);
}

void NGramModel::save(const std::string& path, const std::string& corpus_digest) const {
    std::string body = serialize_counts();
    std::string out;
    append_u32_le(out, static_cast<uint32_t>(corpus_digest.size()));
    out += corpus_digest;
    out += body;
    write_file(path, out);
}

LoadedModel NGramModel::load(const std::string& path) {
    const std::string buf = read_file(path);
    Reader r{buf};
    const uint32_t digest_len = r.u32();
    if (digest_len > 128) throw Error("corrupt toy-lm checkpoint: " + path);
    std::string corpus_digest = r.bytes(digest_len);
    const std::string magic = r.bytes(4);
    if (std::memcmp(magic.data(), kMagic, 4) != 0) throw Error("not a toy-lm checkpoint: " + path);
    const uint32_t version = r.u32();
    if (version != kCheckpointVersion) {
        throw Error("unsupported toy-lm checkpoint version " + std::to_string(version));
    }
    NGramModel m;
    m.order_ = static_cast<int>(r.u32());
    if (m.order_ < 1) throw Error("corrupt toy-lm checkpoint: bad order");
    const uint64_t alpha_bits = r.u64();
    std::memcpy(&m.alpha_, &alpha_bits, sizeof(m.alpha_));
    const uint64_t n_contexts = r.u64();
    const size_t key_bytes = static_cast<size_t>(m.order_ - 1) * 2;
    for (uint64_t i = 0; i < n_contexts; ++i) {
        std::string key = r.bytes(key_bytes);
        const uint32_t n_entries = r.u32();
        ContextCounts slot;
        slot.by_symbol.reserve(n_entries);
        for (uint32_t e = 0; e < n_entries; ++e) {
            const Symbol sym = r.u16();
            const uint32_t cnt = r.u32();
            slot.by_symbol.emplace_back(sym, cnt);
            slot.total += cnt;
        }
        m.counts_.emplace(std::move(key), std::move(slot));
    }
    return {std::move(m), std::move(corpus_digest)};
}

} // namespace leakaudit::toylm
