#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

// Byte <-> text convention used by the toy LM server: each byte b maps to the
// Unicode code point U+00b, so JSON strings stay valid UTF-8 while the model
// works on raw bytes. For ASCII data the mapping is the identity.

namespace leakaudit {

// Encodes a byte sequence as UTF-8 text of code points U+0000..U+00FF.
inline std::string bytes_to_text(std::string_view bytes) {
    std::string out;
    out.reserve(bytes.size());
    for (unsigned char b : bytes) {
        if (b < 0x80) {
            out.push_back(static_cast<char>(b));
        } else {
            out.push_back(static_cast<char>(0xC0 | (b >> 6)));
            out.push_back(static_cast<char>(0x80 | (b & 0x3F)));
        }
    }
    return out;
}

// Decodes UTF-8 text back to bytes. Returns nullopt if the text is not valid
// UTF-8 or contains a code point above U+00FF (not representable as a byte).
inline std::optional<std::string> text_to_bytes(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (c < 0x80) {
            out.push_back(static_cast<char>(c));
            i += 1;
        } else if ((c & 0xE0) == 0xC0) {
            if (i + 1 >= text.size()) return std::nullopt;
            unsigned char c2 = static_cast<unsigned char>(text[i + 1]);
            if ((c2 & 0xC0) != 0x80) return std::nullopt;
            uint32_t cp = (static_cast<uint32_t>(c & 0x1F) << 6) | (c2 & 0x3F);
            if (cp < 0x80 || cp > 0xFF) return std::nullopt;
            out.push_back(static_cast<char>(cp));
            i += 2;
        } else {
            // 3- and 4-byte sequences encode code points beyond U+00FF.
            return std::nullopt;
        }
    }
    return out;
}

} // namespace leakaudit
