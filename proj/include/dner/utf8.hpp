#pragma once

#include <string>
#include <string_view>

namespace dner {

// UTF-8 <-> code point helpers. Decoding rejects overlong forms, surrogates
// and truncated sequences with a DataError.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(char32_t cp);
std::string encode_utf8(const std::u32string& s);

}  // namespace dner
