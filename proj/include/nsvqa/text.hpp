#pragma once

#include <string>
#include <string_view>

namespace nsvqa {

/// Trim surrounding whitespace and lowercase. Inner whitespace is kept, so
/// multi-word names such as "tennis racket" stay a single token.
std::string normalize_token(std::string_view raw);

}  // namespace nsvqa
