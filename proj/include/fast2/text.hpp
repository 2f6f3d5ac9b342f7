#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace fast2 {

/// English stopword list compiled in from data/stopwords.txt.
const std::unordered_set<std::string>& stopwords();

/// Lowercase, split on anything that is not an ASCII letter or digit, drop
/// tokens shorter than two characters and stopwords. Bytes >= 0x80 count as
/// word characters so multi-byte UTF-8 sequences stay inside their token.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace fast2
