#include "fast2/text.hpp"

namespace fast2 {

namespace detail {
extern const std::string_view kStopwordText;
}

const std::unordered_set<std::string>& stopwords()
{
    static const std::unordered_set<std::string> words = [] {
        std::unordered_set<std::string> out;
        std::string_view rest = detail::kStopwordText;
        while (!rest.empty()) {
            auto nl = rest.find('\n');
            auto line = rest.substr(0, nl);
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
                line.remove_suffix(1);
            }
            if (!line.empty()) {
                out.emplace(line);
            }
            if (nl == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(nl + 1);
        }
        return out;
    }();
    return words;
}

namespace {

bool is_word_byte(unsigned char c)
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text)
{
    const auto& stop = stopwords();
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (current.size() >= 2 && !stop.contains(current)) {
            tokens.push_back(current);
        }
        current.clear();
    };
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (is_word_byte(c)) {
            current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

}  // namespace fast2
