#include "mrkl/numword.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>

namespace mrkl::numword {

namespace {

constexpr std::array<std::string_view, 20> kSmall = {
    "zero",    "one",     "two",       "three",    "four",     "five",    "six",
    "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen"};

constexpr std::array<std::string_view, 10> kTens = {
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"};

// Longest phrase int_to_words can produce is 14 words; synonyms are short.
constexpr std::size_t kMaxPhraseWords = 16;

std::optional<unsigned> small_value(std::string_view w) {
    for (unsigned i = 0; i < kSmall.size(); ++i) {
        if (kSmall[i] == w) return i;
    }
    return std::nullopt;
}

std::optional<unsigned> tens_value(std::string_view w) {
    for (unsigned i = 2; i < kTens.size(); ++i) {
        if (kTens[i] == w) return i * 10;
    }
    return std::nullopt;
}

bool is_number_word(std::string_view w) {
    return small_value(w) || tens_value(w) || w == "hundred" || w == "thousand" ||
           w == "million";
}

void append_group(std::string& out, unsigned g) {
    auto put = [&out](std::string_view w) {
        if (!out.empty()) out += ' ';
        out += w;
    };
    if (g >= 100) {
        put(kSmall[g / 100]);
        put("hundred");
        g %= 100;
    }
    if (g >= 20) {
        put(kTens[g / 10]);
        if (g % 10 != 0) put(kSmall[g % 10]);
    } else if (g > 0) {
        put(kSmall[g]);
    }
}

// Parses one group below a thousand starting at words[i]; advances i.
std::optional<unsigned> parse_group(const std::vector<std::string_view>& words, std::size_t& i) {
    unsigned value = 0;
    bool consumed = false;
    if (i + 1 < words.size() && words[i + 1] == "hundred") {
        auto u = small_value(words[i]);
        if (!u || *u == 0 || *u > 9) return std::nullopt;
        value = *u * 100;
        i += 2;
        consumed = true;
    }
    if (i < words.size()) {
        if (auto t = tens_value(words[i])) {
            value += *t;
            ++i;
            consumed = true;
            if (i < words.size()) {
                if (auto u = small_value(words[i]); u && *u >= 1 && *u <= 9) {
                    value += *u;
                    ++i;
                }
            }
        } else if (auto s = small_value(words[i]); s && *s >= 1) {
            value += *s;
            ++i;
            consumed = true;
        }
    }
    if (!consumed) return std::nullopt;
    return value;
}

std::string join(const std::vector<std::string_view>& words) {
    std::string out;
    for (auto w : words) {
        if (!out.empty()) out += ' ';
        out += w;
    }
    return out;
}

std::optional<std::uint64_t> parse_words(const std::vector<std::string_view>& words,
                                         const Lexicon& lexicon, std::string* error) {
    auto fail = [error](std::string msg) -> std::optional<std::uint64_t> {
        if (error) *error = std::move(msg);
        return std::nullopt;
    };
    if (words.empty()) return fail("empty number phrase");
    if (auto it = lexicon.synonyms.find(join(words)); it != lexicon.synonyms.end()) {
        return it->second;
    }
    for (auto w : words) {
        if (!is_number_word(w)) return fail("unknown number word '" + std::string(w) + "'");
    }
    if (words.size() == 1 && words[0] == "zero") return 0;

    std::uint64_t total = 0;
    std::uint64_t last_scale = kLimit;
    std::size_t i = 0;
    while (i < words.size()) {
        auto g = parse_group(words, i);
        if (!g) return fail("malformed number phrase '" + join(words) + "'");
        std::uint64_t scale = 1;
        if (i < words.size() && words[i] == "million") {
            scale = 1'000'000;
        } else if (i < words.size() && words[i] == "thousand") {
            scale = 1'000;
        }
        if (scale >= last_scale) return fail("misordered scale in '" + join(words) + "'");
        total += *g * scale;
        last_scale = scale;
        if (scale == 1) {
            if (i != words.size()) return fail("malformed number phrase '" + join(words) + "'");
            break;
        }
        ++i;
    }
    return total;
}

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Right single quotation mark, U+2019.
bool curly_apostrophe_at(std::string_view s, std::size_t i) {
    return s.substr(i, 3) == "\xE2\x80\x99";
}

bool only_joiners(std::string_view gap) {
    return std::all_of(gap.begin(), gap.end(), [](char c) { return is_space(c) || c == '-'; });
}

}  // namespace

std::string_view to_string(Rendering r) { return r == Rendering::Digits ? "digits" : "words"; }

Rendering rendering_from_string(std::string_view s) {
    if (s == "digits") return Rendering::Digits;
    if (s == "words") return Rendering::Words;
    throw std::invalid_argument("unknown rendering '" + std::string(s) + "'");
}

const Lexicon& default_lexicon() {
    static const Lexicon lexicon{{{"a dozen", 12}}};
    return lexicon;
}

std::string int_to_words(std::uint64_t n) {
    if (n >= kLimit) throw RangeError("int_to_words: " + std::to_string(n) + " is out of range");
    if (n == 0) return "zero";
    std::string out;
    if (auto m = static_cast<unsigned>(n / 1'000'000); m > 0) {
        append_group(out, m);
        out += " million";
    }
    if (auto t = static_cast<unsigned>(n / 1'000 % 1'000); t > 0) {
        append_group(out, t);
        out += " thousand";
    }
    append_group(out, static_cast<unsigned>(n % 1'000));
    return out;
}

std::uint64_t words_to_int(std::string_view s, const Lexicon& lexicon) {
    std::string lowered;
    lowered.reserve(s.size());
    for (char c : s) lowered += c == '-' ? ' ' : lower(c);
    std::vector<std::string_view> words;
    std::string_view rest = lowered;
    while (!rest.empty()) {
        auto b = rest.find_first_not_of(" \t\n\r");
        if (b == std::string_view::npos) break;
        rest.remove_prefix(b);
        auto e = rest.find_first_of(" \t\n\r");
        words.push_back(rest.substr(0, e));
        rest.remove_prefix(e == std::string_view::npos ? rest.size() : e);
    }
    std::string error;
    auto value = parse_words(words, lexicon, &error);
    if (!value) throw ParseError(error);
    return *value;
}

namespace detail {

std::vector<RawToken> scan(std::string_view text) {
    std::vector<RawToken> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (is_space(c)) {
            ++i;
        } else if (is_alpha(c)) {
            std::size_t b = i;
            std::string word;
            while (i < n) {
                if (is_alpha(text[i])) {
                    word += lower(text[i]);
                    ++i;
                } else if (text[i] == '\'' && i + 1 < n && is_alpha(text[i + 1])) {
                    ++i;
                } else if (curly_apostrophe_at(text, i) && i + 3 < n && is_alpha(text[i + 3])) {
                    i += 3;
                } else {
                    break;
                }
            }
            out.push_back({RawKind::Word, std::move(word), b, i});
        } else if (is_digit(c)) {
            std::size_t b = i;
            while (i < n && is_digit(text[i])) ++i;
            out.push_back({RawKind::Digits, std::string(text.substr(b, i - b)), b, i});
        } else if (c == '-' && i > 0 && i + 1 < n && is_alpha(text[i - 1]) && is_alpha(text[i + 1])) {
            ++i;  // hyphenated words ("forty-eight")
        } else if (c == '+' || c == '-' || c == '*' || c == '/' || c == '(' || c == ')') {
            out.push_back({RawKind::Symbol, std::string(1, c), i, i + 1});
            ++i;
        } else if ((c == '.' || c == ',') && i > 0 && i + 1 < n && is_digit(text[i - 1]) &&
                   is_digit(text[i + 1])) {
            // Decimal points and digit grouping are not supported; keep them
            // visible so nothing downstream silently misreads the number.
            out.push_back({RawKind::Other, std::string(1, c), i, i + 1});
            ++i;
        } else if (std::string_view("?!.,;:\"'`=").find(c) != std::string_view::npos) {
            ++i;
        } else {
            std::size_t b = i;
            while (i < n && !is_space(text[i]) && !is_alpha(text[i]) && !is_digit(text[i]) &&
                   std::string_view("?!.,;:\"'`=+-*/()").find(text[i]) == std::string_view::npos) {
                ++i;
            }
            out.push_back({RawKind::Other, std::string(text.substr(b, i - b)), b, i});
        }
    }
    return out;
}

std::vector<LexedItem> lex(std::string_view text, const LexOptions& options) {
    const Lexicon& lexicon = options.lexicon ? *options.lexicon : default_lexicon();
    auto raw = scan(text);
    std::vector<LexedItem> out;
    std::size_t i = 0;
    while (i < raw.size()) {
        const RawToken& tok = raw[i];
        if (tok.kind == RawKind::Digits) {
            bool canonical = tok.text.size() <= 9 && (tok.text.size() == 1 || tok.text[0] != '0');
            if (canonical) {
                NumberToken num{std::stoull(tok.text), tok.text, Rendering::Digits, tok.begin};
                out.push_back({true, std::move(num), tok});
            } else {
                out.push_back({false, {}, tok});
            }
            ++i;
            continue;
        }
        if (tok.kind == RawKind::Word && options.words_enabled) {
            // Collect the run of adjacent words joined only by spaces/hyphens.
            std::size_t run_end = i + 1;
            while (run_end < raw.size() && run_end - i < kMaxPhraseWords &&
                   raw[run_end].kind == RawKind::Word &&
                   only_joiners(text.substr(raw[run_end - 1].end,
                                            raw[run_end].begin - raw[run_end - 1].end))) {
                ++run_end;
            }
            std::optional<std::pair<std::size_t, std::uint64_t>> best;
            std::vector<std::string_view> words;
            for (std::size_t j = i; j < run_end; ++j) words.push_back(raw[j].text);
            for (std::size_t len = words.size(); len >= 1; --len) {
                std::vector<std::string_view> phrase(words.begin(), words.begin() + len);
                if (auto v = parse_words(phrase, lexicon, nullptr)) {
                    best = {{len, *v}};
                    break;
                }
            }
            if (best && best->second < kLimit) {
                const auto& first = raw[i];
                const auto& last = raw[i + best->first - 1];
                NumberToken num{best->second,
                                std::string(text.substr(first.begin, last.end - first.begin)),
                                Rendering::Words, first.begin};
                out.push_back({true, std::move(num), first});
                i += best->first;
                continue;
            }
        }
        out.push_back({false, {}, tok});
        ++i;
    }
    return out;
}

}  // namespace detail

std::vector<NumberToken> lex_numbers(std::string_view text, const LexOptions& options) {
    std::vector<NumberToken> out;
    for (auto& item : detail::lex(text, options)) {
        if (item.is_number) out.push_back(std::move(item.number));
    }
    return out;
}

}  // namespace mrkl::numword
