#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mrkl::numword {

/// Exclusive upper bound for numbers handled here (nine decimal digits).
inline constexpr std::uint64_t kLimit = 1'000'000'000;

enum class Rendering { Digits, Words };

std::string_view to_string(Rendering r);
Rendering rendering_from_string(std::string_view s);

class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

class ParseError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Multi-word phrases that denote a number outright ("a dozen").
/// Keys are lowercase, single-space separated.
struct Lexicon {
    std::map<std::string, std::uint64_t, std::less<>> synonyms;
};

const Lexicon& default_lexicon();

/// A number recognised in free text. `offset` is the byte offset of
/// `surface` in the source.
struct NumberToken {
    std::uint64_t value = 0;
    std::string surface;
    Rendering rendering = Rendering::Digits;
    std::size_t offset = 0;

    friend bool operator==(const NumberToken&, const NumberToken&) = default;
};

/// American short scale, lowercase, no hyphens, no "and":
/// 123 -> "one hundred twenty three".
std::string int_to_words(std::uint64_t n);

/// Inverse of int_to_words. Case-insensitive; hyphens count as spaces.
/// Throws ParseError on unknown words or malformed sequences.
std::uint64_t words_to_int(std::string_view s, const Lexicon& lexicon = default_lexicon());

struct LexOptions {
    bool words_enabled = true;
    const Lexicon* lexicon = nullptr;  // null selects default_lexicon()
};

/// Maximal, non-overlapping number spans left to right. Word numbers are
/// matched greedily (longest phrase wins).
std::vector<NumberToken> lex_numbers(std::string_view text, const LexOptions& options = {});

// Raw scanning shared with the extractor's normalizer.
namespace detail {

enum class RawKind { Word, Digits, Symbol, Other };

struct RawToken {
    RawKind kind;
    std::string text;  // lowercased, apostrophes removed for words
    std::size_t begin;
    std::size_t end;
};

std::vector<RawToken> scan(std::string_view text);

/// A lexed token stream: either a number or a raw token, in source order.
struct LexedItem {
    bool is_number = false;
    NumberToken number;
    RawToken raw;
};

std::vector<LexedItem> lex(std::string_view text, const LexOptions& options);

}  // namespace detail

}  // namespace mrkl::numword
