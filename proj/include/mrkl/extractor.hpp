#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mrkl/arithmetic.hpp"
#include "mrkl/line_channel.hpp"
#include "mrkl/numword.hpp"

namespace mrkl::extractor {

struct Token {
    enum class Kind { Word, Number, Plus, Minus, Times, Divide, LParen, RParen };

    Kind kind = Kind::Word;
    std::string text;        // word text or number surface
    std::uint64_t value = 0; // Number only
    numword::Rendering rendering = numword::Rendering::Digits;

    /// "how", "NUM(58)", "MINUS", ...
    std::string debug_string() const;
};

struct NormalizeOptions {
    bool words_enabled = true;  // recognise word-form numbers
    const numword::Lexicon* lexicon = nullptr;
};

/// Lowercases, drops punctuation, keeps arithmetic symbols, and lexes
/// number spans: "3-1=?" -> [NUM(3), MINUS, NUM(1)].
std::vector<Token> normalize(std::string_view text, const NormalizeOptions& options = {});

struct Extraction {
    arith::Expr expr;
    double confidence = 1.0;
    std::optional<std::string> matched_template;
};

enum class NoParseReason { UnknownVocabulary, NoTemplateMatch, Ambiguous };

std::string_view to_string(NoParseReason r);
NoParseReason no_parse_reason_from_string(std::string_view s);

struct NoParse {
    NoParseReason reason;
    std::string detail;
};

using ExtractResult = std::variant<Extraction, NoParse>;

/// Anything that can turn an utterance into a calculator expression.
/// Implementations may throw TransportError.
class ExtractorBackend {
public:
    virtual ~ExtractorBackend() = default;
    virtual std::string name() const = 0;
    virtual ExtractResult extract(std::string_view text) const = 0;
};

struct ReferenceOptions {
    bool words_enabled = true;
    const numword::Lexicon* lexicon = nullptr;
    std::string name = "reference";
};

/// Deterministic grammar over the normalised token stream. Enumerates every
/// parse and refuses when two distinct trees survive.
class ReferenceExtractor : public ExtractorBackend {
public:
    explicit ReferenceExtractor(ReferenceOptions options = {});

    std::string name() const override { return options_.name; }
    ExtractResult extract(std::string_view text) const override;

    /// Every word the grammar knows.
    static const std::vector<std::string>& vocabulary();

private:
    ReferenceOptions options_;
};

/// Backend on the other end of a line channel. Request: the utterance on
/// one line. Response: a calculator-call string or "NOPARSE <reason>".
class ChannelBackend : public ExtractorBackend {
public:
    ChannelBackend(std::string name, std::unique_ptr<LineChannel> channel);

    std::string name() const override { return name_; }
    ExtractResult extract(std::string_view text) const override;

private:
    std::string name_;
    std::unique_ptr<LineChannel> channel_;
};

/// Parses one protocol response line.
ExtractResult parse_backend_response(std::string_view line);

/// Formats an extraction result as a protocol response line.
std::string format_backend_response(const ExtractResult& result);

/// "reference", "words-disabled" or "exec:<shell command>".
std::unique_ptr<ExtractorBackend> make_backend(std::string_view spec);

}  // namespace mrkl::extractor
