#include "popsim/dsl.hpp"

#include "popsim/error.hpp"

#include <cctype>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

namespace popsim {

namespace {

enum class TokenKind { Word, Equals, Arrow };

struct Token {
    TokenKind kind;
    std::string text;
    std::size_t column;
};

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

std::vector<Token> tokenize(std::string_view line, std::size_t line_no) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (c == '#')
            break;
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '=') {
            tokens.push_back({TokenKind::Equals, "=", i + 1});
            ++i;
        } else if (c == '-' && i + 1 < line.size() && line[i + 1] == '>') {
            tokens.push_back({TokenKind::Arrow, "->", i + 1});
            i += 2;
        } else if (is_word_char(c)) {
            std::size_t start = i;
            while (i < line.size() && is_word_char(line[i]))
                ++i;
            tokens.push_back({TokenKind::Word, std::string(line.substr(start, i - start)), start + 1});
        } else {
            throw ParseError(line_no, i + 1, std::string("unexpected character '") + c + "'");
        }
    }
    return tokens;
}

const std::set<std::string, std::less<>> kKeywords = {"protocol", "param", "states", "input", "output", "sym"};

struct PendingRule {
    std::size_t line;
    std::size_t column;
    std::string a, b, c, d;
    bool symmetric;
};

class Parser {
public:
    ProtocolSpec parse(std::string_view text) {
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            auto end = text.find('\n', pos);
            if (end == std::string_view::npos)
                end = text.size();
            ++line_no;
            auto line = text.substr(pos, end - pos);
            if (!line.empty() && line.back() == '\r')
                line.remove_suffix(1);
            parse_line(tokenize(line, line_no), line_no, line.size());
            pos = end + 1;
        }
        last_line_ = line_no;
        return finish();
    }

private:
    void parse_line(const std::vector<Token>& tokens, std::size_t line, std::size_t line_len) {
        if (tokens.empty())
            return;
        const auto& head = tokens.front();
        if (head.kind != TokenKind::Word)
            throw ParseError(line, head.column, "expected a directive or a rule");
        if (head.text == "protocol") {
            if (tokens.size() != 2 || tokens[1].kind != TokenKind::Word)
                throw ParseError(line, head.column, "expected 'protocol <name>'");
            metadata_.name = tokens[1].text;
        } else if (head.text == "param") {
            if (tokens.size() != 4 || tokens[1].kind != TokenKind::Word || tokens[2].kind != TokenKind::Equals ||
                tokens[3].kind != TokenKind::Word)
                throw ParseError(line, head.column, "expected 'param <key> = <value>'");
            metadata_.params[tokens[1].text] = tokens[3].text;
        } else if (head.text == "states") {
            if (states_)
                throw ParseError(line, head.column, "'states' declared twice");
            if (tokens.size() < 2)
                throw ParseError(line, line_len + 1, "'states' needs at least one name");
            std::vector<std::string> names;
            std::set<std::string> seen;
            for (std::size_t i = 1; i < tokens.size(); ++i) {
                const auto& t = tokens[i];
                if (t.kind != TokenKind::Word)
                    throw ParseError(line, t.column, "expected a state name");
                if (kKeywords.contains(t.text))
                    throw ParseError(line, t.column, "'" + t.text + "' is reserved");
                if (!seen.insert(t.text).second)
                    throw ParseError(line, t.column, "duplicate state '" + t.text + "'");
                names.push_back(t.text);
            }
            states_ = std::move(names);
            states_line_ = line;
        } else if (head.text == "input" || head.text == "output") {
            require_states(line, head.column);
            parse_assignments(tokens, line, line_len, head.text == "output");
        } else {
            require_states(line, head.column);
            parse_rule(tokens, line, line_len);
        }
    }

    void require_states(std::size_t line, std::size_t column) const {
        if (!states_)
            throw ParseError(line, column, "'states' must be declared first");
    }

    bool is_state(const std::string& name) const {
        for (const auto& s : *states_)
            if (s == name)
                return true;
        return false;
    }

    void parse_assignments(const std::vector<Token>& tokens, std::size_t line, std::size_t line_len, bool output) {
        if (tokens.size() < 4 || (tokens.size() - 1) % 3 != 0)
            throw ParseError(line, tokens.size() < 2 ? line_len + 1 : tokens[1].column,
                             output ? "expected 'output <state> = 0|1'" : "expected 'input <symbol> = <state>'");
        for (std::size_t i = 1; i < tokens.size(); i += 3) {
            const auto& lhs = tokens[i];
            const auto& eq = tokens[i + 1];
            const auto& rhs = tokens[i + 2];
            if (lhs.kind != TokenKind::Word)
                throw ParseError(line, lhs.column, "expected a name");
            if (eq.kind != TokenKind::Equals)
                throw ParseError(line, eq.column, "expected '='");
            if (rhs.kind != TokenKind::Word)
                throw ParseError(line, rhs.column, "expected a value");
            if (output) {
                if (!is_state(lhs.text))
                    throw ParseError(line, lhs.column, "output for unknown state '" + lhs.text + "'");
                if (rhs.text != "0" && rhs.text != "1")
                    throw ParseError(line, rhs.column, "output must be 0 or 1");
                if (!outputs_.emplace(lhs.text, rhs.text == "1" ? 1 : 0).second)
                    throw ParseError(line, lhs.column, "output for '" + lhs.text + "' given twice");
            } else {
                if (!is_state(rhs.text))
                    throw ParseError(line, rhs.column, "input maps to unknown state '" + rhs.text + "'");
                for (const auto& [sym, _] : inputs_)
                    if (sym == lhs.text)
                        throw ParseError(line, lhs.column, "input symbol '" + lhs.text + "' given twice");
                inputs_.emplace_back(lhs.text, rhs.text);
            }
        }
    }

    void parse_rule(const std::vector<Token>& tokens, std::size_t line, std::size_t line_len) {
        std::size_t i = 0;
        bool symmetric = false;
        if (tokens[0].text == "sym") {
            symmetric = true;
            i = 1;
        }
        auto expect_state = [&](std::size_t at) -> const std::string& {
            if (at >= tokens.size())
                throw ParseError(line, line_len + 1, "incomplete rule, expected '<A> <B> -> <C> <D>'");
            const auto& t = tokens[at];
            if (t.kind != TokenKind::Word)
                throw ParseError(line, t.column, "expected a state name");
            if (!is_state(t.text))
                throw ParseError(line, t.column, "unknown state '" + t.text + "'");
            return t.text;
        };
        PendingRule rule{line, tokens[i].column, expect_state(i), expect_state(i + 1), {}, {}, symmetric};
        if (i + 2 >= tokens.size() || tokens[i + 2].kind != TokenKind::Arrow)
            throw ParseError(line, i + 2 < tokens.size() ? tokens[i + 2].column : line_len + 1, "expected '->'");
        rule.c = expect_state(i + 3);
        rule.d = expect_state(i + 4);
        if (i + 5 != tokens.size())
            throw ParseError(line, tokens[i + 5].column, "unexpected token '" + tokens[i + 5].text + "'");
        rules_.push_back(std::move(rule));
    }

    ProtocolSpec finish() {
        if (!states_)
            throw ParseError(last_line_, 1, "missing 'states' declaration");
        ProtocolSpec spec(*states_, metadata_);
        for (const auto& name : *states_) {
            auto it = outputs_.find(name);
            if (it == outputs_.end())
                throw ParseError(states_line_, 1, "no output given for state '" + name + "'");
            spec.set_output(spec.at(name), it->second);
        }
        for (const auto& [sym, state] : inputs_)
            spec.add_input(sym, spec.at(state));

        std::vector<bool> assigned(spec.num_states() * spec.num_states(), false);
        auto install = [&](const PendingRule& r, StateId a, StateId b, StateId c, StateId d) {
            auto slot = a.index * spec.num_states() + b.index;
            if (assigned[slot])
                throw ParseError(r.line, r.column,
                                 "duplicate rule for ordered pair (" + spec.name(a) + ", " + spec.name(b) + ")");
            assigned[slot] = true;
            spec.set_delta(a, b, {c, d});
        };
        for (const auto& r : rules_) {
            auto a = spec.at(r.a), b = spec.at(r.b), c = spec.at(r.c), d = spec.at(r.d);
            install(r, a, b, c, d);
            // The mirror of a same-state pair is the pair itself.
            if (r.symmetric && a != b)
                install(r, b, a, d, c);
        }
        return spec;
    }

    std::optional<std::vector<std::string>> states_;
    std::size_t states_line_ = 0;
    std::size_t last_line_ = 0;
    ProtocolMetadata metadata_;
    std::map<std::string, int> outputs_;
    std::vector<std::pair<std::string, std::string>> inputs_;
    std::vector<PendingRule> rules_;
};

} // namespace

ProtocolSpec parse_protocol(std::string_view text) {
    return Parser{}.parse(text);
}

std::string emit_protocol(const ProtocolSpec& protocol) {
    std::ostringstream out;
    const auto& meta = protocol.metadata();
    if (!meta.name.empty())
        out << "protocol " << meta.name << '\n';
    for (const auto& [key, value] : meta.params)
        out << "param " << key << " = " << value << '\n';
    out << "states";
    for (const auto& name : protocol.state_names())
        out << ' ' << name;
    out << '\n';
    for (const auto& [sym, s] : protocol.inputs())
        out << "input " << sym << " = " << protocol.name(s) << '\n';
    for (std::size_t s = 0; s < protocol.num_states(); ++s)
        out << "output " << protocol.name(protocol.state(s)) << " = " << protocol.output(protocol.state(s)) << '\n';

    const auto q = protocol.num_states();
    std::vector<bool> done(q * q, false);
    for (std::size_t ai = 0; ai < q; ++ai) {
        for (std::size_t bi = 0; bi < q; ++bi) {
            auto a = protocol.state(ai), b = protocol.state(bi);
            if (done[ai * q + bi] || protocol.is_identity(a, b))
                continue;
            auto [c, d] = protocol.delta(a, b);
            bool mirrored = ai != bi && protocol.delta(b, a) == StatePair{d, c};
            if (mirrored)
                done[bi * q + ai] = true;
            out << (mirrored ? "sym " : "") << protocol.name(a) << ' ' << protocol.name(b) << " -> "
                << protocol.name(c) << ' ' << protocol.name(d) << '\n';
        }
    }
    return out.str();
}

} // namespace popsim
