#include "planex/parser.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace planex {

namespace {

const std::unordered_set<std::string> kReserved = {
    "discount", "props", "reward", "action", "aspect",
    "case",     "default", "init",  "goal"};

struct Token {
    enum class Type { LBrace, RBrace, Comma, Pipe, Bang, Arrow, Ident, Number, End };
    Type type;
    std::string text;
    SourceSpan span;
};

bool ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool number_start(char c) {
    return (c >= '0' && c <= '9') || c == '.' || c == '+' || c == '-';
}

class LineParser {
public:
    LineParser(ParseResult& result, const std::string& text)
        : result_(result), text_(text) {}

    void run() {
        std::size_t pos = 0;
        int line_no = 1;
        while (pos <= text_.size()) {
            std::size_t eol = text_.find('\n', pos);
            std::size_t end = (eol == std::string::npos) ? text_.size() : eol;
            parse_line(line_no, pos, end);
            if (eol == std::string::npos) break;
            pos = eol + 1;
            ++line_no;
        }
        finish();
        if (result_.errors.empty())
            result_.domain = with_implicit_noop(std::move(domain_));
    }

private:
    ParseResult& result_;
    const std::string& text_;
    DomainSpec domain_;

    std::vector<Token> toks_;
    std::size_t cur_ = 0;
    int line_ = 1;
    std::size_t line_start_ = 0;

    bool saw_discount_ = false;
    bool saw_props_ = false;
    bool saw_init_ = false;
    SourceSpan props_span_;
    // Index of the action/aspect currently open, -1 when none.
    int open_action_ = -1;
    int open_aspect_ = -1;
    SourceSpan open_action_span_;

    SourceSpan span_at(std::size_t begin, std::size_t end) const {
        return {line_, static_cast<int>(begin - line_start_) + 1, begin, end};
    }

    void error(ParseError::Kind kind, std::string msg, const SourceSpan& span) {
        result_.errors.push_back({kind, std::move(msg), span});
    }

    // --- tokenizing ---------------------------------------------------

    bool tokenize(std::size_t begin, std::size_t end) {
        toks_.clear();
        cur_ = 0;
        std::size_t i = begin;
        while (i < end) {
            char c = text_[i];
            if (c == ' ' || c == '\t' || c == '\r') { ++i; continue; }
            if (c == '#') break;
            std::size_t start = i;
            if (c == '{') { toks_.push_back({Token::Type::LBrace, "{", span_at(i, i + 1)}); ++i; }
            else if (c == '}') { toks_.push_back({Token::Type::RBrace, "}", span_at(i, i + 1)}); ++i; }
            else if (c == ',') { toks_.push_back({Token::Type::Comma, ",", span_at(i, i + 1)}); ++i; }
            else if (c == '|') { toks_.push_back({Token::Type::Pipe, "|", span_at(i, i + 1)}); ++i; }
            else if (c == '!') { toks_.push_back({Token::Type::Bang, "!", span_at(i, i + 1)}); ++i; }
            else if (c == '=') {
                if (i + 1 < end && text_[i + 1] == '>') {
                    toks_.push_back({Token::Type::Arrow, "=>", span_at(i, i + 2)});
                    i += 2;
                } else {
                    error(ParseError::Kind::Syntax, "expected '=>'", span_at(i, i + 1));
                    return false;
                }
            } else if (ident_start(c)) {
                while (i < end && ident_char(text_[i])) ++i;
                toks_.push_back({Token::Type::Ident, text_.substr(start, i - start),
                                 span_at(start, i)});
            } else if (number_start(c)) {
                ++i;
                while (i < end && (ident_char(text_[i]) || text_[i] == '.' ||
                                   text_[i] == '+' || text_[i] == '-'))
                    ++i;
                toks_.push_back({Token::Type::Number, text_.substr(start, i - start),
                                 span_at(start, i)});
            } else {
                error(ParseError::Kind::Syntax,
                      std::string("unexpected character '") + c + "'",
                      span_at(i, i + 1));
                return false;
            }
        }
        toks_.push_back({Token::Type::End, "", span_at(end, end)});
        return true;
    }

    const Token& peek() const { return toks_[cur_]; }
    const Token& next() { return toks_[cur_ < toks_.size() - 1 ? cur_++ : cur_]; }

    bool expect(Token::Type t, const char* what) {
        if (peek().type == t) { ++cur_; return true; }
        error(ParseError::Kind::Syntax,
              std::string("expected ") + what + ", got '" + peek().text + "'",
              peek().span);
        return false;
    }

    bool at_end() {
        if (peek().type == Token::Type::End) return true;
        error(ParseError::Kind::Syntax,
              "unexpected trailing input '" + peek().text + "'", peek().span);
        return false;
    }

    // --- grammar pieces ------------------------------------------------

    // Returns nullopt after recording errors. Keeps scanning the whole
    // condition so several unknown propositions in one line all get reported.
    std::optional<PartialAssignment> parse_condition() {
        if (!expect(Token::Type::LBrace, "'{'")) return std::nullopt;
        PartialAssignment pa;
        bool bad = false;
        if (peek().type != Token::Type::RBrace) {
            while (true) {
                bool positive = true;
                if (peek().type == Token::Type::Bang) { ++cur_; positive = false; }
                if (peek().type != Token::Type::Ident) {
                    error(ParseError::Kind::Syntax, "expected proposition name",
                          peek().span);
                    return std::nullopt;
                }
                Token t = next();
                auto idx = domain_.find_prop(t.text);
                if (!idx) {
                    error(ParseError::Kind::UnknownProposition,
                          "unknown proposition '" + t.text + "'", t.span);
                    bad = true;
                } else {
                    try {
                        pa.add(*idx, positive);
                    } catch (const std::invalid_argument&) {
                        error(ParseError::Kind::Syntax,
                              "proposition '" + t.text +
                                  "' appears with both polarities",
                              t.span);
                        bad = true;
                    }
                }
                if (peek().type == Token::Type::Comma) { ++cur_; continue; }
                break;
            }
        }
        if (!expect(Token::Type::RBrace, "'}'")) return std::nullopt;
        if (bad) return std::nullopt;
        return pa;
    }

    std::optional<double> parse_number(const char* what) {
        if (peek().type != Token::Type::Number) {
            error(ParseError::Kind::Syntax,
                  std::string("expected ") + what + ", got '" + peek().text + "'",
                  peek().span);
            return std::nullopt;
        }
        Token t = next();
        const char* begin = t.text.c_str();
        char* parse_end = nullptr;
        double v = std::strtod(begin, &parse_end);
        if (parse_end != begin + t.text.size()) {
            error(ParseError::Kind::Syntax,
                  "malformed number '" + t.text + "'", t.span);
            return std::nullopt;
        }
        return v;
    }

    // Probabilities are decimals in [0, 1] with at most 9 fractional digits.
    std::optional<double> parse_probability() {
        Token t = peek();
        auto v = parse_number("probability");
        if (!v) return std::nullopt;
        if (*v < 0.0 || *v > 1.0) {
            error(ParseError::Kind::BadProbability,
                  "probability " + t.text + " outside [0, 1]", t.span);
            return std::nullopt;
        }
        auto dot = t.text.find('.');
        if (dot != std::string::npos &&
            t.text.find_first_of("eE") == std::string::npos &&
            t.text.size() - dot - 1 > 9) {
            error(ParseError::Kind::BadProbability,
                  "probability '" + t.text + "' has more than 9 fractional digits",
                  t.span);
            return std::nullopt;
        }
        return v;
    }

    std::optional<ProbabilisticEffect> parse_branches() {
        ProbabilisticEffect eff;
        while (true) {
            auto cond = parse_condition();
            if (!cond) return std::nullopt;
            auto p = parse_probability();
            if (!p) return std::nullopt;
            eff.branches.push_back({*cond, *p});
            if (peek().type == Token::Type::Pipe) { ++cur_; continue; }
            break;
        }
        return eff;
    }

    // --- directives ----------------------------------------------------

    void parse_line(int line_no, std::size_t begin, std::size_t end) {
        line_ = line_no;
        line_start_ = begin;
        if (!tokenize(begin, end)) return;
        if (peek().type == Token::Type::End) return; // blank or comment

        if (peek().type != Token::Type::Ident) {
            error(ParseError::Kind::Syntax,
                  "expected a directive, got '" + peek().text + "'", peek().span);
            return;
        }
        Token head = next();
        const std::string& kw = head.text;

        if (kw == "discount") do_discount(head);
        else if (kw == "props") do_props(head);
        else if (kw == "reward") do_reward();
        else if (kw == "action") do_action(head);
        else if (kw == "aspect") do_aspect(head);
        else if (kw == "case") do_case(head);
        else if (kw == "init") do_init(head);
        else if (kw == "goal") do_goal();
        else
            error(ParseError::Kind::Syntax, "unknown directive '" + kw + "'",
                  head.span);
    }

    void do_discount(const Token& head) {
        if (saw_discount_) {
            error(ParseError::Kind::Syntax, "duplicate discount directive",
                  head.span);
            return;
        }
        auto v = parse_number("discount value");
        if (!v || !at_end()) return;
        saw_discount_ = true;
        domain_.discount = *v;
    }

    void do_props(const Token& head) {
        if (saw_props_) {
            error(ParseError::Kind::Syntax, "duplicate props directive", head.span);
            return;
        }
        saw_props_ = true;
        props_span_ = head.span;
        while (peek().type == Token::Type::Ident) {
            Token t = next();
            if (kReserved.count(t.text)) {
                error(ParseError::Kind::Syntax,
                      "'" + t.text + "' is a reserved word", t.span);
                continue;
            }
            if (domain_.find_prop(t.text)) {
                error(ParseError::Kind::DuplicateName,
                      "duplicate proposition '" + t.text + "'", t.span);
                continue;
            }
            if (domain_.prop_count() >= 64) {
                error(ParseError::Kind::Syntax,
                      "at most 64 propositions are supported", t.span);
                return;
            }
            domain_.propositions.push_back({t.text, domain_.prop_count()});
        }
        at_end();
    }

    void do_reward() {
        close_action();
        auto cond = parse_condition();
        if (!cond) return;
        auto v = parse_number("reward value");
        if (!v || !at_end()) return;
        domain_.rewards.push_back({*cond, *v});
    }

    void do_action(const Token& head) {
        close_action();
        if (peek().type != Token::Type::Ident) {
            error(ParseError::Kind::Syntax, "expected action name", peek().span);
            return;
        }
        Token t = next();
        if (!at_end()) return;
        if (kReserved.count(t.text)) {
            error(ParseError::Kind::Syntax, "'" + t.text + "' is a reserved word",
                  t.span);
            return;
        }
        if (domain_.find_action(t.text)) {
            error(ParseError::Kind::DuplicateName,
                  "duplicate action '" + t.text + "'", t.span);
            return;
        }
        domain_.actions.push_back({t.text, {}});
        open_action_ = static_cast<int>(domain_.actions.size()) - 1;
        open_aspect_ = -1;
        open_action_span_ = head.span;
    }

    void do_aspect(const Token& head) {
        if (open_action_ < 0) {
            error(ParseError::Kind::Syntax, "aspect outside an action", head.span);
            return;
        }
        if (!at_end()) return;
        close_aspect(head.span);
        domain_.actions[static_cast<std::size_t>(open_action_)].aspects.push_back({});
        open_aspect_ = static_cast<int>(
            domain_.actions[static_cast<std::size_t>(open_action_)].aspects.size()) - 1;
    }

    void do_case(const Token& head) {
        if (open_aspect_ < 0) {
            error(ParseError::Kind::Syntax, "case outside an aspect", head.span);
            return;
        }
        AspectCase c;
        if (peek().type == Token::Type::Ident && peek().text == "default") {
            ++cur_;
            c.is_default = true;
        } else {
            auto cond = parse_condition();
            if (!cond) return;
            c.discriminant = *cond;
        }
        if (!expect(Token::Type::Arrow, "'=>'")) return;
        auto eff = parse_branches();
        if (!eff || !at_end()) return;
        c.effect = *eff;
        domain_.actions[static_cast<std::size_t>(open_action_)]
            .aspects[static_cast<std::size_t>(open_aspect_)]
            .cases.push_back(std::move(c));
    }

    void do_init(const Token& head) {
        close_action();
        if (saw_init_) {
            error(ParseError::Kind::Syntax, "duplicate init directive", head.span);
            return;
        }
        auto cond = parse_condition();
        if (!cond || !at_end()) return;
        saw_init_ = true;
        std::uint64_t all = domain_.prop_count() >= 64
                                ? ~0ull
                                : (1ull << domain_.prop_count()) - 1;
        if (cond->mention_mask() != all) {
            error(ParseError::Kind::Syntax,
                  "init must assign every proposition", head.span);
            return;
        }
        domain_.initial = State{cond->positive_mask(),
                                static_cast<std::uint8_t>(domain_.prop_count())};
    }

    void do_goal() {
        close_action();
        auto cond = parse_condition();
        if (!cond || !at_end()) return;
        domain_.goals.push_back(*cond);
    }

    // --- structure closing ----------------------------------------------

    void close_aspect(const SourceSpan& at) {
        if (open_action_ < 0 || open_aspect_ < 0) return;
        const auto& aspect = domain_.actions[static_cast<std::size_t>(open_action_)]
                                 .aspects[static_cast<std::size_t>(open_aspect_)];
        if (aspect.cases.empty())
            error(ParseError::Kind::Syntax, "aspect has no cases", at);
        open_aspect_ = -1;
    }

    void close_action() {
        if (open_action_ < 0) return;
        close_aspect(open_action_span_);
        const auto& act = domain_.actions[static_cast<std::size_t>(open_action_)];
        if (act.aspects.empty())
            error(ParseError::Kind::Syntax,
                  "action '" + act.name + "' has no aspects", open_action_span_);
        open_action_ = -1;
    }

    void finish() {
        close_action();
        SourceSpan eof{line_, 1, text_.size(), text_.size()};
        if (!saw_props_)
            error(ParseError::Kind::Syntax, "missing props directive", eof);
        if (!saw_discount_)
            error(ParseError::Kind::Syntax, "missing discount directive", eof);
    }
};

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string condition_text(const DomainSpec& d, const PartialAssignment& pa) {
    std::string out = "{";
    bool first = true;
    for (auto [idx, pos] : pa.literals()) {
        out += first ? " " : ", ";
        first = false;
        if (!pos) out += '!';
        out += d.propositions[static_cast<std::size_t>(idx)].name;
    }
    out += first ? "}" : " }";
    return out;
}

} // namespace

ParseResult parse_domain(const std::string& text) {
    ParseResult result;
    LineParser(result, text).run();
    return result;
}

std::string serialize_domain(const DomainSpec& d) {
    std::ostringstream out;
    out << "discount " << format_number(d.discount) << "\n";
    out << "props";
    for (const auto& p : d.propositions) out << ' ' << p.name;
    out << "\n";
    if (!d.rewards.empty()) out << "\n";
    for (const auto& r : d.rewards)
        out << "reward " << condition_text(d, r.condition) << ' '
            << format_number(r.value) << "\n";
    for (const auto& a : d.actions) {
        out << "\naction " << a.name << "\n";
        for (const auto& aspect : a.aspects) {
            out << "  aspect\n";
            for (const auto& c : aspect.cases) {
                out << "    case ";
                if (c.is_default) out << "default";
                else out << condition_text(d, c.discriminant);
                out << " =>";
                bool first = true;
                for (const auto& br : c.effect.branches) {
                    out << (first ? " " : " | ") << condition_text(d, br.effect)
                        << ' ' << format_number(br.probability);
                    first = false;
                }
                out << "\n";
            }
        }
    }
    if (d.initial) {
        PartialAssignment pa;
        for (const auto& p : d.propositions)
            pa.add(p.index, d.initial->get(p.index));
        out << "\ninit " << condition_text(d, pa) << "\n";
    }
    for (const auto& g : d.goals)
        out << "goal " << condition_text(d, g) << "\n";
    return out.str();
}

ParseResult load_domain_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        ParseResult r;
        r.errors.push_back({ParseError::Kind::Syntax,
                            "cannot open file '" + path + "'", SourceSpan{}});
        return r;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_domain(ss.str());
}

std::string format_parse_error(const ParseError& e) {
    const char* kind = "";
    switch (e.kind) {
        case ParseError::Kind::Syntax: kind = "syntax"; break;
        case ParseError::Kind::UnknownProposition: kind = "unknown-proposition"; break;
        case ParseError::Kind::BadProbability: kind = "bad-probability"; break;
        case ParseError::Kind::DuplicateName: kind = "duplicate-name"; break;
    }
    std::ostringstream out;
    out << "line " << e.span.line << ", col " << e.span.column << ": " << kind
        << ": " << e.message;
    return out.str();
}

} // namespace planex
