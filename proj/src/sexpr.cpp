#include "sexpr.hpp"

#include <cctype>

#include "dae/errors.hpp"

namespace dae::detail {

bool Sexpr::is(std::string_view keyword) const {
    if (is_list || atom.size() != keyword.size()) return false;
    for (std::size_t i = 0; i < atom.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(atom[i])) !=
            std::tolower(static_cast<unsigned char>(keyword[i])))
            return false;
    }
    return true;
}

std::string_view Sexpr::head() const {
    if (!is_list || items.empty() || items.front().is_list) return {};
    return items.front().atom;
}

namespace {

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    Sexpr read_top() {
        skip_blank();
        if (pos_ >= text_.size()) throw SyntaxError("empty input", line_, column_);
        Sexpr e = read();
        skip_blank();
        if (pos_ < text_.size()) throw SyntaxError("trailing input after expression", line_, column_);
        return e;
    }

private:
    Sexpr read() {
        skip_blank();
        if (pos_ >= text_.size()) throw SyntaxError("unexpected end of input", line_, column_);
        Sexpr e;
        e.line = line_;
        e.column = column_;
        const char c = text_[pos_];
        if (c == ')') throw SyntaxError("unbalanced ')'", line_, column_);
        if (c == '(') {
            e.is_list = true;
            advance();
            for (;;) {
                skip_blank();
                if (pos_ >= text_.size())
                    throw SyntaxError("unterminated list opened", e.line, e.column);
                if (text_[pos_] == ')') {
                    advance();
                    break;
                }
                e.items.push_back(read());
            }
            return e;
        }
        while (pos_ < text_.size()) {
            const char d = text_[pos_];
            if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';') break;
            e.atom.push_back(d);
            advance();
        }
        return e;
    }

    void skip_blank() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == ';') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
};

}  // namespace

Sexpr read_sexpr(std::string_view text) { return Reader(text).read_top(); }

}  // namespace dae::detail
