#pragma once

// Minimal recursive-descent formula evaluator, kept independent of the
// library's benchmark implementations so it can serve as an oracle.
//
//   expr    := term (('+'|'-') term)*
//   term    := factor (('*'|'/') factor)*
//   factor  := unary ('^' factor)?
//   unary   := '-' unary | primary
//   primary := number | 'pi' | 'x'<digits> | ('sin'|'cos') '(' expr ')'
//            | '(' expr ')'

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace oracle {

class FormulaParser {
public:
    FormulaParser(std::string_view text, std::span<const double> vars)
        : text_(text), vars_(vars) {}

    double parse() {
        const double value = expr();
        skip_ws();
        if (pos_ != text_.size()) throw std::runtime_error("formula: trailing input");
        return value;
    }

private:
    double expr() {
        double value = term();
        while (true) {
            skip_ws();
            if (consume('+')) {
                value += term();
            } else if (consume('-')) {
                value -= term();
            } else {
                return value;
            }
        }
    }

    double term() {
        double value = factor();
        while (true) {
            skip_ws();
            if (consume('*')) {
                value *= factor();
            } else if (consume('/')) {
                value /= factor();
            } else {
                return value;
            }
        }
    }

    double factor() {
        const double base = unary();
        skip_ws();
        if (consume('^')) return std::pow(base, factor());
        return base;
    }

    double unary() {
        skip_ws();
        if (consume('-')) return -unary();
        return primary();
    }

    double primary() {
        skip_ws();
        if (consume('(')) {
            const double value = expr();
            expect(')');
            return value;
        }
        if (std::isdigit(peek()) || peek() == '.') return number();
        if (match_word("pi")) return std::numbers::pi;
        if (match_word("sin")) return std::sin(paren_arg());
        if (match_word("cos")) return std::cos(paren_arg());
        if (peek() == 'x') {
            ++pos_;
            std::size_t index = 0;
            while (pos_ < text_.size() && std::isdigit(peek())) {
                index = index * 10 + static_cast<std::size_t>(peek() - '0');
                ++pos_;
            }
            if (index == 0 || index > vars_.size()) {
                throw std::runtime_error("formula: variable x" + std::to_string(index) +
                                         " out of range");
            }
            return vars_[index - 1];
        }
        throw std::runtime_error("formula: unexpected character at position " +
                                 std::to_string(pos_));
    }

    double paren_arg() {
        skip_ws();
        expect('(');
        const double value = expr();
        expect(')');
        return value;
    }

    double number() {
        const char* begin = text_.data() + pos_;
        char* end = nullptr;
        const double value = std::strtod(begin, &end);
        if (end == begin) throw std::runtime_error("formula: bad number");
        pos_ += static_cast<std::size_t>(end - begin);
        return value;
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    bool consume(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!consume(c)) {
            throw std::runtime_error(std::string("formula: expected '") + c + "'");
        }
    }

    bool match_word(std::string_view word) {
        if (text_.substr(pos_, word.size()) == word) {
            // Don't swallow identifiers that merely start with the word.
            const std::size_t next = pos_ + word.size();
            if (next < text_.size() && std::isalpha(text_[next])) return false;
            pos_ = next;
            return true;
        }
        return false;
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(text_[pos_])) ++pos_;
    }

    std::string_view text_;
    std::span<const double> vars_;
    std::size_t pos_ = 0;
};

inline double eval_formula(std::string_view text, std::span<const double> vars) {
    return FormulaParser(text, vars).parse();
}

}  // namespace oracle
