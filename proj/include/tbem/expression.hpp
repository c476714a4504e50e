#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tbem {

/// Parse failure with the byte offset into the source text.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string &message, std::size_t offset)
        : std::runtime_error(message + " at offset " + std::to_string(offset)), message_(message),
          offset_(offset) {}

    const std::string &message() const { return message_; }
    std::size_t offset() const { return offset_; }

private:
    std::string message_;
    std::size_t offset_;
};

/// Compiled arithmetic expression over a fixed list of variables.
///
/// Grammar:
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := unary ('^' factor)?
///   unary  := '-' unary | atom
///   atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
///
/// Functions: sin cos tan exp log tanh sqrt abs. Constants: pi e.
/// Evaluation is plain IEEE double arithmetic; pow for '^'.
class Expression {
public:
    Expression();

    static Expression parse(const std::string &source, std::vector<std::string> variables);
    /// Constant-valued expression (source is the shortest round-trip text of `value`).
    static Expression constant(double value, std::vector<std::string> variables);

    /// `values` follow the order of variables() and must have the same length.
    double evaluate(std::span<const double> values) const;
    double operator()(std::initializer_list<double> values) const;

    const std::string &source() const { return source_; }
    const std::vector<std::string> &variables() const { return variables_; }

private:
    struct Node;
    std::string source_;
    std::vector<std::string> variables_;
    std::shared_ptr<const std::vector<Node>> nodes_;
    std::size_t root_ = 0;

    double eval_node(std::size_t i, std::span<const double> values) const;
    friend class ExpressionParser;
};

}  // namespace tbem
