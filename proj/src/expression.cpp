#include "tbem/expression.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

namespace tbem {

enum class NodeKind { Number, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };
enum class Function { Sin, Cos, Tan, Exp, Log, Tanh, Sqrt, Abs };

struct Expression::Node {
    NodeKind kind = NodeKind::Number;
    double value = 0.0;
    std::size_t index = 0;  // variable slot
    Function fn = Function::Sin;
    std::size_t lhs = 0;
    std::size_t rhs = 0;
};

namespace {

struct FunctionName {
    const char *name;
    Function fn;
};

constexpr std::array<FunctionName, 8> kFunctions{{{"sin", Function::Sin},
                                                  {"cos", Function::Cos},
                                                  {"tan", Function::Tan},
                                                  {"exp", Function::Exp},
                                                  {"log", Function::Log},
                                                  {"tanh", Function::Tanh},
                                                  {"sqrt", Function::Sqrt},
                                                  {"abs", Function::Abs}}};

}  // namespace

class ExpressionParser {
public:
    using Node = Expression::Node;

    ExpressionParser(const std::string &src, const std::vector<std::string> &vars) : src_(src), vars_(vars) {}

    std::size_t parse_all()
    {
        const std::size_t root = expr();
        skip_space();
        if (pos_ < src_.size())
            throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
        return root;
    }

    std::vector<Node> take() { return std::move(nodes_); }

private:
    const std::string &src_;
    const std::vector<std::string> &vars_;
    std::vector<Node> nodes_;
    std::size_t pos_ = 0;

    void skip_space()
    {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }

    bool accept(char c)
    {
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::size_t push(Node n)
    {
        nodes_.push_back(n);
        return nodes_.size() - 1;
    }

    std::size_t binary(NodeKind kind, std::size_t lhs, std::size_t rhs)
    {
        Node n;
        n.kind = kind;
        n.lhs = lhs;
        n.rhs = rhs;
        return push(n);
    }

    std::size_t expr()
    {
        std::size_t lhs = term();
        for (;;) {
            if (accept('+'))
                lhs = binary(NodeKind::Add, lhs, term());
            else if (accept('-'))
                lhs = binary(NodeKind::Sub, lhs, term());
            else
                return lhs;
        }
    }

    std::size_t term()
    {
        std::size_t lhs = factor();
        for (;;) {
            if (accept('*'))
                lhs = binary(NodeKind::Mul, lhs, factor());
            else if (accept('/'))
                lhs = binary(NodeKind::Div, lhs, factor());
            else
                return lhs;
        }
    }

    std::size_t factor()
    {
        const std::size_t base = unary();
        if (accept('^'))
            return binary(NodeKind::Pow, base, factor());
        return base;
    }

    std::size_t unary()
    {
        if (accept('-')) {
            Node n;
            n.kind = NodeKind::Negate;
            n.lhs = unary();
            return push(n);
        }
        return atom();
    }

    std::size_t atom()
    {
        skip_space();
        if (pos_ >= src_.size())
            throw ParseError("unexpected end of expression", pos_);
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            const std::size_t inner = expr();
            if (!accept(')'))
                throw ParseError("expected ')'", pos_);
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return identifier();
        throw ParseError(std::string("unexpected '") + c + "'", pos_);
    }

    std::size_t number()
    {
        const std::size_t start = pos_;
        const auto digits = [&] {
            std::size_t count = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
                ++count;
            }
            return count;
        };
        std::size_t mantissa = digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            mantissa += digits();
        }
        if (mantissa == 0)
            throw ParseError("malformed number", start);
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-'))
                ++pos_;
            if (digits() == 0)
                throw ParseError("malformed exponent", start);
        }
        Node n;
        n.kind = NodeKind::Number;
        const auto res = std::from_chars(src_.data() + start, src_.data() + pos_, n.value);
        if (res.ec != std::errc() || res.ptr != src_.data() + pos_) {
            // from_chars rejects a leading '.', fall back to strtod on a copy
            n.value = std::strtod(src_.substr(start, pos_ - start).c_str(), nullptr);
        }
        return push(n);
    }

    std::size_t identifier()
    {
        const std::size_t start = pos_;
        while (pos_ < src_.size()
               && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string name = src_.substr(start, pos_ - start);

        const auto fn = std::find_if(kFunctions.begin(), kFunctions.end(),
                                     [&](const FunctionName &f) { return name == f.name; });
        skip_space();
        const bool call = pos_ < src_.size() && src_[pos_] == '(';

        if (fn != kFunctions.end()) {
            if (!call)
                throw ParseError("function '" + name + "' expects 1 argument in parentheses", start);
            ++pos_;
            Node n;
            n.kind = NodeKind::Call;
            n.fn = fn->fn;
            n.lhs = expr();
            skip_space();
            if (pos_ < src_.size() && src_[pos_] == ',')
                throw ParseError("function '" + name + "' expects 1 argument", pos_);
            if (!accept(')'))
                throw ParseError("expected ')'", pos_);
            return push(n);
        }

        if (call)
            throw ParseError("'" + name + "' is not a function", start);

        Node n;
        if (name == "pi") {
            n.value = std::numbers::pi;
            return push(n);
        }
        if (name == "e") {
            n.value = std::numbers::e;
            return push(n);
        }
        const auto var = std::find(vars_.begin(), vars_.end(), name);
        if (var == vars_.end())
            throw ParseError("unknown identifier '" + name + "'", start);
        n.kind = NodeKind::Variable;
        n.index = static_cast<std::size_t>(var - vars_.begin());
        return push(n);
    }
};

Expression::Expression()
    : source_("0"), nodes_(std::make_shared<const std::vector<Node>>(std::vector<Node>(1)))
{
}

Expression Expression::parse(const std::string &source, std::vector<std::string> variables)
{
    ExpressionParser parser(source, variables);
    Expression e;
    e.root_ = parser.parse_all();
    e.nodes_ = std::make_shared<const std::vector<Node>>(parser.take());
    e.source_ = source;
    e.variables_ = std::move(variables);
    return e;
}

Expression Expression::constant(double value, std::vector<std::string> variables)
{
    Expression e;
    std::vector<Node> nodes(1);
    nodes[0].kind = NodeKind::Number;
    nodes[0].value = value;
    e.nodes_ = std::make_shared<const std::vector<Node>>(std::move(nodes));
    e.root_ = 0;
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    e.source_.assign(buf, res.ptr);
    e.variables_ = std::move(variables);
    return e;
}

double Expression::evaluate(std::span<const double> values) const
{
    if (values.size() != variables_.size())
        throw std::invalid_argument("expression '" + source_ + "' expects " + std::to_string(variables_.size())
                                    + " values, got " + std::to_string(values.size()));
    return eval_node(root_, values);
}

double Expression::operator()(std::initializer_list<double> values) const
{
    return evaluate(std::span<const double>(values.begin(), values.size()));
}

double Expression::eval_node(std::size_t i, std::span<const double> values) const
{
    const Node &n = (*nodes_)[i];
    switch (n.kind) {
    case NodeKind::Number:
        return n.value;
    case NodeKind::Variable:
        return values[n.index];
    case NodeKind::Negate:
        return -eval_node(n.lhs, values);
    case NodeKind::Add:
        return eval_node(n.lhs, values) + eval_node(n.rhs, values);
    case NodeKind::Sub:
        return eval_node(n.lhs, values) - eval_node(n.rhs, values);
    case NodeKind::Mul:
        return eval_node(n.lhs, values) * eval_node(n.rhs, values);
    case NodeKind::Div:
        return eval_node(n.lhs, values) / eval_node(n.rhs, values);
    case NodeKind::Pow:
        return std::pow(eval_node(n.lhs, values), eval_node(n.rhs, values));
    case NodeKind::Call: {
        const double a = eval_node(n.lhs, values);
        switch (n.fn) {
        case Function::Sin: return std::sin(a);
        case Function::Cos: return std::cos(a);
        case Function::Tan: return std::tan(a);
        case Function::Exp: return std::exp(a);
        case Function::Log: return std::log(a);
        case Function::Tanh: return std::tanh(a);
        case Function::Sqrt: return std::sqrt(a);
        case Function::Abs: return std::abs(a);
        }
    }
    }
    return 0.0;
}

}  // namespace tbem
