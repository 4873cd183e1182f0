#include "manidyn/expression.hpp"

#include <cctype>
#include <cmath>

#include "manidyn/errors.hpp"

namespace manidyn {

struct Expression::Node {
    enum class Kind { constant, var_x, var_y, add, sub, mul, div, pow, neg, sin, cos, exp };
    Kind kind;
    double value = 0.0;
    int index = 0;
    std::shared_ptr<const Node> a, b;

    double eval(const Vec& x, const Vec* y) const {
        switch (kind) {
            case Kind::constant: return value;
            case Kind::var_x:
                if (index >= x.size()) throw Error("expression references x" +
                                                   std::to_string(index + 1) +
                                                   " beyond the body dimension");
                return x[index];
            case Kind::var_y:
                if (!y) throw Error("expression references y but no configuration is in scope");
                if (index >= y->size()) throw Error("expression references y" +
                                                    std::to_string(index + 1) +
                                                    " beyond the space dimension");
                return (*y)[index];
            case Kind::add: return a->eval(x, y) + b->eval(x, y);
            case Kind::sub: return a->eval(x, y) - b->eval(x, y);
            case Kind::mul: return a->eval(x, y) * b->eval(x, y);
            case Kind::div: return a->eval(x, y) / b->eval(x, y);
            case Kind::pow: return std::pow(a->eval(x, y), b->eval(x, y));
            case Kind::neg: return -a->eval(x, y);
            case Kind::sin: return std::sin(a->eval(x, y));
            case Kind::cos: return std::cos(a->eval(x, y));
            case Kind::exp: return std::exp(a->eval(x, y));
        }
        return 0.0;
    }
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

// hand-rolled recursive descent; column positions are 1-based
struct Parser {
    const std::string& s;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("expression error at column " + std::to_string(pos + 1) + ": " + msg +
                             " in \"" + s + "\"",
                         -1, static_cast<int>(pos + 1));
    }
    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    NodePtr make(Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }

    NodePtr expr() {
        NodePtr n = term();
        for (;;) {
            if (eat('+'))
                n = make(Node::Kind::add, n, term());
            else if (eat('-'))
                n = make(Node::Kind::sub, n, term());
            else
                return n;
        }
    }
    NodePtr term() {
        NodePtr n = factor();
        for (;;) {
            if (eat('*'))
                n = make(Node::Kind::mul, n, factor());
            else if (eat('/'))
                n = make(Node::Kind::div, n, factor());
            else
                return n;
        }
    }
    NodePtr factor() {
        NodePtr n = unary();
        if (eat('^')) return make(Node::Kind::pow, n, factor());  // right associative
        return n;
    }
    NodePtr unary() {
        if (eat('-')) return make(Node::Kind::neg, unary());
        return primary();
    }
    NodePtr primary() {
        skip();
        if (pos >= s.size()) fail("unexpected end of expression");
        const char c = s[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return ident();
        if (eat('(')) {
            NodePtr n = expr();
            if (!eat(')')) fail("missing ')'");
            return n;
        }
        fail("unexpected character");
    }
    NodePtr number() {
        std::size_t end = pos;
        while (end < s.size() &&
               (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == '.' ||
                s[end] == 'e' || s[end] == 'E' ||
                ((s[end] == '+' || s[end] == '-') && end > pos &&
                 (s[end - 1] == 'e' || s[end - 1] == 'E'))))
            ++end;
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::constant;
        try {
            n->value = std::stod(s.substr(pos, end - pos));
        } catch (...) {
            fail("bad numeric literal");
        }
        pos = end;
        return n;
    }
    NodePtr ident() {
        std::size_t end = pos;
        while (end < s.size() && (std::isalnum(static_cast<unsigned char>(s[end])))) ++end;
        const std::string name = s.substr(pos, end - pos);
        pos = end;
        if (name == "pi") {
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::constant;
            n->value = M_PI;
            return n;
        }
        if ((name[0] == 'x' || name[0] == 'y') && name.size() == 2 &&
            std::isdigit(static_cast<unsigned char>(name[1]))) {
            auto n = std::make_shared<Node>();
            n->kind = name[0] == 'x' ? Node::Kind::var_x : Node::Kind::var_y;
            n->index = name[1] - '1';
            if (n->index < 0) fail("coordinate indices start at 1");
            return n;
        }
        Node::Kind k;
        if (name == "sin")
            k = Node::Kind::sin;
        else if (name == "cos")
            k = Node::Kind::cos;
        else if (name == "exp")
            k = Node::Kind::exp;
        else
            fail("unknown identifier \"" + name + "\"");
        if (!eat('(')) fail("expected '(' after function name");
        NodePtr arg = expr();
        if (!eat(')')) fail("missing ')'");
        return make(k, arg);
    }
};

}  // namespace

Expression Expression::parse(const std::string& src) {
    Parser p{src};
    Expression e;
    e.root_ = p.expr();
    p.skip();
    if (p.pos != src.size()) p.fail("trailing input");
    e.src_ = src;
    return e;
}

double Expression::eval(const Vec& x) const { return root_->eval(x, nullptr); }
double Expression::eval(const Vec& x, const Vec& y) const { return root_->eval(x, &y); }

}  // namespace manidyn
