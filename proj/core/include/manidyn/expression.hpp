#pragma once

#include <memory>
#include <string>

#include "manidyn/types.hpp"

namespace manidyn {

/// Tiny arithmetic expression over body coordinates x1..x9 (and space
/// coordinates y1..y9 where a loading depends on the configuration):
/// literals, + - * / ^, parentheses, unary minus, pi, sin, cos, exp.
class Expression {
public:
    /// Throws ParseError (with column) on malformed input.
    static Expression parse(const std::string& src);

    double eval(const Vec& x) const;
    double eval(const Vec& x, const Vec& y) const;

    const std::string& source() const { return src_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string src_;
};

}  // namespace manidyn
