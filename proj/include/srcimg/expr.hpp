#pragma once

#include <memory>
#include <string>

namespace srcimg {

// Closed-form scalar expression in the plane variables x, y (and r = |(x,y)|).
// Grammar: + - * / ^, unary minus, parentheses, numbers, constant pi and the
// functions sqrt exp log sin cos tan abs.
class Expr {
public:
    Expr() = default;
    static Expr parse(const std::string& text);

    double operator()(double x, double y) const;
    const std::string& text() const { return text_; }
    bool empty() const { return !root_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

}  // namespace srcimg
