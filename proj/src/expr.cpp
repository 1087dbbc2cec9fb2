#include "srcimg/expr.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <vector>

#include "srcimg/errors.hpp"

namespace srcimg {

struct Expr::Node {
    enum Kind { Num, VarX, VarY, VarR, Neg, Add, Sub, Mul, Div, Pow, Call } kind;
    double value = 0.0;
    double (*fn)(double) = nullptr;
    std::shared_ptr<const Node> a, b;

    double eval(double x, double y) const {
        switch (kind) {
            case Num: return value;
            case VarX: return x;
            case VarY: return y;
            case VarR: return std::hypot(x, y);
            case Neg: return -a->eval(x, y);
            case Add: return a->eval(x, y) + b->eval(x, y);
            case Sub: return a->eval(x, y) - b->eval(x, y);
            case Mul: return a->eval(x, y) * b->eval(x, y);
            case Div: return a->eval(x, y) / b->eval(x, y);
            case Pow: {
                double e = b->eval(x, y);
                if (e == 2.0) {
                    double v = a->eval(x, y);
                    return v * v;
                }
                return std::pow(a->eval(x, y), e);
            }
            case Call: return fn(a->eval(x, y));
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make(Expr::Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

double f_sqrt(double v) { return std::sqrt(v); }
double f_exp(double v) { return std::exp(v); }
double f_log(double v) { return std::log(v); }
double f_sin(double v) { return std::sin(v); }
double f_cos(double v) { return std::cos(v); }
double f_tan(double v) { return std::tan(v); }
double f_abs(double v) { return std::fabs(v); }

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr parse() {
        NodePtr n = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
        return n;
    }

private:
    const std::string& s_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ArgumentError("expression '" + s_ + "' at offset " + std::to_string(pos_) + ": " + msg);
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr() {
        NodePtr n = term();
        for (;;) {
            if (accept('+')) n = make(Expr::Node::Add, n, term());
            else if (accept('-')) n = make(Expr::Node::Sub, n, term());
            else return n;
        }
    }

    NodePtr term() {
        NodePtr n = unary();
        for (;;) {
            if (accept('*')) n = make(Expr::Node::Mul, n, unary());
            else if (accept('/')) n = make(Expr::Node::Div, n, unary());
            else return n;
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Expr::Node::Neg, unary());
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return make(Expr::Node::Pow, base, unary());
        return base;
    }

    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr n = expr();
            if (!accept(')')) fail("expected ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end == begin) fail("bad number");
            pos_ += static_cast<size_t>(end - begin);
            auto n = std::make_shared<Expr::Node>();
            n->kind = Expr::Node::Num;
            n->value = v;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            std::string id = s_.substr(start, pos_ - start);
            if (id == "x") return make(Expr::Node::VarX);
            if (id == "y") return make(Expr::Node::VarY);
            if (id == "r") return make(Expr::Node::VarR);
            if (id == "pi") {
                auto n = std::make_shared<Expr::Node>();
                n->kind = Expr::Node::Num;
                n->value = std::numbers::pi;
                return n;
            }
            static const std::vector<std::pair<std::string, double (*)(double)>> fns = {
                {"sqrt", f_sqrt}, {"exp", f_exp}, {"log", f_log}, {"sin", f_sin},
                {"cos", f_cos},   {"tan", f_tan}, {"abs", f_abs}};
            for (const auto& [name, fp] : fns) {
                if (name == id) {
                    if (!accept('(')) fail("expected '(' after " + id);
                    auto n = std::make_shared<Expr::Node>();
                    n->kind = Expr::Node::Call;
                    n->fn = fp;
                    n->a = expr();
                    if (!accept(')')) fail("expected ')'");
                    return n;
                }
            }
            pos_ = start;
            fail("unknown identifier '" + id + "'");
        }
        fail("unexpected character '" + std::string(1, c) + "'");
    }
};

}  // namespace

Expr Expr::parse(const std::string& text) {
    Expr e;
    e.root_ = Parser(text).parse();
    e.text_ = text;
    return e;
}

double Expr::operator()(double x, double y) const {
    if (!root_) throw ArgumentError("evaluating an empty expression");
    return root_->eval(x, y);
}

}  // namespace srcimg
