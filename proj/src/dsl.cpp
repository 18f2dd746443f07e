#include "kolmo/dsl.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>

#include "kolmo/random.hpp"

namespace kolmo::dsl {

ParseError::ParseError(std::size_t offset, const std::string& message)
    : std::runtime_error("parse error at offset " + std::to_string(offset) + ": " + message),
      offset_(offset) {}

EvalError::EvalError(SourceSpan span, const std::string& message)
    : std::runtime_error("evaluation error in [" + std::to_string(span.begin) + ", " +
                         std::to_string(span.end) + "): " + message),
      span_(span) {}

namespace {

struct FunctionInfo {
    std::string_view name;
    Function fn;
    int arity;
};

constexpr std::array<FunctionInfo, 12> kFunctions{{
    {"sin", Function::Sin, 1},
    {"cos", Function::Cos, 1},
    {"exp", Function::Exp, 1},
    {"log", Function::Log, 1},
    {"abs", Function::Abs, 1},
    {"sqrt", Function::Sqrt, 1},
    {"min", Function::Min, 2},
    {"max", Function::Max, 2},
    {"sign", Function::Sign, 1},
    {"step", Function::Step, 1},
    {"floor", Function::Floor, 1},
    {"checkerboard", Function::Checkerboard, 6},
}};

std::optional<FunctionInfo> lookup_function(std::string_view name) {
    for (const auto& f : kFunctions) {
        if (f.name == name) {
            return f;
        }
    }
    return std::nullopt;
}

std::string_view function_name(Function fn) {
    for (const auto& f : kFunctions) {
        if (f.fn == fn) {
            return f.name;
        }
    }
    return "?";
}

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
    Tok kind = Tok::End;
    std::size_t begin = 0;
    std::size_t end = 0;
    double number = 0.0;
};

std::string_view describe(Tok t) {
    switch (t) {
        case Tok::Number: return "number";
        case Tok::Ident: return "identifier";
        case Tok::Plus: return "'+'";
        case Tok::Minus: return "'-'";
        case Tok::Star: return "'*'";
        case Tok::Slash: return "'/'";
        case Tok::Caret: return "'^'";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::Comma: return "','";
        case Tok::End: return "end of input";
    }
    return "?";
}

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) { advance(); }

    std::unique_ptr<Node> parse_all() {
        auto node = parse_binary(0);
        if (tok_.kind != Tok::End) {
            throw ParseError(tok_.begin, "expected operator or end of input, found " +
                                             std::string(describe(tok_.kind)));
        }
        return node;
    }

private:
    static bool is_ident_start(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    }
    static bool is_ident_char(char c) {
        return is_ident_start(c) || (c >= '0' && c <= '9');
    }
    static bool is_digit(char c) { return c >= '0' && c <= '9'; }

    void advance() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' ||
                                      src_[pos_] == '\n' || src_[pos_] == '\r')) {
            ++pos_;
        }
        tok_ = Token{};
        tok_.begin = pos_;
        if (pos_ >= src_.size()) {
            tok_.kind = Tok::End;
            tok_.end = pos_;
            return;
        }
        char c = src_[pos_];
        if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
            std::size_t p = pos_;
            while (p < src_.size() && (is_digit(src_[p]) || src_[p] == '.')) ++p;
            if (p < src_.size() && (src_[p] == 'e' || src_[p] == 'E')) {
                std::size_t q = p + 1;
                if (q < src_.size() && (src_[q] == '+' || src_[q] == '-')) ++q;
                if (q < src_.size() && is_digit(src_[q])) {
                    p = q;
                    while (p < src_.size() && is_digit(src_[p])) ++p;
                }
            }
            double v = 0.0;
            auto res = std::from_chars(src_.data() + pos_, src_.data() + p, v);
            if (res.ec != std::errc() || res.ptr != src_.data() + p) {
                throw ParseError(pos_, "malformed number");
            }
            tok_.kind = Tok::Number;
            tok_.number = v;
            pos_ = p;
        } else if (is_ident_start(c)) {
            std::size_t p = pos_;
            while (p < src_.size() && is_ident_char(src_[p])) ++p;
            tok_.kind = Tok::Ident;
            pos_ = p;
        } else {
            switch (c) {
                case '+': tok_.kind = Tok::Plus; break;
                case '-': tok_.kind = Tok::Minus; break;
                case '*': tok_.kind = Tok::Star; break;
                case '/': tok_.kind = Tok::Slash; break;
                case '^': tok_.kind = Tok::Caret; break;
                case '(': tok_.kind = Tok::LParen; break;
                case ')': tok_.kind = Tok::RParen; break;
                case ',': tok_.kind = Tok::Comma; break;
                default:
                    throw ParseError(pos_, std::string("unexpected character '") + c + "'");
            }
            ++pos_;
        }
        tok_.end = pos_;
    }

    void expect(Tok kind) {
        if (tok_.kind != kind) {
            throw ParseError(tok_.begin, "expected " + std::string(describe(kind)) + ", found " +
                                             std::string(describe(tok_.kind)));
        }
        advance();
    }

    static int precedence(Tok t) {
        switch (t) {
            case Tok::Plus:
            case Tok::Minus: return 1;
            case Tok::Star:
            case Tok::Slash: return 2;
            default: return -1;
        }
    }

    // Precedence climbing over the left-associative levels; unary minus and
    // '^' sit above them in parse_unary / parse_power.
    std::unique_ptr<Node> parse_binary(int min_prec) {
        auto lhs = parse_unary();
        while (precedence(tok_.kind) > 0 && precedence(tok_.kind) >= min_prec) {
            Tok op_tok = tok_.kind;
            int prec = precedence(op_tok);
            advance();
            auto rhs = parse_binary(prec + 1);
            auto node = std::make_unique<Node>();
            node->kind = NodeKind::Binary;
            node->op = op_tok == Tok::Plus    ? BinaryOp::Add
                       : op_tok == Tok::Minus ? BinaryOp::Sub
                       : op_tok == Tok::Star  ? BinaryOp::Mul
                                              : BinaryOp::Div;
            node->span = {lhs->span.begin, rhs->span.end};
            node->children.push_back(std::move(lhs));
            node->children.push_back(std::move(rhs));
            lhs = std::move(node);
        }
        return lhs;
    }

    std::unique_ptr<Node> parse_unary() {
        if (tok_.kind == Tok::Minus) {
            std::size_t begin = tok_.begin;
            advance();
            auto operand = parse_unary();
            auto node = std::make_unique<Node>();
            node->kind = NodeKind::Negate;
            node->span = {begin, operand->span.end};
            node->children.push_back(std::move(operand));
            return node;
        }
        return parse_power();
    }

    std::unique_ptr<Node> parse_power() {
        auto base = parse_primary();
        if (tok_.kind == Tok::Caret) {
            advance();
            auto exponent = parse_unary();
            auto node = std::make_unique<Node>();
            node->kind = NodeKind::Binary;
            node->op = BinaryOp::Pow;
            node->span = {base->span.begin, exponent->span.end};
            node->children.push_back(std::move(base));
            node->children.push_back(std::move(exponent));
            return node;
        }
        return base;
    }

    std::unique_ptr<Node> parse_primary() {
        auto node = std::make_unique<Node>();
        node->span = {tok_.begin, tok_.end};
        switch (tok_.kind) {
            case Tok::Number:
                node->kind = NodeKind::Literal;
                node->value = tok_.number;
                advance();
                return node;
            case Tok::LParen: {
                advance();
                auto inner = parse_binary(0);
                std::size_t end = tok_.end;
                expect(Tok::RParen);
                inner->span = {node->span.begin, end};
                return inner;
            }
            case Tok::Ident: {
                std::string_view name = src_.substr(tok_.begin, tok_.end - tok_.begin);
                std::size_t name_begin = tok_.begin;
                advance();
                if (tok_.kind == Tok::LParen) {
                    auto info = lookup_function(name);
                    if (!info) {
                        throw ParseError(name_begin, "unknown function '" + std::string(name) + "'");
                    }
                    advance();
                    node->kind = NodeKind::Call;
                    node->fn = info->fn;
                    if (tok_.kind != Tok::RParen) {
                        node->children.push_back(parse_binary(0));
                        while (tok_.kind == Tok::Comma) {
                            advance();
                            node->children.push_back(parse_binary(0));
                        }
                    }
                    std::size_t end = tok_.end;
                    expect(Tok::RParen);
                    node->span = {name_begin, end};
                    if (static_cast<int>(node->children.size()) != info->arity) {
                        throw ParseError(name_begin, "function '" + std::string(name) + "' expects " +
                                                         std::to_string(info->arity) +
                                                         " argument(s), got " +
                                                         std::to_string(node->children.size()));
                    }
                    return node;
                }
                if (name == "x" || name == "y" || name == "t") {
                    node->kind = NodeKind::Variable;
                    node->var = name == "x" ? Variable::X : name == "y" ? Variable::Y : Variable::T;
                    return node;
                }
                if (name == "pi") {
                    node->kind = NodeKind::Literal;
                    node->value = std::numbers::pi;
                    return node;
                }
                throw ParseError(name_begin, "unknown identifier '" + std::string(name) + "'");
            }
            default:
                throw ParseError(tok_.begin, "expected number, identifier or '(', found " +
                                                 std::string(describe(tok_.kind)));
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    Token tok_;
};

// Postfix program evaluated on a small value stack. Compiled once per parse;
// evaluation is a flat loop with no allocation.
enum class Op : std::uint8_t {
    Const, VarX, VarY, VarT, Neg, Add, Sub, Mul, Div, Pow, PowInt,
    Sin, Cos, Exp, Log, Abs, Sqrt, Min, Max, Sign, Step, Floor, Checkerboard
};

struct Instr {
    Op op = Op::Const;
    int ipow = 0;
    double value = 0.0;
    SourceSpan span;
};

// Integer powers up to this magnitude compile to repeated squaring.
constexpr double kMaxIntPower = 16.0;

void compile_node(const Node& n, std::vector<Instr>& code, int depth, int& max_depth) {
    max_depth = std::max(max_depth, depth + 1);
    Instr ins;
    ins.span = n.span;
    switch (n.kind) {
        case NodeKind::Literal:
            ins.op = Op::Const;
            ins.value = n.value;
            break;
        case NodeKind::Variable:
            ins.op = n.var == Variable::X ? Op::VarX : n.var == Variable::Y ? Op::VarY : Op::VarT;
            break;
        case NodeKind::Negate:
            compile_node(*n.children[0], code, depth, max_depth);
            ins.op = Op::Neg;
            break;
        case NodeKind::Binary: {
            const Node& rhs = *n.children[1];
            compile_node(*n.children[0], code, depth, max_depth);
            if (n.op == BinaryOp::Pow && rhs.kind == NodeKind::Literal &&
                rhs.value == std::floor(rhs.value) && std::abs(rhs.value) <= kMaxIntPower) {
                ins.op = Op::PowInt;
                ins.ipow = static_cast<int>(rhs.value);
                break;
            }
            compile_node(rhs, code, depth + 1, max_depth);
            switch (n.op) {
                case BinaryOp::Add: ins.op = Op::Add; break;
                case BinaryOp::Sub: ins.op = Op::Sub; break;
                case BinaryOp::Mul: ins.op = Op::Mul; break;
                case BinaryOp::Div: ins.op = Op::Div; break;
                case BinaryOp::Pow: ins.op = Op::Pow; break;
            }
            break;
        }
        case NodeKind::Call:
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                compile_node(*n.children[i], code, depth + static_cast<int>(i), max_depth);
            }
            switch (n.fn) {
                case Function::Sin: ins.op = Op::Sin; break;
                case Function::Cos: ins.op = Op::Cos; break;
                case Function::Exp: ins.op = Op::Exp; break;
                case Function::Log: ins.op = Op::Log; break;
                case Function::Abs: ins.op = Op::Abs; break;
                case Function::Sqrt: ins.op = Op::Sqrt; break;
                case Function::Min: ins.op = Op::Min; break;
                case Function::Max: ins.op = Op::Max; break;
                case Function::Sign: ins.op = Op::Sign; break;
                case Function::Step: ins.op = Op::Step; break;
                case Function::Floor: ins.op = Op::Floor; break;
                case Function::Checkerboard: ins.op = Op::Checkerboard; break;
            }
            break;
    }
    code.push_back(ins);
}

double int_power(double base, int n) {
    bool invert = n < 0;
    unsigned e = static_cast<unsigned>(invert ? -n : n);
    double result = 1.0;
    double b = base;
    while (e) {
        if (e & 1u) result *= b;
        e >>= 1u;
        if (e) b *= b;
    }
    return invert ? 1.0 / result : result;
}

}  // namespace

struct Program {
    std::vector<Instr> code;
    int max_depth = 1;

    double run(const Point& z) const;
};

namespace {

std::shared_ptr<const Program> compile(const Node& root) {
    auto prog = std::make_shared<Program>();
    compile_node(root, prog->code, 0, prog->max_depth);
    return prog;
}

}  // namespace

double Program::run(const Point& z) const {
    constexpr int kInline = 64;
    double inline_stack[kInline];
    std::vector<double> heap;
    double* st = inline_stack;
    if (max_depth > kInline) {
        heap.resize(static_cast<std::size_t>(max_depth));
        st = heap.data();
    }
    st[0] = 0.0;
    int sp = 0;
    for (const Instr& ins : code) {
        switch (ins.op) {
            case Op::Const: st[sp++] = ins.value; break;
            case Op::VarX: st[sp++] = z.x; break;
            case Op::VarY: st[sp++] = z.y; break;
            case Op::VarT: st[sp++] = z.t; break;
            case Op::Neg: st[sp - 1] = -st[sp - 1]; break;
            case Op::Add: --sp; st[sp - 1] += st[sp]; break;
            case Op::Sub: --sp; st[sp - 1] -= st[sp]; break;
            case Op::Mul: --sp; st[sp - 1] *= st[sp]; break;
            case Op::Div:
                --sp;
                if (st[sp] == 0.0) throw EvalError(ins.span, "division by zero");
                st[sp - 1] /= st[sp];
                break;
            case Op::Pow:
            case Op::PowInt: {
                double v;
                if (ins.op == Op::PowInt) {
                    v = int_power(st[sp - 1], ins.ipow);
                } else {
                    --sp;
                    v = std::pow(st[sp - 1], st[sp]);
                }
                if (!std::isfinite(v)) throw EvalError(ins.span, "non-finite power");
                st[sp - 1] = v;
                break;
            }
            case Op::Sin: st[sp - 1] = std::sin(st[sp - 1]); break;
            case Op::Cos: st[sp - 1] = std::cos(st[sp - 1]); break;
            case Op::Exp: {
                double v = std::exp(st[sp - 1]);
                if (!std::isfinite(v)) throw EvalError(ins.span, "exp overflow");
                st[sp - 1] = v;
                break;
            }
            case Op::Log:
                if (!(st[sp - 1] > 0.0)) throw EvalError(ins.span, "log of non-positive value");
                st[sp - 1] = std::log(st[sp - 1]);
                break;
            case Op::Abs: st[sp - 1] = std::abs(st[sp - 1]); break;
            case Op::Sqrt:
                if (st[sp - 1] < 0.0) throw EvalError(ins.span, "sqrt of negative value");
                st[sp - 1] = std::sqrt(st[sp - 1]);
                break;
            case Op::Min: --sp; st[sp - 1] = std::min(st[sp - 1], st[sp]); break;
            case Op::Max: --sp; st[sp - 1] = std::max(st[sp - 1], st[sp]); break;
            case Op::Sign: {
                double a = st[sp - 1];
                st[sp - 1] = a > 0.0 ? 1.0 : a < 0.0 ? -1.0 : 0.0;
                break;
            }
            case Op::Step: st[sp - 1] = step_function(st[sp - 1]); break;
            case Op::Floor: st[sp - 1] = std::floor(st[sp - 1]); break;
            case Op::Checkerboard: {
                sp -= 5;
                const double* a = &st[sp - 1];
                double sx = a[1], sy = a[2], stt = a[3], lo = a[4], hi = a[5];
                if (!(sx > 0.0 && sy > 0.0 && stt > 0.0)) {
                    throw EvalError(ins.span, "checkerboard cell sizes must be positive");
                }
                if (!(lo <= hi)) throw EvalError(ins.span, "checkerboard requires lo <= hi");
                auto seed = static_cast<std::uint64_t>(static_cast<std::int64_t>(std::llround(a[0])));
                st[sp - 1] = checkerboard(seed, sx, sy, stt, lo, hi, z);
                break;
            }
        }
    }
    return st[0];
}

namespace {

bool nodes_equal(const Node& a, const Node& b) {
    if (a.kind != b.kind || a.children.size() != b.children.size()) return false;
    switch (a.kind) {
        case NodeKind::Literal:
            if (a.value != b.value) return false;
            break;
        case NodeKind::Variable:
            if (a.var != b.var) return false;
            break;
        case NodeKind::Binary:
            if (a.op != b.op) return false;
            break;
        case NodeKind::Call:
            if (a.fn != b.fn) return false;
            break;
        case NodeKind::Negate: break;
    }
    for (std::size_t i = 0; i < a.children.size(); ++i) {
        if (!nodes_equal(*a.children[i], *b.children[i])) return false;
    }
    return true;
}

// Printing precedence: sums 1, products 2, unary minus 3, power 4, atoms 5.
int print_precedence(const Node& n) {
    switch (n.kind) {
        case NodeKind::Binary:
            switch (n.op) {
                case BinaryOp::Add:
                case BinaryOp::Sub: return 1;
                case BinaryOp::Mul:
                case BinaryOp::Div: return 2;
                case BinaryOp::Pow: return 4;
            }
            return 0;
        case NodeKind::Negate: return 3;
        default: return 5;
    }
}

void print_node(const Node& n, std::string& out);

void print_child(const Node& child, bool parens, std::string& out) {
    if (parens) out += '(';
    print_node(child, out);
    if (parens) out += ')';
}

void print_node(const Node& n, std::string& out) {
    switch (n.kind) {
        case NodeKind::Literal: {
            if (n.value == std::numbers::pi) {
                out += "pi";
                return;
            }
            std::array<char, 64> buf{};
            auto res = std::to_chars(buf.data(), buf.data() + buf.size(), n.value);
            out.append(buf.data(), res.ptr);
            return;
        }
        case NodeKind::Variable:
            out += n.var == Variable::X ? 'x' : n.var == Variable::Y ? 'y' : 't';
            return;
        case NodeKind::Negate:
            out += '-';
            // "-" followed by a power or atom binds correctly; sums and
            // products need parentheses.
            print_child(*n.children[0], print_precedence(*n.children[0]) < 3, out);
            return;
        case NodeKind::Binary: {
            int p = print_precedence(n);
            const Node& l = *n.children[0];
            const Node& r = *n.children[1];
            if (n.op == BinaryOp::Pow) {
                // Base must be an atom; the exponent parses as a unary.
                print_child(l, print_precedence(l) <= 4, out);
                out += '^';
                print_child(r, print_precedence(r) < 3, out);
                return;
            }
            print_child(l, print_precedence(l) < p, out);
            switch (n.op) {
                case BinaryOp::Add: out += " + "; break;
                case BinaryOp::Sub: out += " - "; break;
                case BinaryOp::Mul: out += '*'; break;
                case BinaryOp::Div: out += '/'; break;
                default: break;
            }
            // Left-associative: an equal-precedence right child needs parens.
            print_child(r, print_precedence(r) <= p, out);
            return;
        }
        case NodeKind::Call:
            out += function_name(n.fn);
            out += '(';
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                if (i > 0) out += ", ";
                print_node(*n.children[i], out);
            }
            out += ')';
            return;
    }
}

bool node_depends_on(const Node& n, Variable v) {
    if (n.kind == NodeKind::Variable) return n.var == v;
    // The cell lookup reads x, y and t implicitly.
    if (n.kind == NodeKind::Call && n.fn == Function::Checkerboard) return true;
    for (const auto& c : n.children) {
        if (node_depends_on(*c, v)) return true;
    }
    return false;
}

std::shared_ptr<const Node> literal_node(double value) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Literal;
    n->value = value;
    return n;
}

}  // namespace

double checkerboard(std::uint64_t seed, double sx, double sy, double st, double lo, double hi,
                    const Point& z) {
    auto cell = [](double v, double size) {
        return static_cast<std::uint64_t>(static_cast<std::int64_t>(std::floor(v / size)));
    };
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ cell(z.x, sx));
    h = mix64(h ^ cell(z.y, sy));
    h = mix64(h ^ cell(z.t, st));
    double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

Expr::Expr() : Expr(literal_node(0.0), "0") {}

Expr::Expr(std::shared_ptr<const Node> root, std::string source)
    : root_(std::move(root)), program_(compile(*root_)), source_(std::move(source)) {}

Expr Expr::parse(std::string_view source) {
    Parser parser(source);
    std::shared_ptr<const Node> root = parser.parse_all();
    return Expr(std::move(root), std::string(source));
}

Expr Expr::constant(double value) {
    Expr e(literal_node(value), "");
    e.source_ = e.print();
    return e;
}

double Expr::eval(const Point& z) const {
    return program_->run(z);
}

std::string Expr::print() const {
    std::string out;
    print_node(*root_, out);
    return out;
}

bool Expr::depends_on(Variable v) const {
    return node_depends_on(*root_, v);
}

bool Expr::is_constant() const {
    return root_->kind == NodeKind::Literal;
}

bool operator==(const Expr& a, const Expr& b) {
    return nodes_equal(*a.root_, *b.root_);
}

namespace {

using NodePtr = std::unique_ptr<Node>;

NodePtr clone(const Node& n) {
    auto c = std::make_unique<Node>();
    c->kind = n.kind;
    c->value = n.value;
    c->var = n.var;
    c->op = n.op;
    c->fn = n.fn;
    c->span = n.span;
    for (const auto& ch : n.children) c->children.push_back(clone(*ch));
    return c;
}

NodePtr neg(NodePtr a);

// Negative constants are built as Negate(literal), the shape the parser
// produces, so printed derivatives reparse to equal trees.
NodePtr lit(double v) {
    if (v < 0) return neg(lit(-v));
    auto n = std::make_unique<Node>();
    n->kind = NodeKind::Literal;
    n->value = v;
    return n;
}

bool is_lit(const Node& n, double v) { return n.kind == NodeKind::Literal && n.value == v; }

NodePtr neg(NodePtr a) {
    if (a->kind == NodeKind::Negate) return std::move(a->children[0]);
    if (is_lit(*a, 0)) return a;
    auto n = std::make_unique<Node>();
    n->kind = NodeKind::Negate;
    n->children.push_back(std::move(a));
    return n;
}

NodePtr bin(BinaryOp op, NodePtr a, NodePtr b) {
    bool la = a->kind == NodeKind::Literal, lb = b->kind == NodeKind::Literal;
    switch (op) {
        case BinaryOp::Add:
            if (is_lit(*a, 0)) return b;
            if (is_lit(*b, 0)) return a;
            if (la && lb) return lit(a->value + b->value);
            break;
        case BinaryOp::Sub:
            if (is_lit(*b, 0)) return a;
            if (is_lit(*a, 0)) return neg(std::move(b));
            if (la && lb) return lit(a->value - b->value);
            break;
        case BinaryOp::Mul:
            if (is_lit(*a, 0) || is_lit(*b, 0)) return lit(0);
            if (is_lit(*a, 1)) return b;
            if (is_lit(*b, 1)) return a;
            if (la && lb) return lit(a->value * b->value);
            break;
        case BinaryOp::Div:
            if (is_lit(*a, 0)) return lit(0);
            if (is_lit(*b, 1)) return a;
            break;
        case BinaryOp::Pow:
            if (is_lit(*b, 1)) return a;
            if (is_lit(*b, 0)) return lit(1);
            break;
    }
    auto n = std::make_unique<Node>();
    n->kind = NodeKind::Binary;
    n->op = op;
    n->children.push_back(std::move(a));
    n->children.push_back(std::move(b));
    return n;
}

NodePtr call(Function fn, NodePtr a) {
    auto n = std::make_unique<Node>();
    n->kind = NodeKind::Call;
    n->fn = fn;
    n->children.push_back(std::move(a));
    return n;
}

// Throws std::domain_error for non-differentiable functions of v.
NodePtr diff(const Node& n, Variable v) {
    if (!node_depends_on(n, v)) return lit(0);
    switch (n.kind) {
        case NodeKind::Literal: return lit(0);
        case NodeKind::Variable: return lit(n.var == v ? 1 : 0);
        case NodeKind::Negate: return neg(diff(*n.children[0], v));
        case NodeKind::Binary: {
            const Node& a = *n.children[0];
            const Node& b = *n.children[1];
            switch (n.op) {
                case BinaryOp::Add: return bin(BinaryOp::Add, diff(a, v), diff(b, v));
                case BinaryOp::Sub: return bin(BinaryOp::Sub, diff(a, v), diff(b, v));
                case BinaryOp::Mul:
                    return bin(BinaryOp::Add, bin(BinaryOp::Mul, diff(a, v), clone(b)),
                               bin(BinaryOp::Mul, clone(a), diff(b, v)));
                case BinaryOp::Div:
                    return bin(BinaryOp::Div,
                               bin(BinaryOp::Sub, bin(BinaryOp::Mul, diff(a, v), clone(b)),
                                   bin(BinaryOp::Mul, clone(a), diff(b, v))),
                               bin(BinaryOp::Pow, clone(b), lit(2)));
                case BinaryOp::Pow:
                    if (!node_depends_on(b, v)) {
                        NodePtr lowered = b.kind == NodeKind::Literal ? lit(b.value - 1)
                                                                      : bin(BinaryOp::Sub, clone(b), lit(1));
                        return bin(BinaryOp::Mul, bin(BinaryOp::Mul, clone(b), bin(BinaryOp::Pow, clone(a),
                                                                                   std::move(lowered))),
                                   diff(a, v));
                    }
                    // a^b (b' log a + b a'/a)
                    return bin(BinaryOp::Mul, clone(n),
                               bin(BinaryOp::Add, bin(BinaryOp::Mul, diff(b, v), call(Function::Log, clone(a))),
                                   bin(BinaryOp::Div, bin(BinaryOp::Mul, clone(b), diff(a, v)), clone(a))));
            }
            break;
        }
        case NodeKind::Call: {
            const Node& a = *n.children[0];
            switch (n.fn) {
                case Function::Sin: return bin(BinaryOp::Mul, call(Function::Cos, clone(a)), diff(a, v));
                case Function::Cos: return bin(BinaryOp::Mul, neg(call(Function::Sin, clone(a))), diff(a, v));
                case Function::Exp: return bin(BinaryOp::Mul, clone(n), diff(a, v));
                case Function::Log: return bin(BinaryOp::Div, diff(a, v), clone(a));
                case Function::Sqrt:
                    return bin(BinaryOp::Div, diff(a, v), bin(BinaryOp::Mul, lit(2), clone(n)));
                default: break;
            }
            throw std::domain_error(std::string(function_name(n.fn)) + " has no classical derivative");
        }
    }
    throw std::domain_error("unknown node");
}

}  // namespace

std::optional<Expr> derivative(const Expr& e, Variable v) {
    NodePtr d;
    try {
        d = diff(*e.root_, v);
    } catch (const std::domain_error&) {
        return std::nullopt;
    }
    std::shared_ptr<const Node> root(std::move(d));
    Expr out(root, "");
    out.source_ = out.print();
    return out;
}

}  // namespace kolmo::dsl
