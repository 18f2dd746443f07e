#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kolmo/group.hpp"

namespace kolmo::dsl {

/// Byte range [begin, end) of a node in its source string.
struct SourceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, const std::string& message);
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class EvalError : public std::runtime_error {
public:
    EvalError(SourceSpan span, const std::string& message);
    SourceSpan span() const noexcept { return span_; }

private:
    SourceSpan span_;
};

enum class NodeKind { Literal, Variable, Binary, Negate, Call };
enum class Variable { X, Y, T };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Function {
    Sin, Cos, Exp, Log, Abs, Sqrt, Min, Max, Sign, Step, Floor, Checkerboard
};

struct Node {
    NodeKind kind = NodeKind::Literal;
    double value = 0.0;
    Variable var = Variable::X;
    BinaryOp op = BinaryOp::Add;
    Function fn = Function::Sin;
    std::vector<std::unique_ptr<Node>> children;
    SourceSpan span;
};

struct Program;

/// Immutable expression over the variables x, y, t.
///
/// Grammar (lowest to highest precedence):
///   sum     := product (('+' | '-') product)*
///   product := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' unary)?          right associative
///   primary := number | 'x' | 'y' | 't' | 'pi' | name '(' args ')' | '(' sum ')'
///
/// Copies share the tree; evaluation is reentrant.
class Expr {
public:
    Expr();  // the literal 0

    static Expr parse(std::string_view source);
    static Expr constant(double value);

    double eval(const Point& z) const;
    double eval(double x, double y, double t) const { return eval(Point{x, y, t}); }

    /// Pretty-printed form with minimal parentheses; reparses to an equal tree.
    std::string print() const;
    const std::string& source() const { return source_; }

    bool depends_on(Variable v) const;
    /// True when the tree is a single literal.
    bool is_constant() const;

    const Node& root() const { return *root_; }

    friend bool operator==(const Expr& a, const Expr& b);
    friend std::optional<Expr> derivative(const Expr& e, Variable v);

private:
    Expr(std::shared_ptr<const Node> root, std::string source);

    std::shared_ptr<const Node> root_;
    std::shared_ptr<const Program> program_;
    std::string source_;
};

/// Symbolic partial derivative with light simplification (0 and 1
/// absorption, literal folding). Returns nullopt when a function without a
/// classical derivative (abs, min, max, sign, step, floor, checkerboard) has
/// an argument that depends on v.
std::optional<Expr> derivative(const Expr& e, Variable v);

/// step(s) = 1 for s >= 0 and 0 otherwise (ties go to 1).
inline double step_function(double s) { return s >= 0.0 ? 1.0 : 0.0; }

/// Piecewise-constant field on cells of size (sx, sy, st) anchored at the
/// origin. Each cell takes a value in [lo, hi] drawn from a counter-based
/// integer hash of (seed, cell index); no floating-point state is involved.
double checkerboard(std::uint64_t seed, double sx, double sy, double st, double lo, double hi,
                    const Point& z);

}  // namespace kolmo::dsl
