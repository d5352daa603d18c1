#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "coordcheck/diagnostics.hpp"
#include "coordcheck/topology.hpp"

namespace coord {

// --- Expressions -----------------------------------------------------------
// Boolean connectives, integer comparison, and +/- over process locals and
// literals. No multiplication.

enum class BinOp { And, Or, Eq, Ne, Lt, Le, Gt, Ge, Add, Sub };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { BoolLit, IntLit, Local, Not, Bin };
  Kind kind = Kind::IntLit;
  bool bool_value = false;
  int64_t int_value = 0;
  std::string local;
  BinOp op = BinOp::Add;
  ExprPtr lhs, rhs;
};

ExprPtr make_bool(bool v);
ExprPtr make_int(int64_t v);
ExprPtr make_local(std::string name);
ExprPtr make_not(ExprPtr e);
ExprPtr make_bin(BinOp op, ExprPtr l, ExprPtr r);

// --- Statements ------------------------------------------------------------

struct Statement;

struct SendStmt {
  std::string channel;
  std::string label;
};
struct ReceiveStmt {
  std::string channel;
  std::vector<std::string> expected;   // nonempty
  std::optional<std::string> bind;     // int local receiving the label ordinal
};
struct AcquireStmt {
  std::string resource;
};
struct ReleaseStmt {
  std::string resource;
};
struct CounterAcquireStmt {
  std::string resource;
  int64_t amount = 1;
};
struct CounterReleaseStmt {
  std::string resource;
  int64_t amount = 1;
};
struct AssignStmt {
  std::string local;
  ExprPtr value;
};
struct IfStmt {
  ExprPtr cond;
  std::vector<Statement> then_body;
  std::vector<Statement> else_body;
};
struct WhileStmt {
  ExprPtr cond;
  std::vector<Statement> body;  // must be non-blocking (parse-enforced)
};
struct EitherStmt {
  std::vector<std::vector<Statement>> branches;  // >= 2, each nonempty
};
struct GotoStmt {
  std::string target;  // a label of the same process, or Done
};
struct SkipStmt {};

struct Statement {
  std::variant<SendStmt, ReceiveStmt, AcquireStmt, ReleaseStmt, CounterAcquireStmt,
               CounterReleaseStmt, AssignStmt, IfStmt, WhileStmt, EitherStmt, GotoStmt, SkipStmt>
      node;
  int line = 0;
};

// --- Processes -------------------------------------------------------------

struct LocalDecl {
  std::string name;
  bool is_bool = false;
  int64_t lo = 0;  // bool: [0, 1]
  int64_t hi = 1;
  int64_t init = 0;
  int line = 0;
};

struct LabeledStep {
  std::string label;
  std::vector<Statement> statements;  // nonempty; an either/or is always sole
  int line = 0;
};

struct ProcessDef {
  std::string agent;
  bool fair = false;  // accepted and ignored; safety-only checking
  std::vector<LocalDecl> locals;
  std::vector<LabeledStep> body;  // nonempty

  const LocalDecl* find_local(const std::string& name) const;
  int step_index(const std::string& label) const;  // -1 if absent
};

struct ProtocolProgram {
  std::vector<ProcessDef> processes;

  const ProcessDef* find_process(const std::string& agent) const;
};

// Reserved terminal label. Never declared; always a valid goto target.
inline constexpr const char* kDoneLabel = "Done";

struct ProtocolParseError : std::runtime_error {
  int line;
  int col;
  ProtocolParseError(int line_, int col_, const std::string& message)
      : std::runtime_error("line " + std::to_string(line_) + ":" + std::to_string(col_) + ": " +
                           message),
        line(line_),
        col(col_) {}
};

ProtocolProgram parse_protocol(const std::string& text);

// Canonical pretty-printer; parse(print(p)) reproduces the same AST.
std::string print_protocol(const ProtocolProgram& p);

// Checks a parsed program against a topology: directions, labels, resource
// kinds, and the process-set/agent-set bijection. Also emits the atomicity
// advisory for a receive that is not the first statement of its either branch.
ValidationReport bind_check(const ProtocolProgram& p, const Topology& t);

}  // namespace coord
